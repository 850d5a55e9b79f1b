#include "capflow/flow_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace capflow {

FlowMapSample integrateFlow(const VelocityField& v, double duration, int minSubsteps) {
    if (!v.allFinite()) throw std::invalid_argument("integrateFlow: non-finite velocity");
    const Grid& g = v.grid();
    FlowMapSample map;
    map.grid = g;
    map.duration = duration;
    map.footX.resize(g.cellCount());
    map.footY.resize(g.cellCount());

    const double vmax = v.maxAbs();
    const double spacing = std::min(g.dx(), g.dy());
    // substep * ||v||_inf capped well below spacing/2; the tighter factor keeps
    // RK4 accurate through the kinks of the bilinear velocity interpolant
    int n = minSubsteps;
    if (vmax > 0.0)
        n = std::max(n, static_cast<int>(std::ceil(std::fabs(duration) * vmax / (0.0625 * spacing))));
    map.substeps = n;
    const double dt = -duration / n; // dy/dt = +v integrated over -duration

    auto clampedU = [&](double x, double y) {
        return v.sampleU(std::clamp(x, 0.0, g.Lx), std::clamp(y, 0.0, g.Ly));
    };
    auto clampedV = [&](double x, double y) {
        return v.sampleV(std::clamp(x, 0.0, g.Lx), std::clamp(y, 0.0, g.Ly));
    };

    double maxClamp = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double x = g.xc(i), y = g.yc(j);
            for (int s = 0; s < n; ++s) {
                const double k1x = clampedU(x, y), k1y = clampedV(x, y);
                const double k2x = clampedU(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y);
                const double k2y = clampedV(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y);
                const double k3x = clampedU(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y);
                const double k3y = clampedV(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y);
                const double k4x = clampedU(x + dt * k3x, y + dt * k3y);
                const double k4y = clampedV(x + dt * k3x, y + dt * k3y);
                x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
                y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
            }
            const double cx = std::clamp(x, 0.0, g.Lx), cy = std::clamp(y, 0.0, g.Ly);
            maxClamp = std::max(maxClamp, std::hypot(x - cx, y - cy));
            map.footX[g.id(i, j)] = cx;
            map.footY[g.id(i, j)] = cy;
        }
    map.maxClampDistance = maxClamp;
    return map;
}

ScalarField composeWithMap(const ScalarField& f, const FlowMapSample& map) {
    const Grid& g = f.grid();
    requireSameGrid(g, map.grid, "composeWithMap");
    ScalarField out(g);
    const double hx = g.dx(), hy = g.dy();
    const int nx = g.nx, ny = g.ny;
    for (int k = 0; k < f.size(); ++k) {
        // clamped bilinear on the cell-center lattice
        double s = (map.footX[k] - 0.5 * hx) / hx;
        double t = (map.footY[k] - 0.5 * hy) / hy;
        s = std::clamp(s, 0.0, static_cast<double>(nx - 1));
        t = std::clamp(t, 0.0, static_cast<double>(ny - 1));
        int i0 = std::min(static_cast<int>(s), nx - 2);
        int j0 = std::min(static_cast<int>(t), ny - 2);
        const double fs = s - i0, ft = t - j0;
        out.at(k) = (1 - fs) * (1 - ft) * f(i0, j0) + fs * (1 - ft) * f(i0 + 1, j0) +
                    (1 - fs) * ft * f(i0, j0 + 1) + fs * ft * f(i0 + 1, j0 + 1);
    }
    return out;
}

ScalarField pullback(const PhaseIndicator& chi, const FlowMapSample& map) {
    return composeWithMap(chi.toScalar(), map);
}

double mapGradientMaxNorm(const FlowMapSample& map) {
    const Grid& g = map.grid;
    double m = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const double dxx = (map.footX[g.id(i + 1, j)] - map.footX[g.id(i - 1, j)]) / (2 * g.dx());
            const double dyx = (map.footX[g.id(i, j + 1)] - map.footX[g.id(i, j - 1)]) / (2 * g.dy());
            const double dxy = (map.footY[g.id(i + 1, j)] - map.footY[g.id(i - 1, j)]) / (2 * g.dx());
            const double dyy = (map.footY[g.id(i, j + 1)] - map.footY[g.id(i, j - 1)]) / (2 * g.dy());
            m = std::max(m, std::sqrt(dxx * dxx + dyx * dyx + dxy * dxy + dyy * dyy));
        }
    return m;
}

double velocityC0Norm(const VelocityField& v) { return v.maxAbs(); }

double velocityC1Norm(const VelocityField& v) { return v.maxAbs() + v.maxGradAbs(); }

DifferenceRate compositionDifferenceRate(const PhaseIndicator& chi, const VelocityField& v,
                                         double s, const NeumannPoisson& poisson,
                                         double driftTol) {
    if (s <= 0.0) throw std::invalid_argument("compositionDifferenceRate: s must be positive");
    DifferenceRate r;
    const FlowMapSample map = integrateFlow(v, s);
    ScalarField d = pullback(chi, map);
    for (int k = 0; k < d.size(); ++k) d.at(k) = chi.at(k) - d.at(k);
    r.massDrift = std::fabs(d.integral());
    r.massDriftFlagged = r.massDrift > driftTol * std::max(chi.mass(), 1e-300);
    const MeanZeroField dz = projectMeanZero(d);
    r.value = std::sqrt(std::max(0.0, poisson.hm1NormSq(dz))) / s;
    return r;
}

} // namespace capflow
