#include "capflow/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace capflow {

double CapillaryParams::cosGamma() const { return std::cos(gamma); }

void CapillaryParams::validate() const {
    if (c0 <= 0.0) throw std::invalid_argument("CapillaryParams: c0 must be positive");
    const double cg = cosGamma();
    if (!(cg >= -1e-15 && cg < 1.0))
        throw std::invalid_argument("CapillaryParams: gamma must lie in (0, pi/2]");
}

int PhaseIndicator::count() const {
    int c = 0;
    for (uint8_t x : v_) c += x;
    return c;
}

double PhaseIndicator::mass() const { return count() * grid_.cellVolume(); }

ScalarField PhaseIndicator::toScalar() const {
    ScalarField f(grid_);
    for (int k = 0; k < size(); ++k) f.at(k) = v_[k];
    return f;
}

TvScheme::TvScheme(const Grid& g, int smoothingPasses)
    : grid_(g), passes_(smoothingPasses < 0 ? defaultPasses(g) : smoothingPasses) {
    tmp_.resize(g.cellCount());
}

int TvScheme::defaultPasses(const Grid& g) {
    // sigma in cells ~ sqrt(passes/2); growing like sqrt(nx) balances lattice
    // anisotropy against curvature smearing (first-order perimeter error)
    return std::max(2, std::min(g.nx, g.ny) / 16);
}

void TvScheme::smoothPass(std::vector<double>& u) const {
    const int nx = grid_.nx, ny = grid_.ny;
    std::vector<double>& t = tmp_;
    // x direction, mirror at walls
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double w = u[grid_.id(i > 0 ? i - 1 : 0, j)];
            const double e = u[grid_.id(i < nx - 1 ? i + 1 : nx - 1, j)];
            t[grid_.id(i, j)] = 0.25 * w + 0.5 * u[grid_.id(i, j)] + 0.25 * e;
        }
    // y direction
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double s = t[grid_.id(i, j > 0 ? j - 1 : 0)];
            const double n = t[grid_.id(i, j < ny - 1 ? j + 1 : ny - 1)];
            u[grid_.id(i, j)] = 0.25 * s + 0.5 * t[grid_.id(i, j)] + 0.25 * n;
        }
}

void TvScheme::applyD(const std::vector<double>& u, std::vector<double>& gx,
                      std::vector<double>& gy) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const double idx = 1.0 / grid_.dx(), idy = 1.0 / grid_.dy();
    std::vector<double> s = u;
    for (int p = 0; p < passes_; ++p) smoothPass(s);
    gx.assign(u.size(), 0.0);
    gy.assign(u.size(), 0.0);
    // face differences averaged back to cell centers; boundary faces are zero
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double dl = (i > 0) ? (s[grid_.id(i, j)] - s[grid_.id(i - 1, j)]) * idx : 0.0;
            const double dr = (i < nx - 1) ? (s[grid_.id(i + 1, j)] - s[grid_.id(i, j)]) * idx : 0.0;
            const double db = (j > 0) ? (s[grid_.id(i, j)] - s[grid_.id(i, j - 1)]) * idy : 0.0;
            const double dt = (j < ny - 1) ? (s[grid_.id(i, j + 1)] - s[grid_.id(i, j)]) * idy : 0.0;
            gx[grid_.id(i, j)] = 0.5 * (dl + dr);
            gy[grid_.id(i, j)] = 0.5 * (db + dt);
        }
}

void TvScheme::applyDT(const std::vector<double>& gx, const std::vector<double>& gy,
                       std::vector<double>& out) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const double idx = 1.0 / grid_.dx(), idy = 1.0 / grid_.dy();
    std::vector<double> acc(gx.size(), 0.0);
    // transpose of (face difference + cell averaging)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double px = 0.5 * gx[grid_.id(i, j)];
            if (i > 0) {                    // face between (i-1,j) and (i,j)
                acc[grid_.id(i, j)] += px * idx;
                acc[grid_.id(i - 1, j)] -= px * idx;
            }
            if (i < nx - 1) {               // face between (i,j) and (i+1,j)
                acc[grid_.id(i + 1, j)] += px * idx;
                acc[grid_.id(i, j)] -= px * idx;
            }
            const double py = 0.5 * gy[grid_.id(i, j)];
            if (j > 0) {
                acc[grid_.id(i, j)] += py * idy;
                acc[grid_.id(i, j - 1)] -= py * idy;
            }
            if (j < ny - 1) {
                acc[grid_.id(i, j + 1)] += py * idy;
                acc[grid_.id(i, j)] -= py * idy;
            }
        }
    for (int p = 0; p < passes_; ++p) smoothPass(acc); // smoothing is self-adjoint
    out = std::move(acc);
}

double TvScheme::tvInterior(const std::vector<double>& u) const {
    std::vector<double> gx, gy;
    applyD(u, gx, gy);
    double s = 0.0;
    for (size_t k = 0; k < gx.size(); ++k) s += std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
    return s * grid_.cellVolume();
}

std::vector<double> TvScheme::tvDensity(const std::vector<double>& u) const {
    std::vector<double> gx, gy;
    applyD(u, gx, gy);
    std::vector<double> d(gx.size());
    const double dV = grid_.cellVolume();
    for (size_t k = 0; k < gx.size(); ++k) d[k] = dV * std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
    return d;
}

double TvScheme::operatorNormBound() const {
    // ||Avg|| <= 1, ||smooth|| <= 1, ||Grad|| <= 2*sqrt(1/dx^2 + 1/dy^2)
    const double dx = grid_.dx(), dy = grid_.dy();
    return 2.0 * std::sqrt(1.0 / (dx * dx) + 1.0 / (dy * dy));
}

std::vector<double> boundaryFaceLength(const Grid& g) {
    std::vector<double> b(g.cellCount(), 0.0);
    for (int j = 0; j < g.ny; ++j) {
        b[g.id(0, j)] += g.dy();
        b[g.id(g.nx - 1, j)] += g.dy();
    }
    for (int i = 0; i < g.nx; ++i) {
        b[g.id(i, 0)] += g.dx();
        b[g.id(i, g.ny - 1)] += g.dx();
    }
    return b;
}

double boundaryTrace(const PhaseIndicator& chi) {
    const Grid& g = chi.grid();
    const std::vector<double> b = boundaryFaceLength(g);
    double s = 0.0;
    for (int k = 0; k < chi.size(); ++k)
        if (chi.at(k)) s += b[k];
    return s;
}

double boundaryTraceRelaxed(const std::vector<double>& u, const Grid& g) {
    const std::vector<double> b = boundaryFaceLength(g);
    double s = 0.0;
    for (size_t k = 0; k < u.size(); ++k) s += b[k] * u[k];
    return s;
}

double capillaryEnergy(const PhaseIndicator& chi, const CapillaryParams& p, const TvScheme& tv) {
    p.validate();
    requireSameGrid(chi.grid(), tv.grid(), "capillaryEnergy");
    std::vector<double> u(chi.size());
    for (int k = 0; k < chi.size(); ++k) u[k] = chi.at(k);
    return p.c0 * tv.tvInterior(u) + p.c0 * p.cosGamma() * boundaryTrace(chi);
}

double capillaryEnergyRelaxed(const std::vector<double>& u, const Grid& g,
                              const CapillaryParams& p, const TvScheme& tv) {
    return p.c0 * tv.tvInterior(u) + p.c0 * p.cosGamma() * boundaryTraceRelaxed(u, g);
}

InterfaceGeometry interfaceGeometry(const PhaseIndicator& chi, const TvScheme& tv) {
    const Grid& g = chi.grid();
    std::vector<double> u(chi.size());
    for (int k = 0; k < chi.size(); ++k) u[k] = chi.at(k);
    std::vector<double> gx, gy;
    tv.applyD(u, gx, gy);
    std::vector<double> w(u.size());
    const double dV = g.cellVolume();
    for (size_t k = 0; k < u.size(); ++k) w[k] = dV * std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);

    // normals from a wider tent mollification of chi: raw binary gradients
    // have quantized directions, and the mollifier must cover the support of
    // the perimeter weights
    std::vector<double> m = u;
    for (int p = 0; p < 4 * std::max(2, tv.smoothingPasses()); ++p) tv.smoothPass(m);

    InterfaceGeometry geom;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int id = g.id(i, j);
            if (w[id] == 0.0) continue;
            // the normal points toward increasing chi (into the 1-phase)
            const double ml = m[g.id(std::max(i - 1, 0), j)];
            const double mr = m[g.id(std::min(i + 1, g.nx - 1), j)];
            const double mb = m[g.id(i, std::max(j - 1, 0))];
            const double mt = m[g.id(i, std::min(j + 1, g.ny - 1))];
            double nx = (mr - ml) / (2.0 * g.dx());
            double ny = (mt - mb) / (2.0 * g.dy());
            double len = std::sqrt(nx * nx + ny * ny);
            if (len < 1e-14) { // degenerate mollified gradient: fall back to the TV gradient
                nx = gx[id];
                ny = gy[id];
                len = std::sqrt(nx * nx + ny * ny);
            }
            nx /= len;
            ny /= len;
            geom.cells.push_back({i, j, g.xc(i), g.yc(j), nx, ny, w[id]});
            geom.totalWeight += w[id];
        }
    return geom;
}

PhaseIndicator halfPlaneX(const Grid& g, double xcut) {
    PhaseIndicator chi(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) chi(i, j) = g.xc(i) < xcut ? 1 : 0;
    return chi;
}

PhaseIndicator halfPlaneY(const Grid& g, double ycut) {
    PhaseIndicator chi(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) chi(i, j) = g.yc(j) < ycut ? 1 : 0;
    return chi;
}

PhaseIndicator disk(const Grid& g, double cx, double cy, double r) {
    PhaseIndicator chi(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dx = g.xc(i) - cx, dy = g.yc(j) - cy;
            chi(i, j) = (dx * dx + dy * dy < r * r) ? 1 : 0;
        }
    return chi;
}

PhaseIndicator twoDisks(const Grid& g, double cx1, double cy1, double r1, double cx2, double cy2,
                        double r2) {
    PhaseIndicator chi(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double d1x = g.xc(i) - cx1, d1y = g.yc(j) - cy1;
            const double d2x = g.xc(i) - cx2, d2y = g.yc(j) - cy2;
            chi(i, j) = (d1x * d1x + d1y * d1y < r1 * r1 || d2x * d2x + d2y * d2y < r2 * r2) ? 1 : 0;
        }
    return chi;
}

} // namespace capflow
