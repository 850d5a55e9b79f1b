#include "capflow/projection.hpp"

#include <fftw3.h>

#include <cmath>
#include <vector>

namespace capflow {

struct MacProjector::Impl {
    fftw_plan fwd = nullptr, bwd = nullptr;
    double* work = nullptr;
    std::vector<double> lamX, lamY; // discrete 5-point eigenvalues 4 sin^2(k pi / 2n) / h^2

    Impl(const Grid& g) {
        work = fftw_alloc_real(g.cellCount());
        fwd = fftw_plan_r2r_2d(g.ny, g.nx, work, work, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
        bwd = fftw_plan_r2r_2d(g.ny, g.nx, work, work, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
        lamX.resize(g.nx);
        lamY.resize(g.ny);
        for (int i = 0; i < g.nx; ++i) {
            const double s = std::sin(0.5 * M_PI * i / g.nx);
            lamX[i] = 4.0 * s * s / (g.dx() * g.dx());
        }
        for (int j = 0; j < g.ny; ++j) {
            const double s = std::sin(0.5 * M_PI * j / g.ny);
            lamY[j] = 4.0 * s * s / (g.dy() * g.dy());
        }
    }
    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (work) fftw_free(work);
    }
};

MacProjector::MacProjector(const Grid& g) : grid_(g), impl_(std::make_unique<Impl>(g)) {}
MacProjector::~MacProjector() = default;

ScalarField MacProjector::solveDiscrete(const ScalarField& f) const {
    const Grid& g = grid_;
    requireSameGrid(g, f.grid(), "MacProjector::solveDiscrete");
    Impl& p = *impl_;
    for (int k = 0; k < f.size(); ++k) p.work[k] = f.at(k);
    fftw_execute(p.fwd);
    const double norm = 1.0 / (4.0 * g.nx * g.ny);
    p.work[0] = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (i == 0 && j == 0) continue;
            p.work[g.id(i, j)] *= norm / (p.lamX[i] + p.lamY[j]);
        }
    fftw_execute(p.bwd);
    ScalarField phi(g);
    for (int k = 0; k < phi.size(); ++k) phi.at(k) = p.work[k];
    return phi;
}

void MacProjector::project(VelocityField& G) const {
    requireSameGrid(grid_, G.grid(), "MacProjector::project");
    G.zeroNormalBoundary();
    const ScalarField d = divergence(G);
    // -Lap(phi) = -d  =>  div(G - grad phi) = 0
    ScalarField md = d;
    md *= -1.0;
    const ScalarField phi = solveDiscrete(md);
    const VelocityField gp = gradientToFaces(phi);
    G -= gp;
}

} // namespace capflow
