#include "capflow/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <vector>

namespace capflow {

struct NeumannPoisson::SpectralPlan {
    fftw_plan fwd = nullptr, bwd = nullptr;
    double* work = nullptr;
    std::vector<double> lamX, lamY; // continuous Neumann eigenvalues (k pi / L)^2
    int n = 0;

    SpectralPlan(const Grid& g) {
        n = g.cellCount();
        work = fftw_alloc_real(n);
        // row-major (j slow, i fast): dims are (ny, nx)
        fwd = fftw_plan_r2r_2d(g.ny, g.nx, work, work, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
        bwd = fftw_plan_r2r_2d(g.ny, g.nx, work, work, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
        lamX.resize(g.nx);
        lamY.resize(g.ny);
        const double pi = M_PI;
        for (int i = 0; i < g.nx; ++i) lamX[i] = (i * pi / g.Lx) * (i * pi / g.Lx);
        for (int j = 0; j < g.ny; ++j) lamY[j] = (j * pi / g.Ly) * (j * pi / g.Ly);
    }
    ~SpectralPlan() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (work) fftw_free(work);
    }
};

NeumannPoisson::NeumannPoisson(const Grid& g, PoissonBackend backend, double relTol, int maxIter)
    : grid_(g), backend_(backend), relTol_(relTol), maxIter_(maxIter) {
    if (maxIter_ <= 0) maxIter_ = 40 * (g.nx + g.ny);
    plan_ = std::make_unique<SpectralPlan>(g);
}

NeumannPoisson::~NeumannPoisson() = default;

MeanZeroField NeumannPoisson::solve(const MeanZeroField& f) const {
    requireSameGrid(grid_, f.grid(), "NeumannPoisson::solve");
    if (!f.allFinite()) throw std::invalid_argument("NeumannPoisson::solve: non-finite input");
    MeanZeroField phi = (backend_ == PoissonBackend::Spectral) ? solveSpectral(f) : solveCG(f);
    // residual || -Lap phi - f ||_inf against the backend operator
    ScalarField r = applyNegLaplacian(phi);
    r -= f;
    lastResidual_ = r.maxAbs();
    const double scale = std::max(1.0, f.maxAbs());
    if (lastResidual_ > 1e3 * relTol_ * scale)
        throw PoissonError("NeumannPoisson: residual above tolerance", lastResidual_);
    return phi;
}

MeanZeroField NeumannPoisson::solveSpectral(const MeanZeroField& f) const {
    const Grid& g = grid_;
    SpectralPlan& p = *plan_;
    for (int k = 0; k < f.size(); ++k) p.work[k] = f.at(k);
    fftw_execute(p.fwd);
    const double norm = 1.0 / (4.0 * g.nx * g.ny);
    p.work[0] = 0.0; // mean mode
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (i == 0 && j == 0) continue;
            p.work[g.id(i, j)] *= norm / (p.lamX[i] + p.lamY[j]);
        }
    fftw_execute(p.bwd);
    ScalarField phi(g);
    for (int k = 0; k < phi.size(); ++k) phi.at(k) = p.work[k];
    lastIterations_ = 1;
    return projectMeanZero(phi);
}

ScalarField NeumannPoisson::applySpectral(const ScalarField& phi) const {
    const Grid& g = grid_;
    SpectralPlan& p = *plan_;
    for (int k = 0; k < phi.size(); ++k) p.work[k] = phi.at(k);
    fftw_execute(p.fwd);
    const double norm = 1.0 / (4.0 * g.nx * g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) p.work[g.id(i, j)] *= norm * (p.lamX[i] + p.lamY[j]);
    fftw_execute(p.bwd);
    ScalarField out(g);
    for (int k = 0; k < out.size(); ++k) out.at(k) = p.work[k];
    return out;
}

ScalarField NeumannPoisson::applyFD(const ScalarField& phi) const {
    const Grid& g = grid_;
    ScalarField out(g);
    const double idx2 = 1.0 / (g.dx() * g.dx());
    const double idy2 = 1.0 / (g.dy() * g.dy());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double c = phi(i, j);
            const double w = (i > 0) ? phi(i - 1, j) : c;       // mirror at walls
            const double e = (i < g.nx - 1) ? phi(i + 1, j) : c;
            const double s = (j > 0) ? phi(i, j - 1) : c;
            const double n = (j < g.ny - 1) ? phi(i, j + 1) : c;
            out(i, j) = -((e - 2 * c + w) * idx2 + (n - 2 * c + s) * idy2);
        }
    return out;
}

ScalarField NeumannPoisson::applyNegLaplacian(const ScalarField& phi) const {
    return (backend_ == PoissonBackend::Spectral) ? applySpectral(phi) : applyFD(phi);
}

MeanZeroField NeumannPoisson::solveCG(const MeanZeroField& f) const {
    const Grid& g = grid_;
    ScalarField x(g), r = f, p = f;
    double rr = 0.0;
    for (int k = 0; k < r.size(); ++k) rr += r.at(k) * r.at(k);
    const double rr0 = rr;
    if (rr0 == 0.0) {
        lastIterations_ = 0;
        return MeanZeroField(g);
    }
    int it = 0;
    for (; it < maxIter_; ++it) {
        if (rr <= relTol_ * relTol_ * rr0) break;
        ScalarField Ap = applyFD(p);
        double pAp = 0.0;
        for (int k = 0; k < p.size(); ++k) pAp += p.at(k) * Ap.at(k);
        const double alpha = rr / pAp;
        for (int k = 0; k < x.size(); ++k) x.at(k) += alpha * p.at(k);
        for (int k = 0; k < r.size(); ++k) r.at(k) -= alpha * Ap.at(k);
        double rrNew = 0.0;
        for (int k = 0; k < r.size(); ++k) rrNew += r.at(k) * r.at(k);
        const double beta = rrNew / rr;
        for (int k = 0; k < p.size(); ++k) p.at(k) = r.at(k) + beta * p.at(k);
        rr = rrNew;
    }
    lastIterations_ = it;
    if (rr > relTol_ * relTol_ * rr0)
        throw PoissonError("NeumannPoisson CG: no convergence within max iterations",
                           std::sqrt(rr / rr0));
    return projectMeanZero(x);
}

double NeumannPoisson::hm1Inner(const MeanZeroField& f, const MeanZeroField& g) const {
    requireSameGrid(f.grid(), g.grid(), "hm1Inner");
    requireSameGrid(grid_, f.grid(), "hm1Inner");
    MeanZeroField phi = solve(g);
    double s = 0.0;
    for (int k = 0; k < f.size(); ++k) s += f.at(k) * phi.at(k);
    return s * grid_.cellVolume();
}

double NeumannPoisson::hm1NormSq(const MeanZeroField& f) const { return hm1Inner(f, f); }

double NeumannPoisson::dirichletEnergy(const ScalarField& phi) const {
    requireSameGrid(grid_, phi.grid(), "dirichletEnergy");
    ScalarField Aphi = applyNegLaplacian(phi);
    double s = 0.0;
    for (int k = 0; k < phi.size(); ++k) s += phi.at(k) * Aphi.at(k);
    return s * grid_.cellVolume();
}

} // namespace capflow
