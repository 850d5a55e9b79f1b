#include "capflow/stream_solver.hpp"

#include <fftw3.h>

#include <cmath>

namespace capflow {

struct StreamSolver::Impl {
    fftw_plan plan = nullptr; // DST-I is self-inverse up to scaling
    double* work = nullptr;
    std::vector<double> lamX, lamY; // node 5-point eigenvalues
    int mx, my;

    Impl(const Grid& g) : mx(g.nx - 1), my(g.ny - 1) {
        work = fftw_alloc_real(static_cast<size_t>(mx) * my);
        plan = fftw_plan_r2r_2d(my, mx, work, work, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
        lamX.resize(mx);
        lamY.resize(my);
        for (int i = 0; i < mx; ++i) {
            const double s = std::sin(0.5 * M_PI * (i + 1) / g.nx);
            lamX[i] = 4.0 * s * s / (g.dx() * g.dx());
        }
        for (int j = 0; j < my; ++j) {
            const double s = std::sin(0.5 * M_PI * (j + 1) / g.ny);
            lamY[j] = 4.0 * s * s / (g.dy() * g.dy());
        }
    }
    ~Impl() {
        if (plan) fftw_destroy_plan(plan);
        if (work) fftw_free(work);
    }
};

StreamSolver::StreamSolver(const Grid& g) : grid_(g), impl_(std::make_unique<Impl>(g)) {}
StreamSolver::~StreamSolver() = default;

// interior node (i,j), i = 1..nx-1, j = 1..ny-1, stored as (j-1)*(nx-1)+(i-1)
VelocityField StreamSolver::applyR(const std::vector<double>& psi) const {
    const Grid& g = grid_;
    const int mx = g.nx - 1;
    auto at = [&](int i, int j) -> double {
        if (i <= 0 || i >= g.nx || j <= 0 || j >= g.ny) return 0.0;
        return psi[(j - 1) * mx + (i - 1)];
    };
    VelocityField w(g);
    const double idy = 1.0 / g.dy(), idx = 1.0 / g.dx();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) w.u(i, j) = (at(i, j + 1) - at(i, j)) * idy;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) w.v(i, j) = -(at(i + 1, j) - at(i, j)) * idx;
    return w;
}

std::vector<double> StreamSolver::applyRT(const VelocityField& w) const {
    const Grid& g = grid_;
    requireSameGrid(g, w.grid(), "StreamSolver::applyRT");
    const int mx = g.nx - 1, my = g.ny - 1;
    std::vector<double> out(static_cast<size_t>(mx) * my, 0.0);
    const double dV = g.cellVolume();
    const double idy = 1.0 / g.dy(), idx = 1.0 / g.dx();
    // transpose of the gather in applyR, weighted by dV
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            // node (i,j) receives +u(i,j-1) (psi appears as +at(i,j) in face (i,j-1))
            // and -u(i,j) from the u differences, +v/-v from the v differences
            double s = 0.0;
            s += w.u(i, j - 1) * idy;
            s -= w.u(i, j) * idy;
            s -= w.v(i - 1, j) * idx;
            s += w.v(i, j) * idx;
            out[(j - 1) * mx + (i - 1)] = s * dV;
        }
    return out;
}

std::vector<double> StreamSolver::diagSolve(const std::vector<double>& r, double c0, double c1,
                                            double c2, double c3) const {
    Impl& p = *impl_;
    const int n = p.mx * p.my;
    for (int k = 0; k < n; ++k) p.work[k] = r[k];
    fftw_execute(p.plan);
    const double norm = 1.0 / (4.0 * grid_.nx * grid_.ny);
    for (int j = 0; j < p.my; ++j)
        for (int i = 0; i < p.mx; ++i) {
            const double lam = p.lamX[i] + p.lamY[j];
            const double f = c0 + lam * (c1 + lam * (c2 + lam * c3));
            p.work[j * p.mx + i] *= norm / f;
        }
    fftw_execute(p.plan);
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = p.work[k];
    return out;
}

std::vector<double> StreamSolver::streamOf(const VelocityField& v) const {
    const Grid& g = grid_;
    requireSameGrid(g, v.grid(), "StreamSolver::streamOf");
    const int mx = g.nx - 1, my = g.ny - 1;
    // node curl: (dv/dx - du/dy) at interior nodes
    std::vector<double> curl(static_cast<size_t>(mx) * my);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double dvdx = (v.v(i, j) - v.v(i - 1, j)) / g.dx();
            const double dudy = (v.u(i, j) - v.u(i, j - 1)) / g.dy();
            curl[(j - 1) * mx + (i - 1)] = dvdx - dudy;
        }
    // curl(grad-perp psi) = -Lap psi, so psi = (-Lap_node)^{-1} curl(v)
    return diagSolve(curl, 0.0, 1.0, 0.0, 0.0);
}

} // namespace capflow
