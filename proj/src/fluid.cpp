#include "capflow/fluid.hpp"

#include "capflow/poisson.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace capflow {

FluidParams FluidParams::coupled(double h, double rho1, double rho2, double nu1, double nu2) {
    FluidParams p;
    p.rho1 = rho1;
    p.rho2 = rho2;
    p.nu1 = nu1;
    p.nu2 = nu2;
    p.k = std::pow(h, -1.0 / 8.0);
    p.beta = 1.0 / p.k;
    p.paperScaleCoupling = true;
    return p;
}

void FluidParams::validate() const {
    if (rho1 <= 0 || rho2 <= 0 || nu1 <= 0 || nu2 <= 0 || k <= 0 || beta < 0)
        throw std::invalid_argument("FluidParams: physical parameters must be positive");
}

VelocityField cutoff(const VelocityField& v, double k) {
    if (k <= 0.0) throw std::invalid_argument("cutoff: k must be positive");
    VelocityField out = v;
    for (double& x : out.uData()) x = std::clamp(x, -k, k);
    for (double& x : out.vData()) x = std::clamp(x, -k, k);
    return out;
}

ScalarField densityOf(const PhaseIndicator& chi, const FluidParams& par) {
    ScalarField rho(chi.grid());
    for (int k = 0; k < chi.size(); ++k) rho.at(k) = chi.at(k) ? par.rho1 : par.rho2;
    return rho;
}

ScalarField densityInterpolant(const PhaseIndicator& chiPrev, const PhaseIndicator& chiNew,
                               double theta, const FluidParams& par) {
    requireSameGrid(chiPrev.grid(), chiNew.grid(), "densityInterpolant");
    if (theta < 0.0 || theta > 1.0)
        throw std::invalid_argument("densityInterpolant: theta outside [0,1]");
    ScalarField rho(chiPrev.grid());
    for (int k = 0; k < chiPrev.size(); ++k) {
        const double a = chiPrev.at(k) ? par.rho1 : par.rho2;
        const double b = chiNew.at(k) ? par.rho1 : par.rho2;
        rho.at(k) = (1.0 - theta) * a + theta * b;
    }
    return rho;
}

namespace {

// cell density averaged onto interior faces; boundary faces unused
void faceDensity(const ScalarField& rho, VelocityField& out) {
    const Grid& g = rho.grid();
    out = VelocityField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) out.u(i, j) = 0.5 * (rho(i - 1, j) + rho(i, j));
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.v(i, j) = 0.5 * (rho(i, j - 1) + rho(i, j));
}

void faceAverage(const PhaseIndicator& chi, VelocityField& out) {
    const Grid& g = chi.grid();
    out = VelocityField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) out.u(i, j) = 0.5 * (chi(i - 1, j) + chi(i, j));
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.v(i, j) = 0.5 * (chi(i, j - 1) + chi(i, j));
}

void mulFaces(VelocityField& w, const VelocityField& coef) {
    const Grid& g = w.grid();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) w.u(i, j) *= coef.u(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) w.v(i, j) *= coef.v(i, j);
}

void axpyFaces(VelocityField& y, double a, const VelocityField& x) {
    for (size_t k = 0; k < y.uData().size(); ++k) y.uData()[k] += a * x.uData()[k];
    for (size_t k = 0; k < y.vData().size(); ++k) y.vData()[k] += a * x.vData()[k];
}

} // namespace

double kineticEnergy(const ScalarField& rho, const VelocityField& v) {
    VelocityField rf;
    faceDensity(rho, rf);
    const Grid& g = v.grid();
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) s += rf.u(i, j) * v.u(i, j) * v.u(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) s += rf.v(i, j) * v.v(i, j) * v.v(i, j);
    return 0.5 * s * g.cellVolume();
}

FluidSolver::FluidSolver(const Grid& g, const FluidParams& par, ViscousBc bc, double relTol,
                         int maxIter)
    : grid_(g), par_(par), bc_(bc), relTol_(relTol), maxIter_(maxIter) {
    par_.validate();
    stream_ = std::make_unique<StreamSolver>(g);
    projector_ = std::make_unique<MacProjector>(g);
}

FluidSolver::~FluidSolver() = default;

VelocityField FluidSolver::applyNegLaplacian(const VelocityField& w) const {
    const Grid& g = grid_;
    const double sig = (bc_ == ViscousBc::NoSlip) ? -1.0 : 1.0; // tangential ghost sign
    const double idx2 = 1.0 / (g.dx() * g.dx()), idy2 = 1.0 / (g.dy() * g.dy());
    VelocityField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const double c = w.u(i, j);
            const double e = w.u(i + 1, j), ww = w.u(i - 1, j); // includes pinned walls
            const double n = (j < g.ny - 1) ? w.u(i, j + 1) : sig * c;
            const double s = (j > 0) ? w.u(i, j - 1) : sig * c;
            out.u(i, j) = -((e - 2 * c + ww) * idx2 + (n - 2 * c + s) * idy2);
        }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double c = w.v(i, j);
            const double n = w.v(i, j + 1), s = w.v(i, j - 1);
            const double e = (i < g.nx - 1) ? w.v(i + 1, j) : sig * c;
            const double ww = (i > 0) ? w.v(i - 1, j) : sig * c;
            out.v(i, j) = -((e - 2 * c + ww) * idx2 + (n - 2 * c + s) * idy2);
        }
    return out;
}

VelocityField FluidSolver::applyA(const VelocityField& w) const {
    VelocityField out = applyNegLaplacian(w);
    projector_->project(out);
    return out;
}

VelocityField FluidSolver::applyViscous(const VelocityField& w, const ScalarField& nuCell,
                                        double* dissipOut) const {
    const Grid& g = grid_;
    const int nx = g.nx, ny = g.ny;
    const double dx = g.dx(), dy = g.dy(), dV = g.cellVolume();
    const double sig = (bc_ == ViscousBc::NoSlip) ? -1.0 : 1.0;

    // symmetric gradient: Dxx, Dyy at cells; Dxy at nodes
    ScalarField dxx(g), dyy(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            dxx(i, j) = (w.u(i + 1, j) - w.u(i, j)) / dx;
            dyy(i, j) = (w.v(i, j + 1) - w.v(i, j)) / dy;
        }
    auto uAt = [&](int i, int j) -> double { // tangential ghost below/above
        if (j < 0) return sig * w.u(i, 0);
        if (j >= ny) return sig * w.u(i, ny - 1);
        return w.u(i, j);
    };
    auto vAt = [&](int i, int j) -> double {
        if (i < 0) return sig * w.v(0, j);
        if (i >= nx) return sig * w.v(nx - 1, j);
        return w.v(i, j);
    };
    std::vector<double> dxy(static_cast<size_t>(nx + 1) * (ny + 1));
    std::vector<double> nuNode(dxy.size()), wNode(dxy.size());
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double dudy = (uAt(i, j) - uAt(i, j - 1)) / dy;
            const double dvdx = (vAt(i, j) - vAt(i - 1, j)) / dx;
            dxy[j * (nx + 1) + i] = 0.5 * (dudy + dvdx);
            double nsum = 0.0;
            int cnt = 0;
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (ci < 0 || ci >= nx || cj < 0 || cj >= ny) continue;
                    nsum += nuCell(ci, cj);
                    ++cnt;
                }
            nuNode[j * (nx + 1) + i] = nsum / cnt;
            const bool bx = (i == 0 || i == nx), by = (j == 0 || j == ny);
            wNode[j * (nx + 1) + i] = dV * (bx ? 0.5 : 1.0) * (by ? 0.5 : 1.0);
        }

    if (dissipOut) {
        double s = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                s += nuCell(i, j) * (dxx(i, j) * dxx(i, j) + dyy(i, j) * dyy(i, j)) * dV;
        for (size_t k = 0; k < dxy.size(); ++k) s += nuNode[k] * 2.0 * dxy[k] * dxy[k] * wNode[k];
        *dissipOut = s;
    }

    // scatter the form gradient back to faces (wall faces are dropped)
    VelocityField out(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double q = nuCell(i, j) * dxx(i, j) / dx;
            if (i + 1 >= 1 && i + 1 <= nx - 1) out.u(i + 1, j) += q;
            if (i >= 1 && i <= nx - 1) out.u(i, j) -= q;
            const double r = nuCell(i, j) * dyy(i, j) / dy;
            if (j + 1 >= 1 && j + 1 <= ny - 1) out.v(i, j + 1) += r;
            if (j >= 1 && j <= ny - 1) out.v(i, j) -= r;
        }
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double q = nuNode[j * (nx + 1) + i] * dxy[j * (nx + 1) + i] *
                             wNode[j * (nx + 1) + i] / dV;
            // dudy part: +1/dy at u(i,j), -1/dy at u(i,j-1); ghost rows fold
            // back with the tangential sign
            if (i >= 1 && i <= nx - 1) {
                if (j <= ny - 1) out.u(i, j) += q / dy;
                if (j - 1 >= 0) out.u(i, j - 1) -= q / dy;
                if (j == 0) out.u(i, 0) -= sig * q / dy;
                if (j == ny) out.u(i, ny - 1) += sig * q / dy;
            }
            // dvdx part: +1/dx at v(i,j), -1/dx at v(i-1,j)
            if (j >= 1 && j <= ny - 1) {
                if (i <= nx - 1) out.v(i, j) += q / dx;
                if (i - 1 >= 0) out.v(i - 1, j) -= q / dx;
                if (i == 0) out.v(0, j) -= sig * q / dx;
                if (i == nx) out.v(nx - 1, j) += sig * q / dx;
            }
        }
    out.zeroNormalBoundary();
    return out;
}

VelocityField FluidSolver::advect(const VelocityField& vAdv, const VelocityField& w,
                                  const VelocityField& coef) const {
    const Grid& g = grid_;
    const int nx = g.nx, ny = g.ny;
    const double i2dx = 1.0 / (2 * g.dx()), i2dy = 1.0 / (2 * g.dy());
    const double sig = (bc_ == ViscousBc::NoSlip) ? -1.0 : 1.0;
    VelocityField out(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const double vx = vAdv.u(i, j);
            const double vy = 0.25 * (vAdv.v(i - 1, j) + vAdv.v(i, j) + vAdv.v(i - 1, j + 1) +
                                      vAdv.v(i, j + 1));
            const double wxr = w.u(i + 1, j), wxl = w.u(i - 1, j);
            const double wyt = (j < ny - 1) ? w.u(i, j + 1) : sig * w.u(i, j);
            const double wyb = (j > 0) ? w.u(i, j - 1) : sig * w.u(i, j);
            out.u(i, j) = coef.u(i, j) * (vx * (wxr - wxl) * i2dx + vy * (wyt - wyb) * i2dy);
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double vy = vAdv.v(i, j);
            const double vx = 0.25 * (vAdv.u(i, j - 1) + vAdv.u(i + 1, j - 1) + vAdv.u(i, j) +
                                      vAdv.u(i + 1, j));
            const double wyt = w.v(i, j + 1), wyb = w.v(i, j - 1);
            const double wxr = (i < nx - 1) ? w.v(i + 1, j) : sig * w.v(i, j);
            const double wxl = (i > 0) ? w.v(i - 1, j) : sig * w.v(i, j);
            out.v(i, j) = coef.v(i, j) * (vx * (wxr - wxl) * i2dx + vy * (wyt - wyb) * i2dy);
        }
    return out;
}

VelocityField FluidSolver::advectTranspose(const VelocityField& vAdv, const VelocityField& z,
                                           const VelocityField& coef) const {
    const Grid& g = grid_;
    const int nx = g.nx, ny = g.ny;
    const double i2dx = 1.0 / (2 * g.dx()), i2dy = 1.0 / (2 * g.dy());
    const double sig = (bc_ == ViscousBc::NoSlip) ? -1.0 : 1.0;
    VelocityField out(g);
    // exact transpose of the gather loops above
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const double vx = vAdv.u(i, j);
            const double vy = 0.25 * (vAdv.v(i - 1, j) + vAdv.v(i, j) + vAdv.v(i - 1, j + 1) +
                                      vAdv.v(i, j + 1));
            const double q = coef.u(i, j) * z.u(i, j);
            if (i + 1 <= nx - 1) out.u(i + 1, j) += vx * q * i2dx;
            if (i - 1 >= 1) out.u(i - 1, j) -= vx * q * i2dx;
            if (j < ny - 1)
                out.u(i, j + 1) += vy * q * i2dy;
            else
                out.u(i, j) += sig * vy * q * i2dy;
            if (j > 0)
                out.u(i, j - 1) -= vy * q * i2dy;
            else
                out.u(i, j) -= sig * vy * q * i2dy;
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double vy = vAdv.v(i, j);
            const double vx = 0.25 * (vAdv.u(i, j - 1) + vAdv.u(i + 1, j - 1) + vAdv.u(i, j) +
                                      vAdv.u(i + 1, j));
            const double q = coef.v(i, j) * z.v(i, j);
            if (j + 1 <= ny - 1) out.v(i, j + 1) += vy * q * i2dy;
            if (j - 1 >= 1) out.v(i, j - 1) -= vy * q * i2dy;
            if (i < nx - 1)
                out.v(i + 1, j) += vx * q * i2dx;
            else
                out.v(i, j) += sig * vx * q * i2dx;
            if (i > 0)
                out.v(i - 1, j) -= vx * q * i2dx;
            else
                out.v(i, j) -= sig * vx * q * i2dx;
        }
    return out;
}

namespace {

// Right-preconditioned restarted GMRES on the stream-space system. The
// momentum operator is SPD plus a skew advective part, which this handles
// robustly at one operator apply per iteration.
int gmres(const std::function<std::vector<double>(const std::vector<double>&)>& op,
          const std::function<std::vector<double>(const std::vector<double>&)>& precond,
          const std::vector<double>& b, std::vector<double>& x, double relTol, int maxIter,
          double& relResOut) {
    const int n = static_cast<int>(b.size());
    const int restart = 60;
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += a[k] * c[k];
        return s;
    };
    auto norm = [&](const std::vector<double>& a) { return std::sqrt(std::max(dot(a, a), 0.0)); };
    if (x.empty()) x.assign(n, 0.0);
    const double bnorm = std::max(norm(b), 1e-300);
    int totalIt = 0;
    double res = 0.0;
    for (int cycle = 0; totalIt < maxIter; ++cycle) {
        std::vector<double> r = op(x);
        for (int k = 0; k < n; ++k) r[k] = b[k] - r[k];
        res = norm(r);
        relResOut = res / bnorm;
        if (relResOut <= relTol) return totalIt;
        const int m = std::min(restart, maxIter - totalIt);
        std::vector<std::vector<double>> V(m + 1), Z(m);
        std::vector<double> H(static_cast<size_t>(m + 1) * m, 0.0);
        std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
        V[0] = r;
        for (double& v : V[0]) v /= res;
        g[0] = res;
        int j = 0;
        for (; j < m; ++j) {
            Z[j] = precond(V[j]);
            std::vector<double> w = op(Z[j]);
            for (int i = 0; i <= j; ++i) {
                const double hij = dot(w, V[i]);
                H[static_cast<size_t>(i) * m + j] = hij;
                for (int k = 0; k < n; ++k) w[k] -= hij * V[i][k];
            }
            const double hj1 = norm(w);
            H[static_cast<size_t>(j + 1) * m + j] = hj1;
            // Givens rotations
            for (int i = 0; i < j; ++i) {
                const double t0 = H[static_cast<size_t>(i) * m + j];
                const double t1 = H[static_cast<size_t>(i + 1) * m + j];
                H[static_cast<size_t>(i) * m + j] = cs[i] * t0 + sn[i] * t1;
                H[static_cast<size_t>(i + 1) * m + j] = -sn[i] * t0 + cs[i] * t1;
            }
            const double t0 = H[static_cast<size_t>(j) * m + j];
            const double denom = std::hypot(t0, hj1);
            if (denom == 0.0) { ++j; break; }
            cs[j] = t0 / denom;
            sn[j] = hj1 / denom;
            H[static_cast<size_t>(j) * m + j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            ++totalIt;
            res = std::fabs(g[j + 1]);
            relResOut = res / bnorm;
            if (hj1 == 0.0 || relResOut <= relTol) { ++j; break; }
            V[j + 1] = w;
            for (double& v : V[j + 1]) v /= hj1;
        }
        // back substitution over the j-dimensional least squares system
        std::vector<double> y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double t = g[i];
            for (int k2 = i + 1; k2 < j; ++k2) t -= H[static_cast<size_t>(i) * m + k2] * y[k2];
            y[i] = t / H[static_cast<size_t>(i) * m + i];
        }
        for (int i = 0; i < j; ++i)
            for (int k = 0; k < n; ++k) x[k] += y[i] * Z[i][k];
        if (relResOut <= relTol) return totalIt;
        if (j == 0) break;
    }
    return totalIt;
}

} // namespace

FilterResult FluidSolver::filterStationary(const VelocityField& v) const {
    const double c = 1.0 / par_.k;
    VelocityField rhs = cutoff(v, par_.k);
    projector_->project(rhs);
    const std::vector<double> b = stream_->applyRT(rhs);

    auto op = [&](const std::vector<double>& psi) {
        VelocityField w = stream_->applyR(psi);
        VelocityField lw = applyNegLaplacian(w);
        projector_->project(lw);
        VelocityField llw = applyNegLaplacian(lw);
        VelocityField acc = w;
        axpyFaces(acc, c, llw);
        return stream_->applyRT(acc);
    };
    const double dV = grid_.cellVolume();
    auto pre = [&](const std::vector<double>& r) {
        return stream_->diagSolve(r, 0.0, dV, 0.0, dV * c);
    };

    FilterResult res;
    std::vector<double> psi;
    res.iterations = gmres(op, pre, b, psi, relTol_, maxIter_, res.solveResidual);
    res.u = stream_->applyR(psi);
    res.stationaryResidual = stationaryResidual(res.u, v);
    return res;
}

double FluidSolver::stationaryResidual(const VelocityField& u, const VelocityField& v) const {
    VelocityField rhs = cutoff(v, par_.k);
    projector_->project(rhs);
    VelocityField lu = applyNegLaplacian(u);
    projector_->project(lu);
    VelocityField llu = applyNegLaplacian(lu);
    projector_->project(llu);
    VelocityField r = u;
    axpyFaces(r, 1.0 / par_.k, llu);
    axpyFaces(r, -1.0, rhs);
    const double denom = std::max(rhs.l2Norm(), 1e-300);
    return r.l2Norm() / denom;
}

FilterResult FluidSolver::filterStep(const VelocityField& uPrev, const VelocityField& v,
                                     double h) const {
    if (h <= 0.0) throw std::invalid_argument("filterStep: h must be positive");
    const double c = (1.0 / par_.k) * (1.0 + 1.0 / h);
    VelocityField rhs = cutoff(v, par_.k);
    projector_->project(rhs);
    {
        VelocityField lu = applyNegLaplacian(uPrev);
        projector_->project(lu);
        VelocityField llu = applyNegLaplacian(lu);
        axpyFaces(rhs, 1.0 / (par_.k * h), llu);
    }
    const std::vector<double> b = stream_->applyRT(rhs);

    auto op = [&](const std::vector<double>& psi) {
        VelocityField w = stream_->applyR(psi);
        VelocityField lw = applyNegLaplacian(w);
        projector_->project(lw);
        VelocityField llw = applyNegLaplacian(lw);
        VelocityField acc = w;
        axpyFaces(acc, c, llw);
        return stream_->applyRT(acc);
    };
    const double dV = grid_.cellVolume();
    auto pre = [&](const std::vector<double>& r) {
        return stream_->diagSolve(r, 0.0, dV, 0.0, dV * c);
    };

    FilterResult res;
    std::vector<double> psi = stream_->streamOf(uPrev); // warm start from the previous state
    res.iterations = gmres(op, pre, b, psi, relTol_, maxIter_, res.solveResidual);
    if (res.solveResidual > 1e3 * relTol_)
        throw PoissonError("filterStep: linear solve did not converge", res.solveResidual);
    res.u = stream_->applyR(psi);
    res.stationaryResidual = stationaryResidual(res.u, v);
    return res;
}

NsStepResult FluidSolver::nsStep(const FluidState& state, const PhaseIndicator& chiPrev,
                                 const PhaseIndicator& chiNew, const MeanZeroField& uKin,
                                 const ScalarField& wCurv, double h) const {
    const Grid& g = grid_;
    requireSameGrid(g, state.v.grid(), "nsStep");
    if (h <= 0.0) throw std::invalid_argument("nsStep: h must be positive");

    // CFL: substep when the explicit transport would cross more than a cell
    const double vmax = state.v.maxAbs();
    int nSub = 1;
    if (vmax > 0.0)
        nSub = std::max(1, static_cast<int>(std::ceil(vmax * h / std::min(g.dx(), g.dy()))));
    const double hs = h / nSub;

    ScalarField nuCell(g);
    for (int k = 0; k < nuCell.size(); ++k) nuCell.at(k) = chiPrev.at(k) ? par_.nu1 : par_.nu2;

    // diffusive-flux transport field J/(rho1-rho2) with sign: the momentum form
    // carries (v x (rho1-rho2) grad u) : grad xi
    VelocityField gJ = gradientToFaces(uKin);
    for (double& x : gJ.uData()) x *= (par_.rho1 - par_.rho2);
    for (double& x : gJ.vData()) x *= (par_.rho1 - par_.rho2);

    VelocityField chiF;
    faceAverage(chiPrev, chiF);
    VelocityField gradW = gradientToFaces(wCurv);
    VelocityField force(g); // -chi grad w on faces
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) force.u(i, j) = -chiF.u(i, j) * gradW.u(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) force.v(i, j) = -chiF.v(i, j) * gradW.v(i, j);

    VelocityField ones(g);
    for (double& x : ones.uData()) x = 1.0;
    for (double& x : ones.vData()) x = 1.0;

    const ScalarField rhoStart = state.rho;
    const ScalarField rhoEnd = densityOf(chiNew, par_);

    NsStepResult out;
    out.substeps = nSub;
    FluidState cur = state;
    const double dV = g.cellVolume();

    for (int sub = 0; sub < nSub; ++sub) {
        const double th0 = static_cast<double>(sub) / nSub;
        const double th1 = static_cast<double>(sub + 1) / nSub;
        ScalarField rho0(g), rho1(g);
        for (int k = 0; k < rho0.size(); ++k) {
            rho0.at(k) = (1 - th0) * rhoStart.at(k) + th0 * rhoEnd.at(k);
            rho1.at(k) = (1 - th1) * rhoStart.at(k) + th1 * rhoEnd.at(k);
        }
        VelocityField rho0F, rhoMidF;
        faceDensity(rho0, rho0F);
        {
            ScalarField rhoMid(g);
            for (int k = 0; k < rhoMid.size(); ++k) rhoMid.at(k) = 0.5 * (rho0.at(k) + rho1.at(k));
            faceDensity(rhoMid, rhoMidF);
        }
        const VelocityField vOld = cur.v;

        auto applyOp = [&](const VelocityField& w, double* visc) {
            VelocityField acc = w;
            mulFaces(acc, rhoMidF);
            for (double& x : acc.uData()) x /= hs;
            for (double& x : acc.vData()) x /= hs;
            // skew advection by the lagged velocity, density-weighted
            VelocityField a1 = advect(vOld, w, rho0F);
            VelocityField a2 = advectTranspose(vOld, w, rho0F);
            axpyFaces(acc, 0.5, a1);
            axpyFaces(acc, -0.5, a2);
            // skew transport by the diffusive flux direction (unit coefficient)
            VelocityField j1 = advect(gJ, w, ones);
            VelocityField j2 = advectTranspose(gJ, w, ones);
            axpyFaces(acc, -0.5, j1);
            axpyFaces(acc, 0.5, j2);
            VelocityField vis = applyViscous(w, nuCell, visc);
            axpyFaces(acc, 1.0, vis);
            if (par_.beta > 0.0) {
                VelocityField lw = applyNegLaplacian(w);
                projector_->project(lw);
                VelocityField llw = applyNegLaplacian(lw);
                axpyFaces(acc, par_.beta, llw);
            }
            return acc;
        };

        VelocityField rhsV = vOld;
        mulFaces(rhsV, rho0F);
        for (double& x : rhsV.uData()) x /= hs;
        for (double& x : rhsV.vData()) x /= hs;
        axpyFaces(rhsV, 1.0, force);
        const std::vector<double> b = stream_->applyRT(rhsV);

        auto op = [&](const std::vector<double>& psi) {
            const VelocityField w = stream_->applyR(psi);
            VelocityField acc = applyOp(w, nullptr);
            return stream_->applyRT(acc);
        };
        const double rhoMean = 0.5 * (par_.rhoMin() + par_.rhoMax());
        const double nuMean = 0.5 * (par_.nu1 + par_.nu2);
        auto pre = [&](const std::vector<double>& r) {
            return stream_->diagSolve(r, 0.0, dV * rhoMean / hs, dV * nuMean, dV * par_.beta);
        };

        std::vector<double> psi = stream_->streamOf(vOld);
        double relRes = 0.0;
        const int iters = gmres(op, pre, b, psi, relTol_, maxIter_, relRes);
        out.iterations += iters;
        out.solveResidual = std::max(out.solveResidual, relRes);
        if (relRes > 1e3 * relTol_)
            throw PoissonError("nsStep: momentum solve did not converge", relRes);

        VelocityField vNew = stream_->applyR(psi);

        // per-substep energy bookkeeping (time-integrated by hs)
        double visc = 0.0;
        (void)applyViscous(vNew, nuCell, &visc);
        double betaDis = 0.0;
        if (par_.beta > 0.0) {
            VelocityField a = applyNegLaplacian(vNew);
            projector_->project(a);
            betaDis = par_.beta * faceInner(a, a);
        }
        const double keNew = kineticEnergy(rho1, vNew);
        const double keOld = kineticEnergy(rho0, vOld);
        VelocityField dv = vNew;
        axpyFaces(dv, -1.0, vOld);
        mulFaces(dv, rho0F);
        VelocityField dv2 = vNew;
        axpyFaces(dv2, -1.0, vOld);
        const double numD = 0.5 * faceInner(dv, dv2) / hs; // (1/2hs) rho0 |v+ - v|^2
        double wk = 0.0;
        {
            VelocityField tmp = vNew;
            mulFaces(tmp, chiF);
            wk = faceInner(tmp, gradW); // int chi v+ . grad w
        }
        out.viscousDissipation += hs * visc;
        out.betaDissipation += hs * betaDis;
        out.numericalDissipation += numD * hs;
        out.work += hs * wk;
        // closure of the discrete energy identity; at the solver residual scale
        const double slack = keNew - keOld + numD * hs + hs * (visc + betaDis) + hs * wk;
        out.energySlack += std::fabs(slack);

        cur.v = vNew;
        cur.rho = rho1;
        cur.time += hs;
    }
    out.state = cur;
    return out;
}

} // namespace capflow
