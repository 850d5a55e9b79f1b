#include "capflow/velocity_field.hpp"

#include <algorithm>
#include <cmath>

namespace capflow {

void VelocityField::zeroNormalBoundary() {
    const int nx = grid_.nx, ny = grid_.ny;
    for (int j = 0; j < ny; ++j) { u(0, j) = 0.0; u(nx, j) = 0.0; }
    for (int i = 0; i < nx; ++i) { v(i, 0) = 0.0; v(i, ny) = 0.0; }
}

double VelocityField::maxNormalBoundary() const {
    const int nx = grid_.nx, ny = grid_.ny;
    double m = 0.0;
    for (int j = 0; j < ny; ++j) m = std::max({m, std::fabs(u(0, j)), std::fabs(u(nx, j))});
    for (int i = 0; i < nx; ++i) m = std::max({m, std::fabs(v(i, 0)), std::fabs(v(i, ny))});
    return m;
}

namespace {
// clamped bilinear interpolation on a lattice with origin (ox,oy) and spacing (hx,hy)
double bilinear(const std::vector<double>& a, int ncols, int nrows, double ox, double oy,
                double hx, double hy, double x, double y) {
    double s = (x - ox) / hx;
    double t = (y - oy) / hy;
    s = std::clamp(s, 0.0, static_cast<double>(ncols - 1));
    t = std::clamp(t, 0.0, static_cast<double>(nrows - 1));
    int i0 = std::min(static_cast<int>(s), ncols - 2);
    int j0 = std::min(static_cast<int>(t), nrows - 2);
    i0 = std::max(i0, 0);
    j0 = std::max(j0, 0);
    const double fs = s - i0, ft = t - j0;
    const double a00 = a[j0 * ncols + i0], a10 = a[j0 * ncols + i0 + 1];
    const double a01 = a[(j0 + 1) * ncols + i0], a11 = a[(j0 + 1) * ncols + i0 + 1];
    return (1 - fs) * (1 - ft) * a00 + fs * (1 - ft) * a10 + (1 - fs) * ft * a01 + fs * ft * a11;
}
} // namespace

double VelocityField::sampleU(double x, double y) const {
    return bilinear(u_, grid_.nx + 1, grid_.ny, 0.0, 0.5 * grid_.dy(), grid_.dx(), grid_.dy(), x, y);
}

double VelocityField::sampleV(double x, double y) const {
    return bilinear(v_, grid_.nx, grid_.ny + 1, 0.5 * grid_.dx(), 0.0, grid_.dx(), grid_.dy(), x, y);
}

double VelocityField::maxAbs() const {
    double m = 0.0;
    for (double x : u_) m = std::max(m, std::fabs(x));
    for (double x : v_) m = std::max(m, std::fabs(x));
    return m;
}

double VelocityField::l2NormSq() const {
    const int nx = grid_.nx, ny = grid_.ny;
    double s = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) s += u(i, j) * u(i, j);
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) s += v(i, j) * v(i, j);
    return s * grid_.cellVolume();
}

double VelocityField::l2Norm() const { return std::sqrt(l2NormSq()); }

double VelocityField::maxGradAbs() const {
    const int nx = grid_.nx, ny = grid_.ny;
    const double dx = grid_.dx(), dy = grid_.dy();
    double m = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) m = std::max(m, std::fabs(u(i + 1, j) - u(i, j)) / dx);
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i <= nx; ++i) m = std::max(m, std::fabs(u(i, j) - u(i, j - 1)) / dy);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) m = std::max(m, std::fabs(v(i, j) - v(i - 1, j)) / dx);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) m = std::max(m, std::fabs(v(i, j + 1) - v(i, j)) / dy);
    return m;
}

bool VelocityField::allFinite() const {
    for (double x : u_)
        if (!std::isfinite(x)) return false;
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

VelocityField& VelocityField::operator+=(const VelocityField& o) {
    requireSameGrid(grid_, o.grid(), "VelocityField::operator+=");
    for (size_t k = 0; k < u_.size(); ++k) u_[k] += o.u_[k];
    for (size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& o) {
    requireSameGrid(grid_, o.grid(), "VelocityField::operator-=");
    for (size_t k = 0; k < u_.size(); ++k) u_[k] -= o.u_[k];
    for (size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
}

VelocityField& VelocityField::operator*=(double a) {
    for (double& x : u_) x *= a;
    for (double& x : v_) x *= a;
    return *this;
}

ScalarField divergence(const VelocityField& G) {
    const Grid& g = G.grid();
    ScalarField d(g);
    const double dx = g.dx(), dy = g.dy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            d(i, j) = (G.u(i + 1, j) - G.u(i, j)) / dx + (G.v(i, j + 1) - G.v(i, j)) / dy;
    return d;
}

double maxDivergence(const VelocityField& G) {
    ScalarField d = divergence(G);
    return d.maxAbs();
}

VelocityField gradientToFaces(const ScalarField& f) {
    const Grid& g = f.grid();
    VelocityField G(g);
    const double dx = g.dx(), dy = g.dy();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) G.u(i, j) = (f(i, j) - f(i - 1, j)) / dx;
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) G.v(i, j) = (f(i, j) - f(i, j - 1)) / dy;
    return G;
}

double faceInner(const VelocityField& a, const VelocityField& b) {
    requireSameGrid(a.grid(), b.grid(), "faceInner");
    const Grid& g = a.grid();
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) s += a.u(i, j) * b.u(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) s += a.v(i, j) * b.v(i, j);
    return s * g.cellVolume();
}

double adjointPairCheck(const ScalarField& f, const VelocityField& G) {
    requireSameGrid(f.grid(), G.grid(), "adjointPairCheck");
    const VelocityField gf = gradientToFaces(f);
    const ScalarField dv = divergence(G);
    double fdotdiv = 0.0;
    for (int k = 0; k < f.size(); ++k) fdotdiv += f.at(k) * dv.at(k);
    fdotdiv *= f.grid().cellVolume();
    return std::fabs(faceInner(gf, G) + fdotdiv);
}

void cellAverage(const VelocityField& w, ScalarField& uc, ScalarField& vc) {
    const Grid& g = w.grid();
    uc = ScalarField(g);
    vc = ScalarField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            uc(i, j) = 0.5 * (w.u(i, j) + w.u(i + 1, j));
            vc(i, j) = 0.5 * (w.v(i, j) + w.v(i, j + 1));
        }
}

} // namespace capflow
