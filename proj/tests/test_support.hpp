// test_support.hpp
// Shared helpers for the test suites: deterministic random fields, the
// Taylor-Green velocity, and a dense LU oracle for the Neumann Poisson
// operator (oracle cases: hm1-random-32, poisson-dense-32).

#ifndef CAPFLOW_TEST_SUPPORT_HPP
#define CAPFLOW_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "capflow/poisson.hpp"
#include "capflow/projection.hpp"
#include "capflow/scalar_field.hpp"
#include "capflow/velocity_field.hpp"

namespace capflow::test {

// splitmix64: tiny deterministic generator, independent of libstdc++ internals
class Rng {
public:
    explicit Rng(uint64_t seed) : s_(seed) {}
    uint64_t next() {
        uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; } // [0,1)
    double symmetric() { return 2.0 * uniform() - 1.0; }    // (-1,1)
    int index(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }

private:
    uint64_t s_;
};

inline ScalarField randomField(const Grid& g, uint64_t seed) {
    Rng rng(seed);
    ScalarField f(g);
    for (int k = 0; k < f.size(); ++k) f.at(k) = rng.symmetric();
    return f;
}

inline MeanZeroField randomMeanZero(const Grid& g, uint64_t seed) {
    return projectMeanZero(randomField(g, seed));
}

// Taylor-Green velocity adapted to the box, from the stream function
// sin(pi x/Lx) sin(pi y/Ly): tangent on any rectangle, and on the unit square
// equal to (pi sin(pi x)cos(pi y), -pi cos(pi x)sin(pi y)) scaled by amp
inline VelocityField taylorGreen(const Grid& g, double amp = 1.0) {
    VelocityField w(g);
    const double kx = M_PI / g.Lx, ky = M_PI / g.Ly;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            w.u(i, j) = amp * ky * std::sin(kx * i * g.dx()) * std::cos(ky * g.yc(j));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            w.v(i, j) = -amp * kx * std::cos(kx * g.xc(i)) * std::sin(ky * j * g.dy());
    return w;
}

inline VelocityField randomDivFree(const Grid& g, uint64_t seed) {
    Rng rng(seed);
    VelocityField w(g);
    for (double& x : w.uData()) x = rng.symmetric();
    for (double& x : w.vData()) x = rng.symmetric();
    MacProjector proj(g);
    proj.project(w);
    return w;
}

// Dense LU factorization of the backend's -Lap_N operator with the constant
// null space pinned by appending the mean-zero constraint. Independent solve
// route for the fast backends (O(n^3), keep n small).
class DensePoissonOracle {
public:
    DensePoissonOracle(const NeumannPoisson& p) : p_(p), n_(p.grid().cellCount()) {
        // assemble A by applying the operator to unit vectors; replace the last
        // row by the mean constraint so the system is nonsingular on mean-zero data
        a_.assign(static_cast<size_t>(n_) * n_, 0.0);
        for (int c = 0; c < n_; ++c) {
            ScalarField e(p.grid());
            e.at(c) = 1.0;
            const ScalarField col = p.applyNegLaplacian(e);
            for (int r = 0; r < n_; ++r) a_[static_cast<size_t>(r) * n_ + c] = col.at(r);
        }
        for (int c = 0; c < n_; ++c) a_[static_cast<size_t>(n_ - 1) * n_ + c] = 1.0;
        factorize();
    }

    MeanZeroField solve(const MeanZeroField& f) const {
        std::vector<double> b(f.data());
        b[n_ - 1] = 0.0; // mean constraint row
        std::vector<double> x = luSolve(b);
        ScalarField phi(p_.grid());
        for (int k = 0; k < n_; ++k) phi.at(k) = x[k];
        return projectMeanZero(phi);
    }

    double hm1Inner(const MeanZeroField& f, const MeanZeroField& g) const {
        const MeanZeroField phi = solve(g);
        double s = 0.0;
        for (int k = 0; k < n_; ++k) s += f.at(k) * phi.at(k);
        return s * p_.grid().cellVolume();
    }

private:
    const NeumannPoisson& p_;
    int n_;
    std::vector<double> a_;
    std::vector<int> piv_;

    void factorize() {
        piv_.resize(n_);
        for (int k = 0; k < n_; ++k) {
            int pr = k;
            double best = std::fabs(a_[static_cast<size_t>(k) * n_ + k]);
            for (int r = k + 1; r < n_; ++r) {
                const double v = std::fabs(a_[static_cast<size_t>(r) * n_ + k]);
                if (v > best) { best = v; pr = r; }
            }
            if (best == 0.0) throw std::runtime_error("DensePoissonOracle: singular matrix");
            piv_[k] = pr;
            if (pr != k)
                for (int c = 0; c < n_; ++c)
                    std::swap(a_[static_cast<size_t>(k) * n_ + c], a_[static_cast<size_t>(pr) * n_ + c]);
            const double d = a_[static_cast<size_t>(k) * n_ + k];
            for (int r = k + 1; r < n_; ++r) {
                const double m = a_[static_cast<size_t>(r) * n_ + k] / d;
                a_[static_cast<size_t>(r) * n_ + k] = m;
                if (m != 0.0)
                    for (int c = k + 1; c < n_; ++c)
                        a_[static_cast<size_t>(r) * n_ + c] -= m * a_[static_cast<size_t>(k) * n_ + c];
            }
        }
    }

    std::vector<double> luSolve(std::vector<double> b) const {
        for (int k = 0; k < n_; ++k) {
            std::swap(b[k], b[piv_[k]]);
            for (int r = k + 1; r < n_; ++r) b[r] -= a_[static_cast<size_t>(r) * n_ + k] * b[k];
        }
        for (int r = n_ - 1; r >= 0; --r) {
            for (int c = r + 1; c < n_; ++c) b[r] -= a_[static_cast<size_t>(r) * n_ + c] * b[c];
            b[r] /= a_[static_cast<size_t>(r) * n_ + r];
        }
        return b;
    }
};

} // namespace capflow::test

#endif
