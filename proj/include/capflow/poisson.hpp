// poisson.hpp
// Homogeneous-Neumann Poisson solver on the rectangle and the induced
// H^{-1}_(0) inner product on mean-zero fields.
//
// Backends:
//   Spectral          cosine-basis transform; modes are divided by the
//                     continuous eigenvalues (k pi / L)^2, so Neumann cosine
//                     modes are resolved to machine accuracy.
//   FiniteDifference  5-point mirror stencil inverted by conjugate gradients;
//                     second-order accurate, used as fallback and for
//                     convergence studies.

#ifndef CAPFLOW_POISSON_HPP
#define CAPFLOW_POISSON_HPP

#include <memory>
#include <stdexcept>
#include <string>

#include "capflow/scalar_field.hpp"

namespace capflow {

enum class PoissonBackend { Spectral, FiniteDifference };

struct PoissonError : std::runtime_error {
    double residual;
    PoissonError(const std::string& msg, double res) : std::runtime_error(msg), residual(res) {}
};

class NeumannPoisson {
public:
    explicit NeumannPoisson(const Grid& g, PoissonBackend backend = PoissonBackend::Spectral,
                            double relTol = 1e-10, int maxIter = 0);
    ~NeumannPoisson();

    NeumannPoisson(const NeumannPoisson&) = delete;
    NeumannPoisson& operator=(const NeumannPoisson&) = delete;

    const Grid& grid() const { return grid_; }
    PoissonBackend backend() const { return backend_; }

    // phi with -Lap(phi) = f, Neumann flux zero, zero mean
    MeanZeroField solve(const MeanZeroField& f) const;

    // the backend's discrete -Lap_N applied to a cell field
    ScalarField applyNegLaplacian(const ScalarField& phi) const;

    // (f,g)_{H^{-1}_(0)} = <f, (-Lap_N)^{-1} g> dV
    double hm1Inner(const MeanZeroField& f, const MeanZeroField& g) const;
    double hm1NormSq(const MeanZeroField& f) const;

    // int |grad phi|^2 evaluated through the backend operator: <(-Lap_N)phi, phi>
    double dirichletEnergy(const ScalarField& phi) const;

    double lastResidual() const { return lastResidual_; }
    int lastIterations() const { return lastIterations_; }

private:
    Grid grid_;
    PoissonBackend backend_;
    double relTol_;
    int maxIter_;
    mutable double lastResidual_ = 0.0;
    mutable int lastIterations_ = 0;

    struct SpectralPlan;
    std::unique_ptr<SpectralPlan> plan_;

    MeanZeroField solveSpectral(const MeanZeroField& f) const;
    MeanZeroField solveCG(const MeanZeroField& f) const;
    ScalarField applyFD(const ScalarField& phi) const;
    ScalarField applySpectral(const ScalarField& phi) const;
};

} // namespace capflow

#endif
