// potentials.hpp
// Kinetic and curvature potentials of the minimizing-movement step, the
// De Giorgi sub-time interpolants, and the value-function derivative identity.
//
// The kinetic potential u solves -Lap(u) = -(chi_new - advected_prev)/h with
// Neumann data and zero mean; the curvature potential's mean-zero part w0 has
// the same form with the sub-time weight, and the additive constant lambda is
// fitted by least squares so that the interface first variation matches
// int chi div((w0 + lambda) B) over the non-mass-preserving probes.

#ifndef CAPFLOW_POTENTIALS_HPP
#define CAPFLOW_POTENTIALS_HPP

#include "capflow/flow_map.hpp"
#include "capflow/min_step.hpp"
#include "capflow/probes.hpp"

namespace capflow {

struct MassDriftError : std::runtime_error {
    double drift;
    MassDriftError(const std::string& m, double d) : std::runtime_error(m), drift(d) {}
};

// u = -(-Lap_N)^{-1} [(chi_new - advected_prev)/h]; throws MassDriftError if
// the difference has a mean above tol (signals mass drift upstream)
MeanZeroField kineticPotential(const PhaseIndicator& chiNew, const ScalarField& advectedPrev,
                               double h, const NeumannPoisson& poisson, double massTol = 1e-6);

struct Potentials {
    MeanZeroField u;          // kinetic potential
    MeanZeroField w0;         // curvature potential, mean-zero part
    double lambda = 0.0;      // mass-constraint multiplier
    bool lambdaDegenerate = false;
    double gradW0Sq = 0.0;    // int |grad w0|^2
    double wH1 = 0.0;         // ||w0 + lambda||_{H^1}-type size, for the multiplier bound

    ScalarField w() const {   // w0 + lambda
        ScalarField out = w0;
        for (double& v : out.data()) v += lambda;
        return out;
    }
};

// the varifold side of the fit carries the c0 weight of the capillary energy
Potentials curvaturePotential(const PhaseIndicator& chiT, const ScalarField& advectedPrev,
                              double Th, const NeumannPoisson& poisson, const TvScheme& tv,
                              const CapillaryParams& params, const std::vector<ProbeField>& probes);

struct DeGiorgiSample {
    double Th = 0.0;              // sub-time weight T_h(t) in (0, h]
    PhaseIndicator chi;           // binary interpolant
    std::vector<double> relaxed;  // relaxed minimizer at this sub-time
    ScalarField target;           // chi_prev o X_{-Th}
    double fRelaxed = 0.0;        // relaxed objective value f_t
    double fBinary = 0.0;
    double energyBinary = 0.0;
    double fidelityBinary = 0.0;
    double gap = 0.0;
    int iterations = 0;
    double hm1DiffSq = 0.0;       // ||chi_t - target||^2_{H^-1} (binary)
    double gradW0Sq = 0.0;        // ||grad w0||^2 = hm1DiffSq / Th^2
    double threshold = 0.0;       // threshold level of the accepted candidate
};

class DeGiorgiInterpolator {
public:
    DeGiorgiInterpolator(const MinStepSolver& solver, const CapillaryParams& params, double m0)
        : solver_(solver), params_(params), m0_(m0) {}

    // minimize with target chi_prev o X_{-Th} and weight Th; extraProbes are
    // appended after chi_prev and the thresholded target
    DeGiorgiSample sample(const PhaseIndicator& chiPrev, const VelocityField& uk, double Th,
                          const RelaxedSolverConfig& cfg,
                          const std::vector<PhaseIndicator>& extraProbes = {},
                          WarmStart* warm = nullptr) const;

    // d/dt of the relaxed value function at Th: exact first term plus the
    // flow-map composition form of the transport term
    struct DerivativeSides {
        double fdSlope = 0.0;     // centered finite difference of f_t
        double rhs = 0.0;         // -(1/2t^2)||.||^2 - (1/t)(chi u, grad((-Lap)^{-1}(.) o X_t))
        double firstTerm = 0.0;
        double workTerm = 0.0;
    };
    DerivativeSides derivativeCheck(const PhaseIndicator& chiPrev, const VelocityField& uk,
                                    double Th, const RelaxedSolverConfig& cfg,
                                    double fdStepRel = 5e-3) const;

    // advective-work integrand (chi u, grad(w o X_t)) of the sample, the
    // integrand of the F_h bookkeeping, assembled in the pre-by-parts form
    double workIntegrand(const PhaseIndicator& chiPrev, const VelocityField& uk,
                         const DeGiorgiSample& s) const;

    const MinStepSolver& solver() const { return solver_; }
    const CapillaryParams& params() const { return params_; }
    double m0() const { return m0_; }

private:
    const MinStepSolver& solver_;
    CapillaryParams params_;
    double m0_;

    MinStepProblem problemAt(const PhaseIndicator& chiPrev, const VelocityField& uk,
                             double Th) const;
};

} // namespace capflow

#endif
