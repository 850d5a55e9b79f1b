// flow_map.hpp
// Flow maps of divergence-free boundary-tangent velocities and pullback
// composition chi o X_{-s} by semi-Lagrangian bilinear interpolation.

#ifndef CAPFLOW_FLOW_MAP_HPP
#define CAPFLOW_FLOW_MAP_HPP

#include <vector>

#include "capflow/phase.hpp"
#include "capflow/poisson.hpp"
#include "capflow/velocity_field.hpp"

namespace capflow {

struct FlowMapSample {
    Grid grid;
    double duration = 0.0;          // foot points approximate X_{-duration}(cell center)
    int substeps = 0;               // RK4 substeps actually used
    double maxClampDistance = 0.0;  // max distance feet were pulled back into the domain
    std::vector<double> footX, footY;
};

// Backward characteristics: integrates dy/dt = -v(y) over |duration| with RK4;
// substep size capped so that substep * ||v||_inf <= spacing/2. Negative
// durations integrate forward (X_{+|s|}). Throws on non-finite velocities.
FlowMapSample integrateFlow(const VelocityField& v, double duration, int minSubsteps = 1);

// f evaluated at the foot points with clamped bilinear interpolation
ScalarField composeWithMap(const ScalarField& f, const FlowMapSample& map);

// chi o X_{-s}; values lie in [0,1], exact for the identity map
ScalarField pullback(const PhaseIndicator& chi, const FlowMapSample& map);

// max Frobenius norm of the finite-difference Jacobian of the foot-point map,
// measured over interior cells
double mapGradientMaxNorm(const FlowMapSample& map);

// ||v||_C = max |component|; ||v||_C1 adds the max one-sided difference
double velocityC0Norm(const VelocityField& v);
double velocityC1Norm(const VelocityField& v);

struct DifferenceRate {
    double value = 0.0;       // || (chi - chi o X_{-s}) / s ||_{H^-1}
    double massDrift = 0.0;   // | integral of (chi - pullback) |
    bool massDriftFlagged = false;
};

DifferenceRate compositionDifferenceRate(const PhaseIndicator& chi, const VelocityField& v,
                                         double s, const NeumannPoisson& poisson,
                                         double driftTol = 1e-3);

} // namespace capflow

#endif
