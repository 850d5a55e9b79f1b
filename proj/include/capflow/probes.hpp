// probes.hpp
// Boundary-tangent test vector fields standing in for the space of
// volume-preserving inner variations, plus the first-variation and
// div-pairing quadratures evaluated against them.

#ifndef CAPFLOW_PROBES_HPP
#define CAPFLOW_PROBES_HPP

#include <string>
#include <vector>

#include "capflow/phase.hpp"

namespace capflow {

struct ProbeField {
    ScalarField bx, by;        // cell-centered components, B.n = 0 on the walls
    bool solenoidal = false;   // built divergence-free: mass-preserving for every chi
    std::string name;
};

// 12 fields: rotated gradients of sine bumps (divergence-free) and low-order
// polynomial fields vanishing normally at the walls (not mass-preserving)
std::vector<ProbeField> probeBasis(const Grid& g);

// centered-difference divergence of a probe (one-sided at the walls)
ScalarField probeDivergence(const ProbeField& B);

// int chi div(B) dx and int chi div(w B) dx
double chiDivInner(const PhaseIndicator& chi, const ProbeField& B);
double chiDivInner(const PhaseIndicator& chi, const ScalarField& w, const ProbeField& B);

// tangential first variation: sum over interface cells of
// weight * (Id - n x n) : grad B  at the cell center
double firstVariation(const InterfaceGeometry& geom, const ProbeField& B);

// B with a multiple of `ref` subtracted so that int chi div(B') = 0
ProbeField correctToMassPreserving(const ProbeField& B, const PhaseIndicator& chi,
                                   const ProbeField& ref);

} // namespace capflow

#endif
