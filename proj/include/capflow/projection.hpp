// projection.hpp
// Discrete Leray projection for MAC fields: subtracts the gradient part so the
// 5-point divergence vanishes to round-off. The Neumann Poisson solve uses the
// discrete operator's own cosine eigenvalues, so the projection inverts the
// exact div(grad(.)) stencil rather than a spectral approximation of it.

#ifndef CAPFLOW_PROJECTION_HPP
#define CAPFLOW_PROJECTION_HPP

#include <memory>

#include "capflow/velocity_field.hpp"

namespace capflow {

class MacProjector {
public:
    explicit MacProjector(const Grid& g);
    ~MacProjector();

    MacProjector(const MacProjector&) = delete;
    MacProjector& operator=(const MacProjector&) = delete;

    const Grid& grid() const { return grid_; }

    // pins normal boundary faces to zero and removes the discrete gradient part
    void project(VelocityField& G) const;

    // solve -Lap_fd(phi) = f (5-point mirror stencil), zero mean
    ScalarField solveDiscrete(const ScalarField& f) const;

private:
    Grid grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace capflow

#endif
