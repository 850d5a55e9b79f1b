// stream_solver.hpp
// Stream-function coordinates for the discrete divergence-free subspace of
// MAC fields on a simply connected box: every field with exactly zero
// discrete divergence and zero normal boundary data is grad-perp of a node
// stream function vanishing on the boundary. applyR/applyRT convert between
// the two representations; the DST-I node basis diagonalizes the node
// Laplacian and powers the Krylov preconditioners of the fluid solves.

#ifndef CAPFLOW_STREAM_SOLVER_HPP
#define CAPFLOW_STREAM_SOLVER_HPP

#include <memory>
#include <vector>

#include "capflow/velocity_field.hpp"

namespace capflow {

class StreamSolver {
public:
    explicit StreamSolver(const Grid& g);
    ~StreamSolver();

    StreamSolver(const StreamSolver&) = delete;
    StreamSolver& operator=(const StreamSolver&) = delete;

    const Grid& grid() const { return grid_; }
    int nodeCount() const { return (grid_.nx - 1) * (grid_.ny - 1); } // interior nodes

    // v = grad-perp(psi): exactly divergence-free, zero normal boundary data
    VelocityField applyR(const std::vector<double>& psi) const;

    // adjoint under the dV face inner product: (R psi, w)_dV = (psi, R^T w)
    std::vector<double> applyRT(const VelocityField& w) const;

    // diagonal solve in the DST basis: out = DST^-1[ DST(r) / f(lambda) ] with
    // f(lambda) = c0 + c1 l + c2 l^2 + c3 l^3 and l the node 5-point eigenvalue
    std::vector<double> diagSolve(const std::vector<double>& r, double c0, double c1, double c2,
                                  double c3) const;

    // stream function of a divergence-free field: psi = (-Lap_node)^{-1} curl(v)
    std::vector<double> streamOf(const VelocityField& v) const;

private:
    Grid grid_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace capflow

#endif
