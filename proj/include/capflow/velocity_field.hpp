// velocity_field.hpp
// Staggered (MAC) velocity fields: u on vertical faces, v on horizontal faces.
// Normal components on the domain boundary are pinned to zero, so boundary-
// tangency is structural. Discrete gradient (cells -> faces, zero on boundary
// faces) and divergence (faces -> cells) are exact negative adjoints.

#ifndef CAPFLOW_VELOCITY_FIELD_HPP
#define CAPFLOW_VELOCITY_FIELD_HPP

#include <vector>

#include "capflow/grid.hpp"
#include "capflow/scalar_field.hpp"

namespace capflow {

class VelocityField {
public:
    VelocityField() = default;
    explicit VelocityField(const Grid& g)
        : grid_(g),
          u_(static_cast<size_t>((g.nx + 1) * g.ny), 0.0),
          v_(static_cast<size_t>(g.nx * (g.ny + 1)), 0.0) {}

    const Grid& grid() const { return grid_; }

    // u lives at (i*dx, (j+1/2)*dy), i = 0..nx; v at ((i+1/2)*dx, j*dy), j = 0..ny
    double& u(int i, int j) { return u_[j * (grid_.nx + 1) + i]; }
    double u(int i, int j) const { return u_[j * (grid_.nx + 1) + i]; }
    double& v(int i, int j) { return v_[j * grid_.nx + i]; }
    double v(int i, int j) const { return v_[j * grid_.nx + i]; }

    std::vector<double>& uData() { return u_; }
    std::vector<double>& vData() { return v_; }
    const std::vector<double>& uData() const { return u_; }
    const std::vector<double>& vData() const { return v_; }

    void zeroNormalBoundary();       // pin u on x-walls, v on y-walls to 0
    double maxNormalBoundary() const;

    // bilinear sample of each component from its own staggered lattice;
    // coordinates are clamped to the closed domain
    double sampleU(double x, double y) const;
    double sampleV(double x, double y) const;

    double maxAbs() const;
    double l2NormSq() const;  // face-sum of u^2, v^2 weighted by dV (interior faces)
    double l2Norm() const;
    double maxGradAbs() const;  // max |dv_i/dx_j| over one-sided face differences
    bool allFinite() const;

    VelocityField& operator+=(const VelocityField& o);
    VelocityField& operator-=(const VelocityField& o);
    VelocityField& operator*=(double a);

private:
    Grid grid_;
    std::vector<double> u_, v_;
};

// div G per cell: (u_{i+1,j}-u_{i,j})/dx + (v_{i,j+1}-v_{i,j})/dy
ScalarField divergence(const VelocityField& G);
double maxDivergence(const VelocityField& G);

// gradient of a cell field on faces; zero on boundary faces (Neumann mirror)
VelocityField gradientToFaces(const ScalarField& f);

// face inner product sum_faces a.b * dV (boundary faces carry zero normal data)
double faceInner(const VelocityField& a, const VelocityField& b);

// |<grad f, G> + <f, div G>| : exact-adjointness self test (G boundary-tangent)
double adjointPairCheck(const ScalarField& f, const VelocityField& G);

// cell-centered average of each staggered component
void cellAverage(const VelocityField& w, ScalarField& uc, ScalarField& vc);

} // namespace capflow

#endif
