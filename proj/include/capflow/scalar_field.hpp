// scalar_field.hpp
// Cell-centered scalar fields and the mean-zero subtype.
// Reductions use a fixed (row-major) summation order for bit-reproducibility.

#ifndef CAPFLOW_SCALAR_FIELD_HPP
#define CAPFLOW_SCALAR_FIELD_HPP

#include <vector>

#include "capflow/grid.hpp"

namespace capflow {

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid_(g), v_(static_cast<size_t>(g.cellCount()), fill) {}

    const Grid& grid() const { return grid_; }
    double& operator()(int i, int j) { return v_[grid_.id(i, j)]; }
    double operator()(int i, int j) const { return v_[grid_.id(i, j)]; }
    double& at(int id) { return v_[id]; }
    double at(int id) const { return v_[id]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }
    int size() const { return static_cast<int>(v_.size()); }

    // volume-weighted integral and mean
    double integral() const;
    double mean() const { return integral() / grid_.volume(); }
    double maxAbs() const;
    double l2NormSq() const;  // sum v^2 * dV
    double l2Norm() const;

    bool allFinite() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double a);

private:
    Grid grid_;
    std::vector<double> v_;
};

// Scalar field with (volume-weighted) zero mean: |mean| <= 1e-12 * max|value|.
class MeanZeroField : public ScalarField {
public:
    MeanZeroField() = default;
    explicit MeanZeroField(const Grid& g) : ScalarField(g, 0.0) {}

    // Validated construction; throws if the mean is not numerically zero.
    static MeanZeroField require(const ScalarField& f);

private:
    explicit MeanZeroField(const ScalarField& f) : ScalarField(f) {}
    friend MeanZeroField projectMeanZero(const ScalarField& f);
};

// Subtracts the volume-weighted mean. Idempotent.
MeanZeroField projectMeanZero(const ScalarField& f);

} // namespace capflow

#endif
