#include "capflow/scalar_field.hpp"

#include <cmath>
#include <stdexcept>

namespace capflow {

double ScalarField::integral() const {
    double s = 0.0;
    for (double x : data()) s += x;
    return s * grid_.cellVolume();
}

double ScalarField::maxAbs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::fabs(x));
    return m;
}

double ScalarField::l2NormSq() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return s * grid_.cellVolume();
}

double ScalarField::l2Norm() const { return std::sqrt(l2NormSq()); }

bool ScalarField::allFinite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    requireSameGrid(grid_, o.grid(), "ScalarField::operator+=");
    for (size_t k = 0; k < v_.size(); ++k) v_[k] += o.data()[k];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    requireSameGrid(grid_, o.grid(), "ScalarField::operator-=");
    for (size_t k = 0; k < v_.size(); ++k) v_[k] -= o.data()[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
}

MeanZeroField MeanZeroField::require(const ScalarField& f) {
    const double tol = 1e-12 * std::max(1.0, f.maxAbs());
    if (std::fabs(f.mean()) > tol)
        throw std::invalid_argument("MeanZeroField::require: field mean is not zero");
    return MeanZeroField(f);
}

MeanZeroField projectMeanZero(const ScalarField& f) {
    ScalarField g = f;
    const double m = f.mean();
    for (double& x : g.data()) x -= m;
    return MeanZeroField(g);
}

} // namespace capflow
