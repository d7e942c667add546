// Storage for discrete fields on a GridShape.
//
// ScalarField is cell-centred (n, c, p). VectorField is MAC-staggered:
// u lives on x-faces, v on y-faces. TensorField stores the three
// independent entries of a symmetric 2x2 matrix per cell.

#pragma once

#include "chemofluid/errors.hpp"
#include "chemofluid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace chemofluid {

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridShape& shape, double value = 0.0)
        : shape_(shape), values_(shape.cells(), value) {}

    const GridShape& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& at(int i, int j) { return values_[shape_.cell(i, j)]; }
    double at(int i, int j) const { return values_[shape_.cell(i, j)]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
    }

private:
    GridShape shape_;
    std::vector<double> values_;
};

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const GridShape& shape)
        : shape_(shape), u_(shape.xfaces(), 0.0), v_(shape.yfaces(), 0.0) {}

    const GridShape& shape() const { return shape_; }

    std::vector<double>& u() { return u_; }
    const std::vector<double>& u() const { return u_; }
    std::vector<double>& v() { return v_; }
    const std::vector<double>& v() const { return v_; }

    bool all_finite() const {
        auto finite = [](double x) { return std::isfinite(x); };
        return std::all_of(u_.begin(), u_.end(), finite) && std::all_of(v_.begin(), v_.end(), finite);
    }

private:
    GridShape shape_;
    std::vector<double> u_;
    std::vector<double> v_;
};

/// Symmetric 2x2 tensor per cell; symmetry holds by construction.
struct TensorField {
    ScalarField xx;
    ScalarField xy;
    ScalarField yy;

    TensorField() = default;
    explicit TensorField(const GridShape& shape) : xx(shape), xy(shape), yy(shape) {}

    double trace(std::size_t k) const { return xx[k] + yy[k]; }
    /// Frobenius norm squared |D^2 z|^2.
    double frobenius_sq(std::size_t k) const { return xx[k] * xx[k] + yy[k] * yy[k] + 2.0 * xy[k] * xy[k]; }
};

inline void require_same_grid(const GridShape& a, const GridShape& b, const char* what) {
    if (!(a == b)) {
        throw GridMismatchError(std::string(what) + ": field grid does not match geometry grid");
    }
}

} // namespace chemofluid
