#include "geoflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geoflow/errors.hpp"

namespace geoflow {

MultiField::MultiField(GridSpec grid, int channels, double fill)
    : grid_(std::move(grid)), channels_(channels), data_(grid_.size() * static_cast<std::size_t>(channels), fill) {
    if (channels <= 0) throw ShapeError("MultiField: channel count must be positive");
}

MultiField::MultiField(GridSpec grid, int channels, std::vector<double> values)
    : grid_(std::move(grid)), channels_(channels), data_(std::move(values)) {
    if (channels <= 0) throw ShapeError("MultiField: channel count must be positive");
    if (data_.size() != grid_.size() * static_cast<std::size_t>(channels)) {
        throw ShapeError("MultiField: expected " + std::to_string(grid_.size() * channels) +
                         " values, got " + std::to_string(data_.size()));
    }
}

void MultiField::check_compatible(const MultiField &other, const char *where) const {
    require_same_grid(grid_, other.grid_, where);
    if (channels_ != other.channels_) {
        throw ShapeError(std::string(where) + ": channel counts differ (" + std::to_string(channels_) +
                         " vs " + std::to_string(other.channels_) + ")");
    }
}

MultiField &MultiField::operator+=(const MultiField &other) {
    check_compatible(other, "MultiField::operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

MultiField &MultiField::operator-=(const MultiField &other) {
    check_compatible(other, "MultiField::operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

MultiField &MultiField::operator*=(double s) noexcept {
    for (double &x : data_) x *= s;
    return *this;
}

MultiField &MultiField::axpy(double a, const MultiField &x) {
    check_compatible(x, "MultiField::axpy");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += a * x.data_[k];
    return *this;
}

void MultiField::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

bool MultiField::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

double MultiField::sum_squares() const noexcept {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return s;
}

double MultiField::max_abs() const noexcept {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

ScalarField::ScalarField(MultiField f) : MultiField(std::move(f)) {
    if (channels() != 1) throw ShapeError("ScalarField: expected 1 channel, got " + std::to_string(channels()));
}

VectorField::VectorField(GridSpec grid, double fill) : MultiField(grid, grid.ndim(), fill) {}

VectorField::VectorField(MultiField f) : MultiField(std::move(f)) {
    if (channels() != grid().ndim()) {
        throw ShapeError("VectorField: expected " + std::to_string(grid().ndim()) + " channels, got " +
                         std::to_string(channels()));
    }
}

VectorField VectorField::constant(const GridSpec &grid, std::span<const double> value) {
    if (static_cast<int>(value.size()) != grid.ndim()) {
        throw ShapeError("VectorField::constant: vector length must equal grid dimensionality");
    }
    VectorField v(grid);
    for (int i = 0; i < grid.ndim(); ++i) std::fill(v.component(i).begin(), v.component(i).end(), value[i]);
    return v;
}

bool Transform::is_identity() const noexcept {
    const auto d = displacement.data();
    return std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
}

JacobianField::JacobianField(const GridSpec &grid) : entries_(grid, grid.ndim() * grid.ndim()) {}

void require_same_grid(const GridSpec &a, const GridSpec &b, const char *where) {
    if (!(a == b)) throw GridMismatch(std::string(where) + " [" + a.describe() + " vs " + b.describe() + "]");
}

} // namespace geoflow
