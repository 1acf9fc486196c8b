#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "geoflow/grid.hpp"

namespace geoflow {

/// Multi-channel real samples on a GridSpec, stored channel-planar (channel c occupies
/// values [c * size, (c + 1) * size)).
class MultiField {
public:
    MultiField() = default;
    MultiField(GridSpec grid, int channels, double fill = 0.0);
    MultiField(GridSpec grid, int channels, std::vector<double> values);

    const GridSpec &grid() const noexcept { return grid_; }
    int channels() const noexcept { return channels_; }
    std::size_t points() const noexcept { return grid_.size(); }

    std::span<double> channel(int c) noexcept { return {data_.data() + c * points(), points()}; }
    std::span<const double> channel(int c) const noexcept { return {data_.data() + c * points(), points()}; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    double &at(int c, std::size_t p) noexcept { return data_[c * points() + p]; }
    double at(int c, std::size_t p) const noexcept { return data_[c * points() + p]; }

    MultiField &operator+=(const MultiField &other);
    MultiField &operator-=(const MultiField &other);
    MultiField &operator*=(double s) noexcept;
    /// this += a * x
    MultiField &axpy(double a, const MultiField &x);
    void fill(double v) noexcept;

    bool all_finite() const noexcept;
    /// Plain sum of squares over all samples, no cell-volume weighting.
    double sum_squares() const noexcept;
    double max_abs() const noexcept;

private:
    void check_compatible(const MultiField &other, const char *where) const;

    GridSpec grid_;
    int channels_ = 0;
    std::vector<double> data_;
};

class ScalarField : public MultiField {
public:
    ScalarField() = default;
    explicit ScalarField(GridSpec grid, double fill = 0.0) : MultiField(std::move(grid), 1, fill) {}
    ScalarField(GridSpec grid, std::vector<double> values) : MultiField(std::move(grid), 1, std::move(values)) {}
    /// Reinterprets a one-channel MultiField.
    explicit ScalarField(MultiField f);

    std::span<double> values() noexcept { return channel(0); }
    std::span<const double> values() const noexcept { return channel(0); }
    double operator[](std::size_t p) const noexcept { return at(0, p); }
    double &operator[](std::size_t p) noexcept { return at(0, p); }
};

/// d components per node where d is the grid dimensionality.
class VectorField : public MultiField {
public:
    VectorField() = default;
    explicit VectorField(GridSpec grid, double fill = 0.0);
    /// Reinterprets a d-channel MultiField.
    explicit VectorField(MultiField f);
    /// Same vector at every node.
    static VectorField constant(const GridSpec &grid, std::span<const double> value);

    int ndim() const noexcept { return grid().ndim(); }
    std::span<double> component(int i) noexcept { return channel(i); }
    std::span<const double> component(int i) const noexcept { return channel(i); }
};

/// phi(x) = x + u(x) with u stored in torus (physical) coordinates.
struct Transform {
    VectorField displacement;

    Transform() = default;
    explicit Transform(VectorField u) : displacement(std::move(u)) {}
    static Transform identity(const GridSpec &grid) { return Transform(VectorField(grid)); }
    static Transform translation(const GridSpec &grid, std::span<const double> shift) {
        return Transform(VectorField::constant(grid, shift));
    }

    const GridSpec &grid() const noexcept { return displacement.grid(); }
    bool is_identity() const noexcept;
};

/// d x d matrix per node; entry(i, j) holds d(v_i)/d(x_j).
class JacobianField {
public:
    explicit JacobianField(const GridSpec &grid);

    const GridSpec &grid() const noexcept { return entries_.grid(); }
    int ndim() const noexcept { return grid().ndim(); }
    std::span<double> entry(int i, int j) noexcept { return entries_.channel(i * ndim() + j); }
    std::span<const double> entry(int i, int j) const noexcept { return entries_.channel(i * ndim() + j); }

private:
    MultiField entries_;
};

template <class F>
    requires std::derived_from<F, MultiField>
F operator+(F a, const F &b) {
    a += b;
    return a;
}

template <class F>
    requires std::derived_from<F, MultiField>
F operator-(F a, const F &b) {
    a -= b;
    return a;
}

template <class F>
    requires std::derived_from<F, MultiField>
F operator*(double s, F a) {
    a *= s;
    return a;
}

/// Throws GridMismatch naming `where` unless both grids are equal.
void require_same_grid(const GridSpec &a, const GridSpec &b, const char *where);

} // namespace geoflow
