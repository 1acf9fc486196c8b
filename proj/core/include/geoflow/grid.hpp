#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace geoflow {

using Point = std::array<double, 3>;

/// Regular periodic grid on a d-dimensional torus (d = 2 or 3).
///
/// Node (i0, i1, i2) sits at position (i0 * h0, i1 * h1, i2 * h2). Storage is row-major with
/// axis 0 slowest. Unless given, spacing is 1/dims so the domain is the unit torus.
class GridSpec {
public:
    GridSpec() = default;
    GridSpec(std::initializer_list<int> dims);
    explicit GridSpec(std::span<const int> dims);
    GridSpec(std::span<const int> dims, std::span<const double> spacing);

    int ndim() const noexcept { return ndim_; }
    int dim(int axis) const noexcept { return dims_[axis]; }
    double spacing(int axis) const noexcept { return spacing_[axis]; }
    double period(int axis) const noexcept { return dims_[axis] * spacing_[axis]; }
    const std::array<int, 3> &dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return size_; }
    double cell_volume() const noexcept;

    /// Linear offset of a node; unused trailing axes must be 0.
    std::size_t index(int i0, int i1, int i2 = 0) const noexcept {
        return (static_cast<std::size_t>(i0) * dims_[1] + i1) * dims_[2] + i2;
    }
    std::size_t stride(int axis) const noexcept { return strides_[axis]; }
    std::array<int, 3> coords(std::size_t index) const noexcept;
    Point position(std::size_t index) const noexcept;

    /// Dims divided by `factor` on every axis, spacing multiplied so the period is unchanged.
    GridSpec coarsened(int factor) const;
    GridSpec refined(int factor) const;

    std::string describe() const;

    friend bool operator==(const GridSpec &a, const GridSpec &b) noexcept;

private:
    void finalize();

    int ndim_ = 0;
    std::array<int, 3> dims_{1, 1, 1};
    std::array<double, 3> spacing_{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> strides_{1, 1, 1};
    std::size_t size_ = 0;
};

} // namespace geoflow
