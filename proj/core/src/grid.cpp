#include "geoflow/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace geoflow {

GridSpec::GridSpec(std::initializer_list<int> dims)
    : GridSpec(std::span<const int>(dims.begin(), dims.size())) {}

GridSpec::GridSpec(std::span<const int> dims) {
    if (dims.size() != 2 && dims.size() != 3) {
        throw std::invalid_argument("GridSpec: dimensionality must be 2 or 3, got " +
                                    std::to_string(dims.size()));
    }
    ndim_ = static_cast<int>(dims.size());
    for (int a = 0; a < ndim_; ++a) {
        dims_[a] = dims[a];
        spacing_[a] = dims[a] > 0 ? 1.0 / dims[a] : 0.0;
    }
    finalize();
}

GridSpec::GridSpec(std::span<const int> dims, std::span<const double> spacing) : GridSpec(dims) {
    if (spacing.size() != dims.size()) {
        throw std::invalid_argument("GridSpec: spacing must have one entry per axis");
    }
    for (int a = 0; a < ndim_; ++a) {
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
            throw std::invalid_argument("GridSpec: spacing must be finite and positive");
        }
        spacing_[a] = spacing[a];
    }
}

void GridSpec::finalize() {
    for (int a = 0; a < ndim_; ++a) {
        if (dims_[a] < 4) {
            throw std::invalid_argument("GridSpec: every axis needs at least 4 nodes, axis " +
                                        std::to_string(a) + " has " + std::to_string(dims_[a]));
        }
    }
    strides_[2] = 1;
    strides_[1] = static_cast<std::size_t>(dims_[2]);
    strides_[0] = static_cast<std::size_t>(dims_[1]) * dims_[2];
    size_ = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
}

double GridSpec::cell_volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < ndim_; ++a) v *= spacing_[a];
    return v;
}

std::array<int, 3> GridSpec::coords(std::size_t index) const noexcept {
    std::array<int, 3> c{0, 0, 0};
    c[0] = static_cast<int>(index / strides_[0]);
    index -= static_cast<std::size_t>(c[0]) * strides_[0];
    c[1] = static_cast<int>(index / strides_[1]);
    c[2] = static_cast<int>(index - static_cast<std::size_t>(c[1]) * strides_[1]);
    return c;
}

Point GridSpec::position(std::size_t index) const noexcept {
    const auto c = coords(index);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < ndim_; ++a) p[a] = c[a] * spacing_[a];
    return p;
}

GridSpec GridSpec::coarsened(int factor) const {
    std::array<int, 3> d{};
    std::array<double, 3> h{};
    for (int a = 0; a < ndim_; ++a) {
        if (factor <= 0 || dims_[a] % factor != 0) {
            throw std::invalid_argument("GridSpec::coarsened: dims " + describe() +
                                        " not divisible by " + std::to_string(factor));
        }
        d[a] = dims_[a] / factor;
        h[a] = spacing_[a] * factor;
    }
    return GridSpec(std::span<const int>(d.data(), ndim_), std::span<const double>(h.data(), ndim_));
}

GridSpec GridSpec::refined(int factor) const {
    std::array<int, 3> d{};
    std::array<double, 3> h{};
    for (int a = 0; a < ndim_; ++a) {
        d[a] = dims_[a] * factor;
        h[a] = spacing_[a] / factor;
    }
    return GridSpec(std::span<const int>(d.data(), ndim_), std::span<const double>(h.data(), ndim_));
}

std::string GridSpec::describe() const {
    std::ostringstream os;
    for (int a = 0; a < ndim_; ++a) os << (a ? "x" : "") << dims_[a];
    return os.str();
}

bool operator==(const GridSpec &a, const GridSpec &b) noexcept {
    if (a.ndim_ != b.ndim_) return false;
    for (int ax = 0; ax < a.ndim_; ++ax) {
        if (a.dims_[ax] != b.dims_[ax]) return false;
        if (std::abs(a.spacing_[ax] - b.spacing_[ax]) > 1e-12 * std::abs(a.spacing_[ax])) return false;
    }
    return true;
}

} // namespace geoflow
