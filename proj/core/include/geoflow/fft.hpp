#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "geoflow/grid.hpp"

namespace geoflow {

using Complex = std::complex<double>;

/// Complex-to-complex d-dimensional DFT on a grid's node layout.
///
/// forward() is unnormalized; inverse() divides by the point count, so inverse(forward(x)) == x.
/// Plans are shared process-wide per grid shape; execution is thread-safe.
class Fft {
public:
    explicit Fft(const GridSpec &grid);

    std::size_t size() const noexcept { return size_; }
    void forward(std::span<const Complex> in, std::span<Complex> out) const;
    void inverse(std::span<const Complex> in, std::span<Complex> out) const;

    /// Convenience: forward transform of a real signal.
    std::vector<Complex> forward_real(std::span<const double> in) const;
    /// Convenience: real part of the inverse transform.
    void inverse_real(std::span<const Complex> in, std::span<double> out) const;

    struct Plans;

private:
    std::shared_ptr<const Plans> plans_;
    std::size_t size_;
};

} // namespace geoflow
