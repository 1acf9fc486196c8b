#pragma once

#include <array>
#include <span>
#include <vector>

#include "geoflow/fft.hpp"
#include "geoflow/field.hpp"

namespace geoflow {

/// Diagonal Fourier multiplier of L = (-alpha * Lap + Id)^c and of its inverse K.
///
/// The Laplacian symbol is that of the periodic second-order stencil,
/// sum_a (2 / s^2) (1 - cos(2 pi k_a / n_a)), with s the cell size in pixel units. Image grids
/// use s = 1; a grid coarsened by a factor f uses s = f so the operator keeps its pixel-space
/// meaning.
class FourierMultiplier {
public:
    FourierMultiplier(const GridSpec &grid, double alpha, int exponent, double cell_size = 1.0);

    const GridSpec &grid() const noexcept { return grid_; }
    double alpha() const noexcept { return alpha_; }
    int exponent() const noexcept { return exponent_; }
    double cell_size() const noexcept { return cell_size_; }

    /// Closed-form symbol of L at integer frequency (k0, k1, k2).
    double symbol(std::array<int, 3> k) const noexcept;

    std::span<const double> l_coefficients() const noexcept { return l_; }
    std::span<const double> k_coefficients() const noexcept { return k_; }
    const Fft &fft() const noexcept { return fft_; }

private:
    GridSpec grid_;
    double alpha_;
    int exponent_;
    double cell_size_;
    Fft fft_;
    std::vector<double> l_;
    std::vector<double> k_;
};

/// Channelwise multiplication by L (resp. K) in frequency space.
MultiField apply_L(const MultiField &u, const FourierMultiplier &mult);
MultiField apply_K(const MultiField &u, const FourierMultiplier &mult);
VectorField apply_L(const VectorField &v, const FourierMultiplier &mult);
VectorField apply_K(const VectorField &m, const FourierMultiplier &mult);

/// K applied to every channel; the smoothing half of the GNO activation.
MultiField smooth(const MultiField &u, const FourierMultiplier &mult);

/// Per-frequency complex channel-mixing weights of a global convolution kernel.
///
/// Frequencies are kept in a signed box [-modes_a, modes_a - 1] on each axis, so a kernel is
/// independent of the grid it is applied on as long as 2 * modes_a <= dims_a.
class SpectralKernel {
public:
    SpectralKernel() = default;
    SpectralKernel(int channels_in, int channels_out, int ndim, std::array<int, 3> modes);

    static SpectralKernel identity(int channels, int ndim, std::array<int, 3> modes);

    int channels_in() const noexcept { return in_; }
    int channels_out() const noexcept { return out_; }
    int ndim() const noexcept { return ndim_; }
    const std::array<int, 3> &modes() const noexcept { return modes_; }
    std::size_t frequency_count() const noexcept { return freq_count_; }

    Complex &weight(std::size_t freq, int o, int i) noexcept { return weights_[(freq * out_ + o) * in_ + i]; }
    Complex weight(std::size_t freq, int o, int i) const noexcept { return weights_[(freq * out_ + o) * in_ + i]; }
    std::span<Complex> weights() noexcept { return weights_; }
    std::span<const Complex> weights() const noexcept { return weights_; }

    /// Signed frequency of box entry `freq`.
    std::array<int, 3> frequency(std::size_t freq) const noexcept;
    /// Position of box entry `freq` in the FFT layout of `grid`; throws ShapeError if the box
    /// does not fit.
    std::vector<std::size_t> fft_indices(const GridSpec &grid) const;

private:
    int in_ = 0;
    int out_ = 0;
    int ndim_ = 2;
    std::array<int, 3> modes_{1, 1, 1};
    std::size_t freq_count_ = 0;
    std::vector<Complex> weights_;
};

/// FFT each channel, mix channels per retained frequency, zero the rest, inverse FFT, real part.
MultiField spectral_conv(const MultiField &u, const SpectralKernel &kernel);

/// Reverse mode of spectral_conv. Returns the input sensitivity and accumulates weight
/// sensitivities (d/dRe + i d/dIm) into `kernel_grad`.
MultiField spectral_conv_backward(const MultiField &u, const SpectralKernel &kernel, const MultiField &upstream,
                                  SpectralKernel &kernel_grad);

} // namespace geoflow
