#include "geoflow/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "geoflow/errors.hpp"

namespace geoflow {

FourierMultiplier::FourierMultiplier(const GridSpec &grid, double alpha, int exponent, double cell_size)
    : grid_(grid), alpha_(alpha), exponent_(exponent), cell_size_(cell_size), fft_(grid) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("FourierMultiplier: alpha must be > 0");
    if (exponent < 1) throw std::invalid_argument("FourierMultiplier: exponent must be a positive integer");
    if (!(cell_size > 0.0)) throw std::invalid_argument("FourierMultiplier: cell size must be > 0");
    l_.resize(grid.size());
    k_.resize(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        l_[p] = symbol(grid.coords(p));
        k_[p] = 1.0 / l_[p];
    }
}

double FourierMultiplier::symbol(std::array<int, 3> k) const noexcept {
    double lap = 0.0;
    for (int a = 0; a < grid_.ndim(); ++a) {
        lap += 2.0 / (cell_size_ * cell_size_) *
               (1.0 - std::cos(2.0 * std::numbers::pi * k[a] / static_cast<double>(grid_.dim(a))));
    }
    return std::pow(1.0 + alpha_ * lap, exponent_);
}

namespace {

MultiField apply_diagonal(const MultiField &u, const FourierMultiplier &mult, std::span<const double> coeff,
                          const char *where) {
    require_same_grid(u.grid(), mult.grid(), where);
    MultiField out(u.grid(), u.channels());
    const Fft &fft = mult.fft();
    std::vector<Complex> buf(u.points());
    for (int c = 0; c < u.channels(); ++c) {
        std::vector<Complex> spec = fft.forward_real(u.channel(c));
        for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= coeff[k];
        fft.inverse(spec, buf);
        auto oc = out.channel(c);
        for (std::size_t p = 0; p < buf.size(); ++p) oc[p] = buf[p].real();
    }
    return out;
}

} // namespace

MultiField apply_L(const MultiField &u, const FourierMultiplier &mult) {
    return apply_diagonal(u, mult, mult.l_coefficients(), "apply_L");
}
MultiField apply_K(const MultiField &u, const FourierMultiplier &mult) {
    return apply_diagonal(u, mult, mult.k_coefficients(), "apply_K");
}
VectorField apply_L(const VectorField &v, const FourierMultiplier &mult) {
    return VectorField(apply_L(static_cast<const MultiField &>(v), mult));
}
VectorField apply_K(const VectorField &m, const FourierMultiplier &mult) {
    return VectorField(apply_K(static_cast<const MultiField &>(m), mult));
}
MultiField smooth(const MultiField &u, const FourierMultiplier &mult) { return apply_K(u, mult); }

SpectralKernel::SpectralKernel(int channels_in, int channels_out, int ndim, std::array<int, 3> modes)
    : in_(channels_in), out_(channels_out), ndim_(ndim), modes_{1, 1, 1} {
    if (channels_in <= 0 || channels_out <= 0) throw ShapeError("SpectralKernel: channel counts must be positive");
    if (ndim != 2 && ndim != 3) throw ShapeError("SpectralKernel: ndim must be 2 or 3");
    freq_count_ = 1;
    for (int a = 0; a < ndim; ++a) {
        if (modes[a] < 1) throw ShapeError("SpectralKernel: at least one mode per axis");
        modes_[a] = modes[a];
        freq_count_ *= static_cast<std::size_t>(2 * modes[a]);
    }
    weights_.assign(freq_count_ * out_ * in_, Complex{});
}

SpectralKernel SpectralKernel::identity(int channels, int ndim, std::array<int, 3> modes) {
    SpectralKernel k(channels, channels, ndim, modes);
    for (std::size_t f = 0; f < k.frequency_count(); ++f) {
        for (int c = 0; c < channels; ++c) k.weight(f, c, c) = 1.0;
    }
    return k;
}

std::array<int, 3> SpectralKernel::frequency(std::size_t freq) const noexcept {
    std::array<int, 3> s{0, 0, 0};
    for (int a = ndim_ - 1; a >= 0; --a) {
        const std::size_t span = 2 * static_cast<std::size_t>(modes_[a]);
        s[a] = static_cast<int>(freq % span) - modes_[a];
        freq /= span;
    }
    return s;
}

std::vector<std::size_t> SpectralKernel::fft_indices(const GridSpec &grid) const {
    if (grid.ndim() != ndim_) throw ShapeError("SpectralKernel: grid dimensionality mismatch");
    for (int a = 0; a < ndim_; ++a) {
        if (2 * modes_[a] > grid.dim(a)) {
            throw ShapeError("SpectralKernel: " + std::to_string(modes_[a]) + " modes do not fit axis of " +
                             std::to_string(grid.dim(a)) + " nodes");
        }
    }
    std::vector<std::size_t> idx(freq_count_);
    for (std::size_t f = 0; f < freq_count_; ++f) {
        const auto s = frequency(f);
        std::array<int, 3> c{0, 0, 0};
        for (int a = 0; a < ndim_; ++a) c[a] = s[a] < 0 ? grid.dim(a) + s[a] : s[a];
        idx[f] = grid.index(c[0], c[1], c[2]);
    }
    return idx;
}

MultiField spectral_conv(const MultiField &u, const SpectralKernel &kernel) {
    if (u.channels() != kernel.channels_in()) {
        throw ShapeError("spectral_conv: input has " + std::to_string(u.channels()) + " channels, kernel expects " +
                         std::to_string(kernel.channels_in()));
    }
    const GridSpec &g = u.grid();
    const auto idx = kernel.fft_indices(g);
    const Fft fft(g);
    std::vector<std::vector<Complex>> xin(u.channels());
    for (int c = 0; c < u.channels(); ++c) xin[c] = fft.forward_real(u.channel(c));

    MultiField out(g, kernel.channels_out());
    std::vector<Complex> spec(g.size());
    for (int o = 0; o < kernel.channels_out(); ++o) {
        std::fill(spec.begin(), spec.end(), Complex{});
        for (std::size_t f = 0; f < idx.size(); ++f) {
            Complex acc{};
            for (int c = 0; c < kernel.channels_in(); ++c) acc += kernel.weight(f, o, c) * xin[c][idx[f]];
            spec[idx[f]] = acc;
        }
        fft.inverse_real(spec, out.channel(o));
    }
    return out;
}

MultiField spectral_conv_backward(const MultiField &u, const SpectralKernel &kernel, const MultiField &upstream,
                                  SpectralKernel &kernel_grad) {
    const GridSpec &g = u.grid();
    require_same_grid(g, upstream.grid(), "spectral_conv_backward");
    if (upstream.channels() != kernel.channels_out() || u.channels() != kernel.channels_in()) {
        throw ShapeError("spectral_conv_backward: channel mismatch");
    }
    const auto idx = kernel.fft_indices(g);
    const Fft fft(g);
    const double inv_n = 1.0 / static_cast<double>(g.size());

    std::vector<std::vector<Complex>> xin(u.channels()), yup(upstream.channels());
    for (int c = 0; c < u.channels(); ++c) xin[c] = fft.forward_real(u.channel(c));
    for (int o = 0; o < upstream.channels(); ++o) yup[o] = fft.forward_real(upstream.channel(o));

    for (std::size_t f = 0; f < idx.size(); ++f) {
        for (int o = 0; o < kernel.channels_out(); ++o) {
            const Complex go = yup[o][idx[f]] * inv_n;
            for (int c = 0; c < kernel.channels_in(); ++c) kernel_grad.weight(f, o, c) += go * std::conj(xin[c][idx[f]]);
        }
    }

    MultiField grad_in(g, u.channels());
    std::vector<Complex> spec(g.size());
    for (int c = 0; c < u.channels(); ++c) {
        std::fill(spec.begin(), spec.end(), Complex{});
        for (std::size_t f = 0; f < idx.size(); ++f) {
            Complex acc{};
            for (int o = 0; o < kernel.channels_out(); ++o) acc += std::conj(kernel.weight(f, o, c)) * yup[o][idx[f]];
            spec[idx[f]] = acc;
        }
        fft.inverse_real(spec, grad_in.channel(c));
    }
    return grad_in;
}

} // namespace geoflow
