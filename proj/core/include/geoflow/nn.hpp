#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "geoflow/field.hpp"

/// Minimal 2D layer kit with hand-written reverse mode. All layers use periodic padding.
namespace geoflow::nn {

/// 3x3 convolution, stride 1 or 2. weight layout [out][in][3][3].
struct Conv2d {
    int in = 0;
    int out = 0;
    int stride = 1;
    std::vector<double> weight;
    std::vector<double> bias;

    Conv2d() = default;
    Conv2d(int in, int out, int stride);
    double &w(int o, int i, int a, int b) noexcept { return weight[((o * in + i) * 3 + a) * 3 + b]; }
    double w(int o, int i, int a, int b) const noexcept { return weight[((o * in + i) * 3 + a) * 3 + b]; }
};

/// Pointwise (1x1) affine map. weight layout [out][in].
struct Linear {
    int in = 0;
    int out = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    Linear() = default;
    Linear(int in, int out);
};

MultiField conv2d(const Conv2d &layer, const MultiField &x);
/// Accumulates into `grad` and returns the input sensitivity.
MultiField conv2d_backward(const Conv2d &layer, const MultiField &x, const MultiField &upstream, Conv2d &grad);

MultiField linear(const Linear &layer, const MultiField &x);
MultiField linear_backward(const Linear &layer, const MultiField &x, const MultiField &upstream, Linear &grad);

/// Bilinear x2 upsampling with periodic wrap (half-pixel centers).
MultiField upsample2x(const MultiField &x);
/// Adjoint of upsample2x onto `coarse`.
MultiField upsample2x_backward(const MultiField &upstream, const GridSpec &coarse);

double gelu(double x) noexcept;
double gelu_derivative(double x) noexcept;
MultiField gelu(const MultiField &x);
/// upstream * GeLU'(pre)
MultiField gelu_backward(const MultiField &pre, const MultiField &upstream);

/// Fills with U(-bound, bound).
void init_uniform(std::span<double> values, double bound, std::mt19937_64 &rng);

} // namespace geoflow::nn
