#include "geoflow/nn.hpp"

#include <cmath>
#include <numbers>

#include "geoflow/errors.hpp"

namespace geoflow::nn {
namespace {

void require_2d(const MultiField &x, const char *where) {
    if (x.grid().ndim() != 2) throw ShapeError(std::string(where) + ": only 2D fields are supported");
}

inline int wrap(int i, int n) noexcept { return i < 0 ? i + n : (i >= n ? i - n : i); }

} // namespace

Conv2d::Conv2d(int in_, int out_, int stride_)
    : in(in_), out(out_), stride(stride_), weight(static_cast<std::size_t>(out_) * in_ * 9, 0.0),
      bias(static_cast<std::size_t>(out_), 0.0) {
    if (in <= 0 || out <= 0) throw ShapeError("Conv2d: channel counts must be positive");
    if (stride != 1 && stride != 2) throw ShapeError("Conv2d: stride must be 1 or 2");
}

Linear::Linear(int in_, int out_)
    : in(in_), out(out_), weight(static_cast<std::size_t>(out_) * in_, 0.0), bias(static_cast<std::size_t>(out_), 0.0) {
    if (in <= 0 || out <= 0) throw ShapeError("Linear: channel counts must be positive");
}

MultiField conv2d(const Conv2d &layer, const MultiField &x) {
    require_2d(x, "conv2d");
    if (x.channels() != layer.in) {
        throw ShapeError("conv2d: input has " + std::to_string(x.channels()) + " channels, layer expects " +
                         std::to_string(layer.in));
    }
    const GridSpec &gi = x.grid();
    const GridSpec go = layer.stride == 1 ? gi : gi.coarsened(layer.stride);
    const int n0 = gi.dim(0), n1 = gi.dim(1);
    const int m0 = go.dim(0), m1 = go.dim(1);
    const int s = layer.stride;
    MultiField y(go, layer.out);
    std::vector<int> cols(static_cast<std::size_t>(m1) * 3);
    for (int b = 0; b < 3; ++b) {
        for (int j = 0; j < m1; ++j) cols[b * m1 + j] = wrap(s * j + b - 1, n1);
    }
    for (int o = 0; o < layer.out; ++o) {
        auto yo = y.channel(o);
        std::fill(yo.begin(), yo.end(), layer.bias[o]);
        for (int c = 0; c < layer.in; ++c) {
            const auto xc = x.channel(c);
            for (int a = 0; a < 3; ++a) {
                for (int i = 0; i < m0; ++i) {
                    const double *row = xc.data() + static_cast<std::size_t>(wrap(s * i + a - 1, n0)) * n1;
                    double *yrow = yo.data() + static_cast<std::size_t>(i) * m1;
                    for (int b = 0; b < 3; ++b) {
                        const double wv = layer.w(o, c, a, b);
                        const int *col = cols.data() + b * m1;
                        for (int j = 0; j < m1; ++j) yrow[j] += wv * row[col[j]];
                    }
                }
            }
        }
    }
    return y;
}

MultiField conv2d_backward(const Conv2d &layer, const MultiField &x, const MultiField &upstream, Conv2d &grad) {
    const GridSpec &gi = x.grid();
    const GridSpec &go = upstream.grid();
    const int n0 = gi.dim(0), n1 = gi.dim(1);
    const int m0 = go.dim(0), m1 = go.dim(1);
    const int s = layer.stride;
    if (upstream.channels() != layer.out) throw ShapeError("conv2d_backward: upstream channel mismatch");
    MultiField gx(gi, layer.in);
    std::vector<int> cols(static_cast<std::size_t>(m1) * 3);
    for (int b = 0; b < 3; ++b) {
        for (int j = 0; j < m1; ++j) cols[b * m1 + j] = wrap(s * j + b - 1, n1);
    }
    for (int o = 0; o < layer.out; ++o) {
        const auto go_ = upstream.channel(o);
        double bsum = 0.0;
        for (double v : go_) bsum += v;
        grad.bias[o] += bsum;
        for (int c = 0; c < layer.in; ++c) {
            const auto xc = x.channel(c);
            auto gxc = gx.channel(c);
            for (int a = 0; a < 3; ++a) {
                for (int i = 0; i < m0; ++i) {
                    const std::size_t roff = static_cast<std::size_t>(wrap(s * i + a - 1, n0)) * n1;
                    const double *row = xc.data() + roff;
                    double *grow = gxc.data() + roff;
                    const double *urow = go_.data() + static_cast<std::size_t>(i) * m1;
                    for (int b = 0; b < 3; ++b) {
                        const int *col = cols.data() + b * m1;
                        const double wv = layer.w(o, c, a, b);
                        double acc = 0.0;
                        for (int j = 0; j < m1; ++j) {
                            acc += urow[j] * row[col[j]];
                            grow[col[j]] += wv * urow[j];
                        }
                        grad.w(o, c, a, b) += acc;
                    }
                }
            }
        }
    }
    return gx;
}

MultiField linear(const Linear &layer, const MultiField &x) {
    if (x.channels() != layer.in) {
        throw ShapeError("linear: input has " + std::to_string(x.channels()) + " channels, layer expects " +
                         std::to_string(layer.in));
    }
    MultiField y(x.grid(), layer.out);
    for (int o = 0; o < layer.out; ++o) {
        auto yo = y.channel(o);
        std::fill(yo.begin(), yo.end(), layer.bias[o]);
        for (int c = 0; c < layer.in; ++c) {
            const double wv = layer.weight[o * layer.in + c];
            if (wv == 0.0) continue;
            const auto xc = x.channel(c);
            for (std::size_t p = 0; p < yo.size(); ++p) yo[p] += wv * xc[p];
        }
    }
    return y;
}

MultiField linear_backward(const Linear &layer, const MultiField &x, const MultiField &upstream, Linear &grad) {
    if (upstream.channels() != layer.out) throw ShapeError("linear_backward: upstream channel mismatch");
    MultiField gx(x.grid(), layer.in);
    for (int o = 0; o < layer.out; ++o) {
        const auto uo = upstream.channel(o);
        double bsum = 0.0;
        for (double v : uo) bsum += v;
        grad.bias[o] += bsum;
        for (int c = 0; c < layer.in; ++c) {
            const auto xc = x.channel(c);
            auto gc = gx.channel(c);
            const double wv = layer.weight[o * layer.in + c];
            double acc = 0.0;
            for (std::size_t p = 0; p < uo.size(); ++p) {
                acc += uo[p] * xc[p];
                gc[p] += wv * uo[p];
            }
            grad.weight[o * layer.in + c] += acc;
        }
    }
    return gx;
}

MultiField upsample2x(const MultiField &x) {
    require_2d(x, "upsample2x");
    const GridSpec &gc = x.grid();
    const GridSpec gf = gc.refined(2);
    const int n0 = gc.dim(0), n1 = gc.dim(1);
    const int m1 = gf.dim(1);
    MultiField y(gf, x.channels());
    for (int c = 0; c < x.channels(); ++c) {
        const auto xc = x.channel(c);
        auto yc = y.channel(c);
        for (int I = 0; I < gf.dim(0); ++I) {
            const int i = I / 2;
            const int i2 = (I % 2 == 0) ? wrap(i - 1, n0) : wrap(i + 1, n0);
            for (int J = 0; J < m1; ++J) {
                const int j = J / 2;
                const int j2 = (J % 2 == 0) ? wrap(j - 1, n1) : wrap(j + 1, n1);
                yc[static_cast<std::size_t>(I) * m1 + J] =
                    0.5625 * xc[static_cast<std::size_t>(i) * n1 + j] + 0.1875 * xc[static_cast<std::size_t>(i2) * n1 + j] +
                    0.1875 * xc[static_cast<std::size_t>(i) * n1 + j2] + 0.0625 * xc[static_cast<std::size_t>(i2) * n1 + j2];
            }
        }
    }
    return y;
}

MultiField upsample2x_backward(const MultiField &upstream, const GridSpec &coarse) {
    const GridSpec &gf = upstream.grid();
    const int n0 = coarse.dim(0), n1 = coarse.dim(1);
    const int m1 = gf.dim(1);
    MultiField gx(coarse, upstream.channels());
    for (int c = 0; c < upstream.channels(); ++c) {
        const auto uc = upstream.channel(c);
        auto gc = gx.channel(c);
        for (int I = 0; I < gf.dim(0); ++I) {
            const int i = I / 2;
            const int i2 = (I % 2 == 0) ? wrap(i - 1, n0) : wrap(i + 1, n0);
            for (int J = 0; J < m1; ++J) {
                const int j = J / 2;
                const int j2 = (J % 2 == 0) ? wrap(j - 1, n1) : wrap(j + 1, n1);
                const double u = uc[static_cast<std::size_t>(I) * m1 + J];
                gc[static_cast<std::size_t>(i) * n1 + j] += 0.5625 * u;
                gc[static_cast<std::size_t>(i2) * n1 + j] += 0.1875 * u;
                gc[static_cast<std::size_t>(i) * n1 + j2] += 0.1875 * u;
                gc[static_cast<std::size_t>(i2) * n1 + j2] += 0.0625 * u;
            }
        }
    }
    return gx;
}

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

double gelu(double x) noexcept { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_derivative(double x) noexcept {
    const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    const double pdf = std::exp(-0.5 * x * x) * 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    return cdf + x * pdf;
}

MultiField gelu(const MultiField &x) {
    MultiField y = x;
    for (double &v : y.data()) v = gelu(v);
    return y;
}

MultiField gelu_backward(const MultiField &pre, const MultiField &upstream) {
    MultiField g = upstream;
    const auto p = pre.data();
    auto d = g.data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] *= gelu_derivative(p[k]);
    return g;
}

void init_uniform(std::span<double> values, double bound, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double &v : values) v = dist(rng);
}

} // namespace geoflow::nn
