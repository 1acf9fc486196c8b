#include "geoflow/regnet.hpp"

#include <cmath>
#include <string>

#include "geoflow/errors.hpp"

namespace geoflow {
namespace {

void init_conv(nn::Conv2d &layer, std::mt19937_64 &rng, double scale = 1.0) {
    const double bound = scale / std::sqrt(static_cast<double>(layer.in * 9));
    nn::init_uniform(layer.weight, bound, rng);
    nn::init_uniform(layer.bias, bound, rng);
}

} // namespace

RegNetParams RegNetParams::init(const RegNetConfig &cfg, std::mt19937_64 &rng) {
    if (cfg.width <= 0 || cfg.latent_channels <= 0) throw ShapeError("RegNetConfig: channel counts must be positive");
    if (!(cfg.output_alpha > 0.0) || cfg.output_exponent < 1) throw ShapeError("RegNetConfig: invalid output smoothing");
    RegNetParams p;
    p.config = cfg;
    p.enc1 = nn::Conv2d(2, cfg.width, 2);
    p.enc2 = nn::Conv2d(cfg.width, cfg.latent_channels, 2);
    p.dec1 = nn::Conv2d(cfg.latent_channels, cfg.width, 1);
    p.dec2 = nn::Conv2d(cfg.width, 2, 1);
    init_conv(p.enc1, rng);
    init_conv(p.enc2, rng);
    init_conv(p.dec1, rng);
    init_conv(p.dec2, rng, cfg.output_init_scale);
    return p;
}

RegNetParams RegNetParams::zeros_like() const {
    RegNetParams z = *this;
    z.visit([](const std::string &, std::span<double> v, const auto &, bool) { std::fill(v.begin(), v.end(), 0.0); });
    return z;
}

FourierMultiplier output_smoothing(const RegNetConfig &cfg, const GridSpec &image_grid) {
    return FourierMultiplier(image_grid, cfg.output_alpha, cfg.output_exponent);
}

LatentFeature encode(const ScalarField &source, const ScalarField &target, const RegNetParams &params,
                     EncodeRecord *record) {
    require_same_grid(source.grid(), target.grid(), "encode");
    const GridSpec &g = source.grid();
    if (g.ndim() != 2) throw ShapeError("encode: only 2D images are supported");
    for (int a = 0; a < 2; ++a) {
        if (g.dim(a) % kLatentFactor != 0) {
            throw ShapeError("encode: image dims " + g.describe() + " must be divisible by 4");
        }
    }
    MultiField input(g, 2);
    std::copy(source.values().begin(), source.values().end(), input.channel(0).begin());
    std::copy(target.values().begin(), target.values().end(), input.channel(1).begin());

    MultiField pre1 = nn::conv2d(params.enc1, input);
    MultiField h1 = nn::gelu(pre1);
    MultiField pre2 = nn::conv2d(params.enc2, h1);
    LatentFeature z = nn::gelu(pre2);
    if (record) *record = EncodeRecord{std::move(input), std::move(pre1), std::move(h1), std::move(pre2)};
    return z;
}

VectorField decode(const LatentFeature &z, const RegNetParams &params, DecodeRecord *record) {
    if (z.channels() != params.config.latent_channels) {
        throw ShapeError("decode: latent has " + std::to_string(z.channels()) + " channels, expected " +
                         std::to_string(params.config.latent_channels));
    }
    MultiField up1 = nn::upsample2x(z);
    MultiField pre1 = nn::conv2d(params.dec1, up1);
    MultiField h1 = nn::gelu(pre1);
    MultiField up2 = nn::upsample2x(h1);
    const FourierMultiplier smoothing = output_smoothing(params.config, up2.grid());
    VectorField v(smooth(nn::conv2d(params.dec2, up2), smoothing));
    if (record) *record = DecodeRecord{z, std::move(up1), std::move(pre1), std::move(h1), std::move(up2)};
    return v;
}

LatentFeature decode_backward(const DecodeRecord &rec, const RegNetParams &params, const VectorField &upstream,
                              RegNetParams &grads) {
    // K is self-adjoint.
    const MultiField g_raw = smooth(upstream, output_smoothing(params.config, rec.up2.grid()));
    MultiField g_up2 = nn::conv2d_backward(params.dec2, rec.up2, g_raw, grads.dec2);
    MultiField g_h1 = nn::upsample2x_backward(g_up2, rec.h1.grid());
    MultiField g_pre1 = nn::gelu_backward(rec.pre1, g_h1);
    MultiField g_up1 = nn::conv2d_backward(params.dec1, rec.up1, g_pre1, grads.dec1);
    return nn::upsample2x_backward(g_up1, rec.z.grid());
}

MultiField encode_backward(const EncodeRecord &rec, const RegNetParams &params, const LatentFeature &upstream,
                           RegNetParams &grads) {
    MultiField g_pre2 = nn::gelu_backward(rec.pre2, upstream);
    MultiField g_h1 = nn::conv2d_backward(params.enc2, rec.h1, g_pre2, grads.enc2);
    MultiField g_pre1 = nn::gelu_backward(rec.pre1, g_h1);
    return nn::conv2d_backward(params.enc1, rec.input, g_pre1, grads.enc1);
}

} // namespace geoflow
