#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geoflow/field.hpp"
#include "geoflow/nn.hpp"
#include "geoflow/spectral.hpp"

namespace geoflow {

/// Latent code z on a grid 4x coarser than the images. One channel per latent feature.
using LatentFeature = MultiField;

/// Downsampling factor between image and latent grids.
inline constexpr int kLatentFactor = 4;

struct RegNetConfig {
    int width = 16;          ///< channels of the intermediate layers
    int latent_channels = 8; ///< C_z
    /// Multiplies the default init bound of the last decoder layer so that an untrained
    /// network starts near the zero velocity.
    double output_init_scale = 1e-2;
    /// The decoder ends with the smoothing K of a (-alpha Lap + Id)^c metric on the image grid,
    /// so the convolutional part predicts a momentum.
    double output_alpha = 3.0;
    int output_exponent = 3;
};

/// Encoder: two stride-2 3x3 convolutions with GeLU, (S, T) -> z.
/// Decoder: two (bilinear x2 upsample, 3x3 convolution) stages, GeLU between, then the output
/// smoothing K.
struct RegNetParams {
    RegNetConfig config;
    nn::Conv2d enc1, enc2, dec1, dec2;

    static RegNetParams init(const RegNetConfig &cfg, std::mt19937_64 &rng);
    RegNetParams zeros_like() const;

    template <class F>
    void visit(F &&f) {
        visit_impl(*this, f);
    }
    template <class F>
    void visit(F &&f) const {
        visit_impl(*this, f);
    }

private:
    template <class Self, class F>
    static void visit_impl(Self &self, F &f) {
        const auto conv = [&f](const char *name, auto &layer) {
            f(std::string(name) + ".weight", std::span(layer.weight),
              std::vector<std::size_t>{std::size_t(layer.out), std::size_t(layer.in), 3, 3}, false);
            f(std::string(name) + ".bias", std::span(layer.bias), std::vector<std::size_t>{std::size_t(layer.out)},
              false);
        };
        conv("regnet.enc1", self.enc1);
        conv("regnet.enc2", self.enc2);
        conv("regnet.dec1", self.dec1);
        conv("regnet.dec2", self.dec2);
    }
};

struct EncodeRecord {
    MultiField input, pre1, h1, pre2;
};

struct DecodeRecord {
    MultiField z, up1, pre1, h1, up2;
};

/// The fixed output smoothing of the decoder on an image grid.
FourierMultiplier output_smoothing(const RegNetConfig &cfg, const GridSpec &image_grid);

/// z = encoder(S, T). Grids must match and be 2D with dims divisible by 4.
LatentFeature encode(const ScalarField &source, const ScalarField &target, const RegNetParams &params,
                     EncodeRecord *record = nullptr);

/// Full-resolution velocity field from a latent code.
VectorField decode(const LatentFeature &z, const RegNetParams &params, DecodeRecord *record = nullptr);

/// Accumulates parameter sensitivities into `grads`; returns the sensitivity on z.
LatentFeature decode_backward(const DecodeRecord &record, const RegNetParams &params, const VectorField &upstream,
                              RegNetParams &grads);

/// Accumulates parameter sensitivities into `grads`; returns the sensitivity on the stacked
/// (S, T) input.
MultiField encode_backward(const EncodeRecord &record, const RegNetParams &params, const LatentFeature &upstream,
                           RegNetParams &grads);

} // namespace geoflow
