#pragma once

#include <array>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "geoflow/nn.hpp"
#include "geoflow/regnet.hpp"
#include "geoflow/spectral.hpp"

namespace geoflow {

struct GnoConfig {
    int latent_channels = 8; ///< C_z
    int hidden_channels = 16; ///< C_h
    int layers = 4;           ///< J evolution sub-layers per time step
    int modes = 2;            ///< retained Fourier modes per axis (k_max)
    double sigma_alpha = 3.0; ///< smoothing operator of the activation
    int sigma_exponent = 3;
    /// Start from a rollout that carries z_t forward unchanged on the retained modes (requires
    /// hidden_channels >= 2 * latent_channels); otherwise uniform random init.
    bool identity_init = true;
    /// Relative size of the random perturbation added to the identity init.
    double init_noise = 0.0;
};

/// One sub-layer: u -> K(GeLU(W u + b + H * u)).
struct GnoLayer {
    nn::Linear mix;
    SpectralKernel kernel;
};

/// Lift P, evolution sub-layers, projection Q. Shared by every time step of a rollout.
struct GnoParams {
    GnoConfig config;
    nn::Linear lift;
    std::vector<GnoLayer> layers;
    nn::Linear project;

    /// `latent_grid` sets the frequencies at which the identity init cancels the smoothing of
    /// the activation; without it only the pointwise part of the identity is built.
    static GnoParams init(const GnoConfig &cfg, std::mt19937_64 &rng, const GridSpec *latent_grid = nullptr);
    GnoParams zeros_like() const;

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
        const auto linear = [&f](const std::string &name, auto &layer) {
            f(name + ".weight", std::span(layer.weight),
              std::vector<std::size_t>{std::size_t(layer.out), std::size_t(layer.in)}, false);
            f(name + ".bias", std::span(layer.bias), std::vector<std::size_t>{std::size_t(layer.out)}, false);
        };
        linear("gno.lift", self.lift);
        for (std::size_t j = 0; j < self.layers.size(); ++j) {
            auto &layer = self.layers[j];
            const std::string prefix = "gno.layer" + std::to_string(j);
            linear(prefix + ".mix", layer.mix);
            auto w = layer.kernel.weights();
            using Scalar = std::conditional_t<std::is_const_v<Self>, const double, double>;
            std::vector<std::size_t> shape{layer.kernel.frequency_count(), std::size_t(layer.kernel.channels_out()),
                                           std::size_t(layer.kernel.channels_in())};
            f(prefix + ".kernel", std::span<Scalar>(reinterpret_cast<Scalar *>(w.data()), 2 * w.size()), shape, true);
        }
        linear("gno.project", self.project);
    }
};

/// Smoothing multiplier of the activation on a latent grid (cell size = latent factor).
FourierMultiplier gno_smoothing(const GnoConfig &cfg, const GridSpec &latent_grid);

/// P applied at every latent site.
MultiField lift(const LatentFeature &z, const GnoParams &params);

struct EvolutionRecord {
    MultiField input, pre;
};

/// sigma(W u + b + H * u) with sigma = K o GeLU.
MultiField evolution_step(const MultiField &u, const GnoLayer &layer, const FourierMultiplier &smoothing,
                          EvolutionRecord *record = nullptr);

struct AdvanceRecord {
    LatentFeature z;
    MultiField lifted;
    std::vector<EvolutionRecord> layers;
    MultiField hidden;
};

/// z_{t+1} = Q(sigma_J(...sigma_1(P z_t))).
LatentFeature advance(const LatentFeature &z, const GnoParams &params, const FourierMultiplier &smoothing,
                      AdvanceRecord *record = nullptr);
LatentFeature advance(const LatentFeature &z, const GnoParams &params);

/// z_0..z_steps with tied weights. Throws BlowUpError naming the step on a non-finite latent.
std::vector<LatentFeature> rollout(const LatentFeature &z0, const GnoParams &params, int steps,
                                   std::vector<AdvanceRecord> *records = nullptr);

/// Reverse mode of one advance; accumulates into `grads`, returns the sensitivity on z_t.
LatentFeature advance_backward(const AdvanceRecord &record, const GnoParams &params,
                               const FourierMultiplier &smoothing, const LatentFeature &upstream, GnoParams &grads);

/// Reverse mode of rollout given sensitivities on z_0..z_T; returns the total sensitivity on z_0.
LatentFeature rollout_backward(const std::vector<AdvanceRecord> &records, const GnoParams &params,
                               std::span<const LatentFeature> upstream, GnoParams &grads);

} // namespace geoflow
