#include "geoflow/gno.hpp"

#include <cmath>
#include <optional>

#include "geoflow/errors.hpp"

namespace geoflow {

namespace {

/// Channels [0, C_z) carry z and [C_z, 2 C_z) carry -z. Since GeLU(x) - GeLU(-x) = x, a mixer
/// that forms (a - b, b - a) from the pair keeps every sub-layer linear, and a spectral kernel of
/// A(k) - 1 on the same pattern cancels the smoothing on the retained modes.
void add_identity(GnoParams &p, const GridSpec *latent_grid) {
    const int cz = p.config.latent_channels;
    const int ch = p.config.hidden_channels;
    for (int c = 0; c < cz; ++c) {
        p.lift.weight[c * cz + c] += 1.0;
        p.lift.weight[(c + cz) * cz + c] -= 1.0;
        p.project.weight[c * ch + c] += 0.5;
        p.project.weight[c * ch + c + cz] -= 0.5;
    }
    std::optional<FourierMultiplier> smoothing;
    if (latent_grid) smoothing.emplace(gno_smoothing(p.config, *latent_grid));
    for (GnoLayer &layer : p.layers) {
        for (int c = 0; c < cz; ++c) {
            layer.mix.weight[c * ch + c] += 1.0;
            layer.mix.weight[c * ch + c + cz] -= 1.0;
            layer.mix.weight[(c + cz) * ch + c] -= 1.0;
            layer.mix.weight[(c + cz) * ch + c + cz] += 1.0;
        }
        if (!smoothing) continue;
        const auto &modes = layer.kernel.modes();
        for (std::size_t f = 0; f < layer.kernel.frequency_count(); ++f) {
            const auto k = layer.kernel.frequency(f);
            double gain = smoothing->symbol(k) - 1.0;
            // Only the real part is kept, so a mode whose conjugate lies outside the box needs
            // twice the weight. At k_max = n/2 the conjugate of -k_max aliases back into the box.
            for (int a = 0; a < layer.kernel.ndim(); ++a) {
                if (k[a] == -modes[a] && 2 * modes[a] != latent_grid->dim(a)) {
                    gain *= 2.0;
                    break;
                }
            }
            for (int c = 0; c < cz; ++c) {
                layer.kernel.weight(f, c, c) += gain;
                layer.kernel.weight(f, c, c + cz) -= gain;
                layer.kernel.weight(f, c + cz, c) -= gain;
                layer.kernel.weight(f, c + cz, c + cz) += gain;
            }
        }
    }
}

} // namespace

GnoParams GnoParams::init(const GnoConfig &cfg, std::mt19937_64 &rng, const GridSpec *latent_grid) {
    if (cfg.latent_channels <= 0 || cfg.hidden_channels <= 0) throw ShapeError("GnoConfig: channel counts must be positive");
    if (cfg.layers < 1) throw ShapeError("GnoConfig: at least one evolution layer");
    if (cfg.modes < 1) throw ShapeError("GnoConfig: at least one retained mode");
    if (!(cfg.init_noise >= 0.0)) throw ShapeError("GnoConfig: init noise must be >= 0");
    const bool identity = cfg.identity_init && cfg.hidden_channels >= 2 * cfg.latent_channels;
    const double scale = identity ? cfg.init_noise : 1.0;
    GnoParams p;
    p.config = cfg;
    const auto init_linear = [&rng, scale](nn::Linear &l) {
        const double bound = scale / std::sqrt(static_cast<double>(l.in));
        nn::init_uniform(l.weight, bound, rng);
        nn::init_uniform(l.bias, bound, rng);
    };
    p.lift = nn::Linear(cfg.latent_channels, cfg.hidden_channels);
    init_linear(p.lift);
    const std::array<int, 3> modes{cfg.modes, cfg.modes, 1};
    const double kbound = scale / cfg.hidden_channels;
    std::uniform_real_distribution<double> dist(-kbound, kbound);
    for (int j = 0; j < cfg.layers; ++j) {
        GnoLayer layer{nn::Linear(cfg.hidden_channels, cfg.hidden_channels),
                       SpectralKernel(cfg.hidden_channels, cfg.hidden_channels, 2, modes)};
        init_linear(layer.mix);
        for (Complex &w : layer.kernel.weights()) w = Complex(dist(rng), dist(rng));
        p.layers.push_back(std::move(layer));
    }
    p.project = nn::Linear(cfg.hidden_channels, cfg.latent_channels);
    init_linear(p.project);
    if (identity) add_identity(p, latent_grid);
    return p;
}

GnoParams GnoParams::zeros_like() const {
    GnoParams z = *this;
    z.visit([](const std::string &, std::span<double> v, const auto &, bool) { std::fill(v.begin(), v.end(), 0.0); });
    return z;
}

FourierMultiplier gno_smoothing(const GnoConfig &cfg, const GridSpec &latent_grid) {
    return FourierMultiplier(latent_grid, cfg.sigma_alpha, cfg.sigma_exponent, static_cast<double>(kLatentFactor));
}

MultiField lift(const LatentFeature &z, const GnoParams &params) { return nn::linear(params.lift, z); }

MultiField evolution_step(const MultiField &u, const GnoLayer &layer, const FourierMultiplier &smoothing,
                          EvolutionRecord *record) {
    MultiField pre = nn::linear(layer.mix, u);
    pre += spectral_conv(u, layer.kernel);
    MultiField out = smooth(nn::gelu(pre), smoothing);
    if (record) *record = EvolutionRecord{u, std::move(pre)};
    return out;
}

LatentFeature advance(const LatentFeature &z, const GnoParams &params, const FourierMultiplier &smoothing,
                      AdvanceRecord *record) {
    MultiField u = lift(z, params);
    AdvanceRecord rec;
    if (record) {
        rec.z = z;
        rec.lifted = u;
        rec.layers.resize(params.layers.size());
    }
    for (std::size_t j = 0; j < params.layers.size(); ++j) {
        u = evolution_step(u, params.layers[j], smoothing, record ? &rec.layers[j] : nullptr);
    }
    LatentFeature next = nn::linear(params.project, u);
    if (record) {
        rec.hidden = std::move(u);
        *record = std::move(rec);
    }
    return next;
}

LatentFeature advance(const LatentFeature &z, const GnoParams &params) {
    return advance(z, params, gno_smoothing(params.config, z.grid()));
}

std::vector<LatentFeature> rollout(const LatentFeature &z0, const GnoParams &params, int steps,
                                   std::vector<AdvanceRecord> *records) {
    if (steps < 0) throw std::invalid_argument("rollout: steps must be >= 0");
    const FourierMultiplier smoothing = gno_smoothing(params.config, z0.grid());
    std::vector<LatentFeature> zs;
    zs.reserve(steps + 1);
    zs.push_back(z0);
    if (records) records->assign(steps, AdvanceRecord{});
    for (int t = 0; t < steps; ++t) {
        LatentFeature next = advance(zs.back(), params, smoothing, records ? &(*records)[t] : nullptr);
        if (!next.all_finite()) throw BlowUpError("rollout: non-finite latent", t + 1);
        zs.push_back(std::move(next));
    }
    return zs;
}

LatentFeature advance_backward(const AdvanceRecord &rec, const GnoParams &params,
                               const FourierMultiplier &smoothing, const LatentFeature &upstream, GnoParams &grads) {
    MultiField g = nn::linear_backward(params.project, rec.hidden, upstream, grads.project);
    for (std::size_t j = params.layers.size(); j-- > 0;) {
        const GnoLayer &layer = params.layers[j];
        const EvolutionRecord &er = rec.layers[j];
        // K is self-adjoint.
        MultiField g_pre = nn::gelu_backward(er.pre, smooth(g, smoothing));
        MultiField g_in = nn::linear_backward(layer.mix, er.input, g_pre, grads.layers[j].mix);
        g_in += spectral_conv_backward(er.input, layer.kernel, g_pre, grads.layers[j].kernel);
        g = std::move(g_in);
    }
    return nn::linear_backward(params.lift, rec.z, g, grads.lift);
}

LatentFeature rollout_backward(const std::vector<AdvanceRecord> &records, const GnoParams &params,
                               std::span<const LatentFeature> upstream, GnoParams &grads) {
    if (upstream.size() != records.size() + 1) {
        throw std::invalid_argument("rollout_backward: need one upstream sensitivity per latent");
    }
    const FourierMultiplier smoothing = gno_smoothing(params.config, upstream.front().grid());
    LatentFeature bar = upstream.back();
    for (std::size_t t = records.size(); t-- > 0;) {
        LatentFeature prev = advance_backward(records[t], params, smoothing, bar, grads);
        prev += upstream[t];
        bar = std::move(prev);
    }
    return bar;
}

} // namespace geoflow
