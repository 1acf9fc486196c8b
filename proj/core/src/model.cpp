#include "geoflow/model.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "geoflow/errors.hpp"

namespace geoflow {

void ModelConfig::validate() const {
    if (regnet.width < 1 || regnet.latent_channels < 1) throw ShapeError("ModelConfig: regnet channels must be positive");
    if (regnet.latent_channels != gno.latent_channels) {
        throw ShapeError("ModelConfig: regnet and gno latent channel counts differ");
    }
    if (gno.layers < 1) throw ShapeError("ModelConfig: gno needs at least one layer");
    if (gno.modes < 1) throw ShapeError("ModelConfig: gno needs at least one mode");
    shooting.validate();
}

Model Model::init(const ModelConfig &cfg, std::uint64_t seed, const GridSpec *image_grid) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    Model m;
    m.config = cfg;
    m.regnet = RegNetParams::init(cfg.regnet, rng);
    std::optional<GridSpec> latent;
    if (image_grid) latent = image_grid->coarsened(kLatentFactor);
    m.gno = GnoParams::init(cfg.gno, rng, latent ? &*latent : nullptr);
    return m;
}

Model Model::zeros_like() const {
    Model z;
    z.config = config;
    z.regnet = regnet.zeros_like();
    z.gno = gno.zeros_like();
    return z;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    visit([&n](const std::string &, auto values, const auto &, bool) { n += values.size(); });
    return n;
}

std::vector<double> Model::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    visit([&out](const std::string &, auto values, const auto &, bool) { out.insert(out.end(), values.begin(), values.end()); });
    return out;
}

void Model::unflatten(std::span<const double> values) {
    if (values.size() != parameter_count()) throw ShapeError("Model::unflatten: parameter count mismatch");
    std::size_t pos = 0;
    visit([&](const std::string &, std::span<double> dst, const auto &, bool) {
        std::copy_n(values.begin() + pos, dst.size(), dst.begin());
        pos += dst.size();
    });
}

AdamW::AdamW(const Model &model, Options opts) : opts_(opts) {
    if (!(opts.lr > 0.0)) throw std::invalid_argument("AdamW: lr must be > 0");
    if (opts.weight_decay < 0.0) throw std::invalid_argument("AdamW: weight decay must be >= 0");
    const std::size_t n = model.parameter_count();
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
}

void AdamW::step(Model &model, const Model &grads, ParamGroup group) {
    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    const std::vector<double> g = grads.flatten();
    if (g.size() != m_.size()) throw ShapeError("AdamW: gradient does not match the model");
    std::vector<double> p = model.flatten();

    std::size_t regnet_end = 0;
    model.regnet.visit([&regnet_end](const std::string &, auto values, const auto &, bool) { regnet_end += values.size(); });
    const std::size_t lo = group == ParamGroup::Gno ? regnet_end : 0;
    const std::size_t hi = group == ParamGroup::RegNet ? regnet_end : p.size();

    for (std::size_t i = lo; i < hi; ++i) {
        m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * g[i];
        v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * g[i] * g[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        p[i] -= opts_.lr * (mhat / (std::sqrt(vhat) + opts_.eps) + opts_.weight_decay * p[i]);
    }
    model.unflatten(p);
}

} // namespace geoflow
