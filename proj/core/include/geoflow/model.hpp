#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoflow/epdiff.hpp"
#include "geoflow/gno.hpp"
#include "geoflow/regnet.hpp"

namespace geoflow {

struct ModelConfig {
    RegNetConfig regnet;
    GnoConfig gno;
    /// Time discretization and metric; `shooting.steps` is the rollout length.
    ShootingConfig shooting;

    void validate() const;
};

/// Registration network plus geodesic neural operator.
struct Model {
    ModelConfig config;
    RegNetParams regnet;
    GnoParams gno;

    /// `image_grid`, when known, tunes the GNO identity init to the latent grid it will see.
    static Model init(const ModelConfig &cfg, std::uint64_t seed, const GridSpec *image_grid = nullptr);
    Model zeros_like() const;

    template <class F>
    void visit(F &&f) {
        regnet.visit(f);
        gno.visit(f);
    }
    template <class F>
    void visit(F &&f) const {
        regnet.visit(f);
        gno.visit(f);
    }

    std::size_t parameter_count() const;
    /// All parameters concatenated in visit order.
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> values);
};

/// Parameters touched by an update.
enum class ParamGroup { All, RegNet, Gno };

/// Adam with decoupled weight decay.
class AdamW {
public:
    struct Options {
        double lr = 1e-3;
        double weight_decay = 1e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    AdamW(const Model &model, Options opts);

    void step(Model &model, const Model &grads, ParamGroup group = ParamGroup::All);
    std::int64_t steps_taken() const noexcept { return t_; }

private:
    Options opts_;
    std::int64_t t_ = 0;
    std::vector<double> m_, v_;
};

} // namespace geoflow
