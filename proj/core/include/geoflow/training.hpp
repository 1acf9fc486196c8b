#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "geoflow/epdiff.hpp"
#include "geoflow/model.hpp"

namespace geoflow {

struct TrainConfig {
    double lambda = 0.03;
    double eta = 1.0;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    int epochs = 50;
    int batch = 8;
    std::uint64_t seed = 0;
    /// Alternate GNO-only and registration-network-only epochs instead of joint steps.
    bool alternating = false;
    int threads = 1;

    void validate() const;
};

/// One registration pair.
struct Sample {
    ScalarField source;
    ScalarField target;
};

struct LossTerms {
    double match = 0.0;    ///< lambda * ||S(phi_tau) - T||^2
    double reg = 0.0;      ///< 1/2 (L v0, v0)
    double geodesic = 0.0; ///< eta * geodesic_loss
    double total() const noexcept { return match + reg + geodesic; }
    LossTerms &operator+=(const LossTerms &o) noexcept;
    LossTerms &operator*=(double s) noexcept;
};

/// Mean over t = 1..tau of the cell-volume weighted squared distance between pred[t] and
/// oracle[t - 1]. `pred` holds v_0..v_tau, `oracle` holds v^_1..v^_tau.
double geodesic_loss(std::span<const VectorField> pred, std::span<const VectorField> oracle);

/// v^_1..v^_tau shot from v0. Throws BlowUpError if the solver diverges.
std::vector<VectorField> make_oracle(const VectorField &v0, const ShootingConfig &cfg);

struct JointLoss {
    LossTerms terms;  ///< summed over the samples that were evaluated
    int evaluated = 0;
    int skipped = 0;  ///< samples dropped because their oracle blew up
};

/// Sum over the batch of lambda SSD(S(phi_tau), T) + 1/2 (L v0, v0) + eta geodesic_loss.
/// When `grads` is given, adds the exact parameter gradient of that sum into it. `oracles`, when
/// given, replaces on-the-fly oracle generation (one v^_1..v^_tau list per sample).
JointLoss joint_loss(std::span<const Sample> batch, const Model &model, const TrainConfig &cfg,
                     Model *grads = nullptr, const std::vector<std::vector<VectorField>> *oracles = nullptr);

struct EpochLog {
    int epoch = 0;        ///< 1-based
    LossTerms train;      ///< per-sample mean during the epoch
    LossTerms validation; ///< per-sample mean after the epoch; equals `train` without a validation set
    int skipped = 0;
};

struct TrainResult {
    Model best;
    Model last;
    int best_epoch = 0;
    std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog &, const Model &)>;
using WarningCallback = std::function<void(const std::string &)>;

/// AdamW on batch-mean gradients of joint_loss. The same seed reproduces the run.
/// Throws TrainingError on a non-finite loss or a diverging rollout.
TrainResult train(std::span<const Sample> train_set, std::span<const Sample> validation_set, const Model &initial,
                  const TrainConfig &cfg, const EpochCallback &on_epoch = {}, const WarningCallback &warn = {});

struct Prediction {
    Trajectory trajectory; ///< decoded velocities, integrated transforms, deformed sources
    ScalarField deformed;  ///< S(phi_tau)
};

/// encode -> rollout -> decode every step -> integrate_flow -> warp. Never solves EPDiff.
Prediction predict(const ScalarField &source, const ScalarField &target, const Model &model);

} // namespace geoflow
