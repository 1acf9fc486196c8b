#include "geoflow/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "geoflow/errors.hpp"
#include "geoflow/field_ops.hpp"

namespace geoflow {
namespace {

double ssd(const ScalarField &a, const ScalarField &b) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.points(); ++p) {
        const double r = a[p] - b[p];
        s += r * r;
    }
    return s * a.grid().cell_volume();
}

struct SampleResult {
    LossTerms terms;
    bool skipped = false;
    std::string warning;
    std::optional<Model> grads;
};

SampleResult run_sample(const Sample &s, const Model &model, const TrainConfig &cfg, bool want_grads,
                        const std::vector<VectorField> *oracle_in) {
    require_same_grid(s.source.grid(), s.target.grid(), "joint_loss");
    const GridSpec &g = s.source.grid();
    const ShootingConfig &sc = model.config.shooting;
    const int tau = sc.steps;
    const double dt = sc.step_size();
    const double cv = g.cell_volume();
    const FourierMultiplier mult = sc.multiplier(g);

    EncodeRecord erec;
    const LatentFeature z0 = encode(s.source, s.target, model.regnet, want_grads ? &erec : nullptr);
    std::vector<AdvanceRecord> arecs;
    const std::vector<LatentFeature> zs = rollout(z0, model.gno, tau, want_grads ? &arecs : nullptr);
    std::vector<VectorField> vs;
    std::vector<DecodeRecord> drecs(want_grads ? zs.size() : 0);
    vs.reserve(zs.size());
    for (std::size_t t = 0; t < zs.size(); ++t) vs.push_back(decode(zs[t], model.regnet, want_grads ? &drecs[t] : nullptr));

    SampleResult res;
    std::vector<VectorField> oracle;
    if (oracle_in) {
        if (oracle_in->size() != static_cast<std::size_t>(tau)) {
            throw std::invalid_argument("joint_loss: oracle length does not match the rollout");
        }
        oracle = *oracle_in;
    } else {
        try {
            oracle = make_oracle(vs[0], sc);
        } catch (const BlowUpError &e) {
            res.skipped = true;
            res.warning = std::string("oracle diverged, sample skipped: ") + e.what();
            return res;
        }
    }

    const std::span<const VectorField> flow_v = std::span(vs).first(tau);
    const std::vector<Transform> transforms = integrate_flow(flow_v, dt);
    const ScalarField warped = warp(s.source, transforms.back());

    res.terms.match = cfg.lambda * ssd(warped, s.target);
    res.terms.reg = 0.5 * kinetic_energy(vs[0], mult);
    res.terms.geodesic = tau > 0 ? cfg.eta * geodesic_loss(vs, oracle) : 0.0;
    if (!want_grads) return res;

    // Sensitivities on v_0..v_tau.
    std::vector<VectorField> vbar;
    if (tau > 0) {
        ScalarField resid = warped;
        resid -= s.target;
        resid *= 2.0 * cfg.lambda * cv;
        const VectorField ubar = warp_displacement_vjp(s.source, transforms.back(), resid);
        vbar = integrate_flow_vjp(flow_v, transforms, dt, ubar);
    }
    vbar.emplace_back(g);
    vbar[0].axpy(cv, apply_L(vs[0], mult));
    const double wgeo = tau > 0 ? 2.0 * cfg.eta * cv / tau : 0.0;
    for (int t = 1; t <= tau; ++t) {
        VectorField diff = vs[t];
        diff -= oracle[t - 1];
        vbar[t].axpy(wgeo, diff);
    }

    Model grads = model.zeros_like();
    std::vector<LatentFeature> zbar;
    zbar.reserve(vs.size());
    for (std::size_t t = 0; t < vs.size(); ++t) zbar.push_back(decode_backward(drecs[t], model.regnet, vbar[t], grads.regnet));
    const LatentFeature z0bar = rollout_backward(arecs, model.gno, zbar, grads.gno);
    encode_backward(erec, model.regnet, z0bar, grads.regnet);
    res.grads = std::move(grads);
    return res;
}

void accumulate(Model &dst, const Model &src) {
    std::vector<double> d = dst.flatten();
    const std::vector<double> s = src.flatten();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
    dst.unflatten(d);
}

void scale(Model &m, double s) {
    std::vector<double> d = m.flatten();
    for (double &x : d) x *= s;
    m.unflatten(d);
}

std::vector<SampleResult> run_batch(std::span<const Sample> batch, const Model &model, const TrainConfig &cfg,
                                    bool want_grads, const std::vector<std::vector<VectorField>> *oracles) {
    std::vector<SampleResult> results(batch.size());
    const int workers = std::clamp<int>(cfg.threads, 1, static_cast<int>(std::max<std::size_t>(batch.size(), 1)));
    const auto work = [&](int w, std::exception_ptr &err) {
        try {
            for (std::size_t i = w; i < batch.size(); i += workers) {
                results[i] = run_sample(batch[i], model, cfg, want_grads, oracles ? &(*oracles)[i] : nullptr);
            }
        } catch (...) {
            err = std::current_exception();
        }
    };
    std::vector<std::exception_ptr> errors(workers);
    if (workers == 1) {
        work(0, errors[0]);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, std::ref(errors[w]));
        for (auto &t : pool) t.join();
    }
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

std::string describe(const LossTerms &t) {
    std::ostringstream os;
    os << "match=" << t.match << " reg=" << t.reg << " geodesic=" << t.geodesic;
    return os.str();
}

} // namespace

void TrainConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("TrainConfig: lambda must be > 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("TrainConfig: eta must be > 0");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: weight decay must be >= 0");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
    if (threads < 1) throw std::invalid_argument("TrainConfig: threads must be >= 1");
}

LossTerms &LossTerms::operator+=(const LossTerms &o) noexcept {
    match += o.match;
    reg += o.reg;
    geodesic += o.geodesic;
    return *this;
}

LossTerms &LossTerms::operator*=(double s) noexcept {
    match *= s;
    reg *= s;
    geodesic *= s;
    return *this;
}

double geodesic_loss(std::span<const VectorField> pred, std::span<const VectorField> oracle) {
    if (pred.size() != oracle.size() + 1) {
        throw std::invalid_argument("geodesic_loss: need v_0..v_tau predictions for v^_1..v^_tau oracles");
    }
    if (oracle.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t t = 0; t < oracle.size(); ++t) {
        require_same_grid(pred[t + 1].grid(), oracle[t].grid(), "geodesic_loss");
        VectorField d = pred[t + 1];
        d -= oracle[t];
        total += d.sum_squares() * d.grid().cell_volume();
    }
    return total / static_cast<double>(oracle.size());
}

std::vector<VectorField> make_oracle(const VectorField &v0, const ShootingConfig &cfg) {
    std::vector<VectorField> vs = shoot_velocities(v0, cfg, cfg.multiplier(v0.grid()));
    vs.erase(vs.begin());
    return vs;
}

JointLoss joint_loss(std::span<const Sample> batch, const Model &model, const TrainConfig &cfg, Model *grads,
                     const std::vector<std::vector<VectorField>> *oracles) {
    if (batch.empty()) throw std::invalid_argument("joint_loss: empty batch");
    if (oracles && oracles->size() != batch.size()) throw std::invalid_argument("joint_loss: one oracle per sample");
    const std::vector<SampleResult> results = run_batch(batch, model, cfg, grads != nullptr, oracles);
    JointLoss out;
    for (const SampleResult &r : results) {
        if (r.skipped) {
            ++out.skipped;
            continue;
        }
        ++out.evaluated;
        out.terms += r.terms;
        if (grads) accumulate(*grads, *r.grads);
    }
    return out;
}

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> validation_set, const Model &initial,
                  const TrainConfig &cfg, const EpochCallback &on_epoch, const WarningCallback &warn) {
    cfg.validate();
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");

    TrainResult out;
    out.last = initial;
    Model &model = out.last;
    AdamW opt(model, {.lr = cfg.lr, .weight_decay = cfg.weight_decay});
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const ParamGroup group =
            !cfg.alternating ? ParamGroup::All : (epoch % 2 == 1 ? ParamGroup::Gno : ParamGroup::RegNet);
        EpochLog log;
        log.epoch = epoch;
        int evaluated = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            std::vector<Sample> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
            std::vector<SampleResult> results;
            try {
                results = run_batch(batch, model, cfg, true, nullptr);
            } catch (const BlowUpError &e) {
                throw TrainingError("train: non-finite forward pass at epoch " + std::to_string(epoch) + ": " + e.what());
            }
            Model grads = model.zeros_like();
            int used = 0;
            for (std::size_t i = 0; i < results.size(); ++i) {
                const SampleResult &r = results[i];
                if (r.skipped) {
                    ++log.skipped;
                    if (warn) warn("epoch " + std::to_string(epoch) + ", sample " + std::to_string(order[start + i]) + ": " + r.warning);
                    continue;
                }
                if (!std::isfinite(r.terms.total())) {
                    throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                                        std::to_string(order[start + i]) + " (" + describe(r.terms) + ")");
                }
                log.train += r.terms;
                accumulate(grads, *r.grads);
                ++used;
            }
            if (used == 0) continue;
            evaluated += used;
            scale(grads, 1.0 / used);
            opt.step(model, grads, group);
        }
        if (evaluated > 0) log.train *= 1.0 / evaluated;

        if (validation_set.empty()) {
            log.validation = log.train;
        } else {
            const JointLoss v = joint_loss(validation_set, model, cfg);
            log.skipped += v.skipped;
            if (v.evaluated > 0) {
                log.validation = v.terms;
                log.validation *= 1.0 / v.evaluated;
            }
        }
        if (!std::isfinite(log.validation.total())) {
            throw TrainingError("train: non-finite validation loss at epoch " + std::to_string(epoch) + " (" +
                                describe(log.validation) + ")");
        }
        if (log.validation.total() < best) {
            best = log.validation.total();
            out.best = model;
            out.best_epoch = epoch;
        }
        out.log.push_back(log);
        if (on_epoch) on_epoch(log, model);
    }
    if (out.best_epoch == 0) {
        out.best = model;
        out.best_epoch = cfg.epochs;
    }
    return out;
}

Prediction predict(const ScalarField &source, const ScalarField &target, const Model &model) {
    require_same_grid(source.grid(), target.grid(), "predict");
    const ShootingConfig &sc = model.config.shooting;
    const LatentFeature z0 = encode(source, target, model.regnet);
    const std::vector<LatentFeature> zs = rollout(z0, model.gno, sc.steps);
    Prediction p;
    p.trajectory.velocities.reserve(zs.size());
    for (const LatentFeature &z : zs) p.trajectory.velocities.push_back(decode(z, model.regnet));
    p.trajectory.transforms =
        integrate_flow(std::span<const VectorField>(p.trajectory.velocities).first(sc.steps), sc.step_size());
    p.trajectory.images.reserve(p.trajectory.transforms.size());
    for (const Transform &phi : p.trajectory.transforms) p.trajectory.images.push_back(warp(source, phi));
    p.deformed = p.trajectory.images.back();
    return p;
}

} // namespace geoflow
