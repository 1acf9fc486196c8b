#include "geoflow/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "geoflow/atomic_file.hpp"
#include "geoflow/checkpoint.hpp"
#include "geoflow/data_io.hpp"
#include "geoflow/epdiff.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/field_io.hpp"
#include "geoflow/field_ops.hpp"
#include "geoflow/image_export.hpp"
#include "geoflow/lddmm.hpp"
#include "geoflow/metrics.hpp"
#include "geoflow/training.hpp"

#ifndef GEOFLOW_VERSION
#define GEOFLOW_VERSION "unknown"
#endif

namespace geoflow::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Bad user input detected before any computation.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) { row(std::vector<std::string>(header)); }

    void row(const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
        text_ += "\n";
    }
    void write(const fs::path &path) const { write_file_atomic(path, text_); }

private:
    std::string text_;
};

struct ShootingOpts {
    int steps = 10;
    double alpha = 3.0;
    int exponent = 3;
    std::string integrator = "euler";

    void add(CLI::App *app) {
        app->add_option("--steps", steps, "time steps on [0, 1]")->check(CLI::PositiveNumber);
        app->add_option("--alpha", alpha, "metric smoothness alpha")->check(CLI::PositiveNumber);
        app->add_option("--exponent,--c", exponent, "metric exponent c")->check(CLI::PositiveNumber);
        app->add_option("--integrator", integrator, "euler or rk4")->check(CLI::IsMember({"euler", "rk4"}));
    }
    ShootingConfig config() const {
        ShootingConfig c;
        c.steps = steps;
        c.alpha = alpha;
        c.exponent = exponent;
        c.integrator = integrator == "rk4" ? Integrator::RK4 : Integrator::Euler;
        return c;
    }
};

struct ModelOpts {
    int width = 16;
    int latent_channels = 8;
    int hidden_channels = 16;
    int layers = 4;
    int modes = 2;
    double output_init_scale = 1e-2;

    void add(CLI::App *app) {
        app->add_option("--width", width, "registration network width")->check(CLI::PositiveNumber);
        app->add_option("--latent-channels", latent_channels, "latent channels C_z")->check(CLI::PositiveNumber);
        app->add_option("--hidden-channels", hidden_channels, "GNO hidden channels C_h")->check(CLI::PositiveNumber);
        app->add_option("--layers", layers, "GNO evolution layers J")->check(CLI::PositiveNumber);
        app->add_option("--modes", modes, "retained Fourier modes k_max")->check(CLI::PositiveNumber);
        app->add_option("--output-init-scale", output_init_scale, "decoder output layer init scale")
            ->check(CLI::PositiveNumber);
    }
    ModelConfig config(const ShootingConfig &shooting) const {
        ModelConfig c;
        c.regnet.width = width;
        c.regnet.latent_channels = latent_channels;
        c.regnet.output_init_scale = output_init_scale;
        c.gno.latent_channels = latent_channels;
        c.gno.hidden_channels = hidden_channels;
        c.gno.layers = layers;
        c.gno.modes = modes;
        c.shooting = shooting;
        return c;
    }
};

int resolve_threads(int flag) {
    if (const char *env = std::getenv("GEOFLOW_THREADS"); env && *env) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 1024) throw ValidationError("GEOFLOW_THREADS must be a positive integer");
        return static_cast<int>(v);
    }
    return flag;
}

fs::path prepare_out(const std::string &dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw ValidationError("--out: cannot create directory " + dir);
    return p;
}

/// Every option of `app`, explicit or default, echoed as JSON.
void write_config(const fs::path &dir, const CLI::App *app, const json &extra = json::object()) {
    json j;
    j["version"] = GEOFLOW_VERSION;
    j["subcommand"] = app->get_name();
    json opts = json::object();
    for (const CLI::Option *opt : app->get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames()[0] == "help") continue;
        const std::string name = opt->get_lnames()[0];
        if (opt->get_type_size() == 0) {
            opts[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto &res = opt->results();
            opts[name] = res.size() == 1 ? json(res[0]) : json(res);
        } else {
            opts[name] = opt->get_default_str();
        }
    }
    j["options"] = opts;
    for (const auto &[k, v] : extra.items()) j[k] = v;
    write_file_atomic(dir / "config.json", j.dump(2) + "\n");
}

ScalarField load_image(const std::string &path, const char *flag) {
    try {
        return read_scalar(path);
    } catch (const FormatError &e) {
        throw ValidationError(std::string(flag) + ": " + e.what());
    }
}

/// Images the registration network accepts: 2D, dims divisible by 4, latent grid wide enough.
void check_network_grid(const GridSpec &g, int modes, const char *flag) {
    if (g.ndim() != 2) throw ValidationError(std::string(flag) + ": the network path supports 2D images only");
    for (int a = 0; a < 2; ++a) {
        if (g.dim(a) % kLatentFactor != 0) {
            throw ValidationError(std::string(flag) + ": image dims must be divisible by " + std::to_string(kLatentFactor));
        }
        if (g.dim(a) / kLatentFactor < 2 * modes) {
            throw ValidationError(std::string(flag) + ": grid " + g.describe() + " is too small for " +
                                  std::to_string(modes) + " retained modes");
        }
    }
}

Checkpoint load_model(const std::string &path) {
    try {
        return load_checkpoint(path);
    } catch (const FormatError &e) {
        throw ValidationError(std::string("--checkpoint: ") + e.what());
    }
}

DatasetManifest load_data(const std::string &path) {
    try {
        return load_manifest(path);
    } catch (const FormatError &e) {
        throw ValidationError(std::string("--data: ") + e.what());
    }
}

void write_detjac(const fs::path &path, const std::vector<std::pair<std::string, DetJacReport>> &rows) {
    Csv csv{"case", "min", "max", "mean", "neg_count"};
    for (const auto &[name, r] : rows) csv.row({name, fmt(r.min), fmt(r.max), fmt(r.mean), std::to_string(r.negative)});
    csv.write(path);
}

void write_outputs(const fs::path &dir, const Transform &phi, const ScalarField *deformed) {
    write_field(dir / "phi.gfld", phi.displacement);
    if (phi.grid().ndim() == 2) export_grid(phi, 4, dir / "grid.pgm");
    if (deformed) {
        write_field(dir / "deformed.gfld", *deformed);
        if (deformed->grid().ndim() == 2) export_image(*deformed, dir / "deformed.pgm");
    }
}

template <class F>
double median_seconds(int reps, F &&f) {
    std::vector<double> times;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

std::vector<Sample> load_samples(const DatasetManifest &m, const std::vector<const ManifestEntry *> &entries) {
    std::vector<Sample> out;
    for (const ManifestEntry *e : entries) {
        auto [s, t] = load_pair(m, *e);
        out.push_back({std::move(s), std::move(t)});
    }
    return out;
}

} // namespace

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"geoflow: diffeomorphic registration by geodesic shooting and geodesic neural operators", "geoflow"};
    app.set_version_flag("--version", std::string("geoflow ") + GEOFLOW_VERSION);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.get_formatter()->column_width(36);

    std::string out_dir;
    int threads = 1;
    const auto add_common = [&](CLI::App *sub) {
        sub->add_option("--out,--out-dir", out_dir, "output directory")->required();
        sub->add_option("--threads", threads, "worker threads (GEOFLOW_THREADS overrides)")->check(CLI::Range(1, 1024));
    };

    // make-data
    std::string families = "circles";
    int n_pairs = 100, dims = 64;
    std::uint64_t seed = 0;
    CLI::App *make_data = app.add_subcommand("make-data", "generate a synthetic shape dataset");
    make_data->add_option("--family", families, "comma-separated: circles, blobs, triangles, envelopes");
    make_data->add_option("--n", n_pairs, "pairs per family")->check(CLI::PositiveNumber);
    make_data->add_option("--dims", dims, "grid size per axis")->check(CLI::Range(16, 4096));
    make_data->add_option("--seed", seed, "random seed");
    add_common(make_data);

    // shoot
    std::string v0_path, source_path, target_path;
    ShootingOpts shooting;
    CLI::App *shoot_cmd = app.add_subcommand("shoot", "integrate a geodesic from an initial velocity");
    shoot_cmd->add_option("--v0", v0_path, "initial velocity (GFLD vector field)")->required()->check(CLI::ExistingFile);
    shoot_cmd->add_option("--source", source_path, "image to deform along the geodesic")->check(CLI::ExistingFile);
    shooting.add(shoot_cmd);
    add_common(shoot_cmd);

    // register
    double lambda = 0.03;
    int iterations = 300;
    CLI::App *register_cmd = app.add_subcommand("register", "optimization-based LDDMM registration");
    register_cmd->add_option("--source", source_path, "source image")->required()->check(CLI::ExistingFile);
    register_cmd->add_option("--target", target_path, "target image")->required()->check(CLI::ExistingFile);
    register_cmd->add_option("--lambda", lambda, "image matching weight")->check(CLI::PositiveNumber);
    register_cmd->add_option("--iterations,--iters", iterations, "optimizer iterations")->check(CLI::PositiveNumber);
    shooting.add(register_cmd);
    add_common(register_cmd);

    // train
    std::string data_path;
    TrainConfig tc;
    ModelOpts model_opts;
    CLI::App *train_cmd = app.add_subcommand("train", "train the registration network and geodesic neural operator");
    train_cmd->add_option("--data", data_path, "dataset manifest.json")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--epochs", tc.epochs, "training epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", tc.batch, "batch size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", tc.seed, "random seed");
    train_cmd->add_option("--lr", tc.lr, "learning rate")->check(CLI::PositiveNumber);
    train_cmd->add_option("--weight-decay", tc.weight_decay, "decoupled weight decay")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--lambda", tc.lambda, "image matching weight")->check(CLI::PositiveNumber);
    train_cmd->add_option("--eta", tc.eta, "geodesic loss weight")->check(CLI::PositiveNumber);
    train_cmd->add_flag("--alternating", tc.alternating, "alternate GNO-only and network-only epochs");
    shooting.add(train_cmd);
    model_opts.add(train_cmd);
    add_common(train_cmd);

    // predict
    std::string checkpoint_path;
    CLI::App *predict_cmd = app.add_subcommand("predict", "register a pair with a trained model");
    predict_cmd->add_option("--source", source_path, "source image")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--target", target_path, "target image")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required()->check(CLI::ExistingFile);
    add_common(predict_cmd);

    // eval
    std::string split = "test";
    CLI::App *eval_cmd = app.add_subcommand("eval", "evaluate a trained model on a dataset split");
    eval_cmd->add_option("--data", data_path, "dataset manifest.json")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--split", split, "train, val, test, ood or all")
        ->check(CLI::IsMember({"train", "val", "test", "ood", "all"}));
    add_common(eval_cmd);

    // bench
    std::vector<int> bench_dims{32, 64};
    int reps = 5;
    CLI::App *bench_cmd = app.add_subcommand("bench", "time predict against shoot");
    bench_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--dims", bench_dims, "grid sizes")->delimiter(',')->check(CLI::Range(16, 4096));
    bench_cmd->add_option("--reps", reps, "repetitions per timing")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", seed, "random seed");
    add_common(bench_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::Success &e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return kExitValidation;
    }

    try {
        threads = resolve_threads(threads);
        tc.threads = threads;

        if (*make_data) {
            std::vector<ShapeFamily> fams;
            std::stringstream ss(families);
            for (std::string item; std::getline(ss, item, ',');) {
                try {
                    fams.push_back(parse_family(item));
                } catch (const std::invalid_argument &e) {
                    throw ValidationError(std::string("--family: ") + e.what());
                }
            }
            if (fams.empty()) throw ValidationError("--family: no family given");
            const fs::path dir = prepare_out(out_dir);
            std::vector<ShapePair> pairs;
            for (std::size_t k = 0; k < fams.size(); ++k) {
                const std::uint64_t fseed = seed + 1000003ULL * k;
                auto batch = fams[k] == ShapeFamily::Circle ? gen_circles(n_pairs, dims, fseed)
                                                            : gen_shapes(fams[k], n_pairs, dims, fseed);
                std::move(batch.begin(), batch.end(), std::back_inserter(pairs));
            }
            const DatasetManifest m = write_dataset(dir, pairs, seed);
            write_config(dir, make_data);
            out << "wrote " << m.entries.size() << " pairs to " << (dir / "manifest.json").string() << "\n";
            return kExitOk;
        }

        if (*shoot_cmd) {
            VectorField v0;
            try {
                v0 = read_vector(v0_path);
            } catch (const FormatError &e) {
                throw ValidationError(std::string("--v0: ") + e.what());
            }
            std::optional<ScalarField> source;
            if (!source_path.empty()) {
                source = load_image(source_path, "--source");
                if (!(source->grid() == v0.grid())) throw ValidationError("--source: grid differs from --v0");
            }
            const ShootingConfig cfg = shooting.config();
            const fs::path dir = prepare_out(out_dir);
            write_config(dir, shoot_cmd);
            Trajectory traj = shoot(v0, cfg);
            const FourierMultiplier mult = cfg.multiplier(v0.grid());
            Csv energy{"t", "kinetic_energy"};
            for (std::size_t t = 0; t < traj.velocities.size(); ++t) {
                energy.row({fmt(static_cast<double>(t) * cfg.step_size()), fmt(kinetic_energy(traj.velocities[t], mult))});
            }
            energy.write(dir / "energy.csv");
            std::optional<ScalarField> deformed;
            if (source) deformed = warp(*source, traj.transforms.back());
            write_field(dir / "v_final.gfld", traj.velocities.back());
            write_outputs(dir, traj.transforms.back(), deformed ? &*deformed : nullptr);
            write_detjac(dir / "detjac.csv", {{"shoot", detjac_report(traj.transforms.back())}});
            out << "shot " << cfg.steps << " steps, energy drift "
                << kinetic_energy(traj.velocities.back(), mult) / kinetic_energy(traj.velocities.front(), mult) - 1.0
                << "\n";
            return kExitOk;
        }

        if (*register_cmd) {
            RegistrationProblem prob;
            prob.source = load_image(source_path, "--source");
            prob.target = load_image(target_path, "--target");
            if (!(prob.source.grid() == prob.target.grid())) throw ValidationError("--target: grid differs from --source");
            prob.lambda = lambda;
            prob.shooting = shooting.config();
            const fs::path dir = prepare_out(out_dir);
            write_config(dir, register_cmd);
            RegisterOptions opts;
            opts.iterations = iterations;
            const RegistrationResult res = register_optimize(prob, opts);
            Csv energy{"iteration", "regularity", "matching", "total"};
            for (std::size_t k = 0; k < res.history.size(); ++k) {
                const EnergyTerms &e = res.history[k];
                energy.row({std::to_string(k), fmt(e.regularity), fmt(e.matching), fmt(e.total())});
            }
            energy.write(dir / "energy.csv");
            const Transform &phi = res.trajectory.transforms.back();
            const ScalarField deformed = warp(prob.source, phi);
            write_field(dir / "v0.gfld", res.v0);
            write_outputs(dir, phi, &deformed);
            const DetJacReport dj = detjac_report(phi);
            write_detjac(dir / "detjac.csv", {{"register", dj}});
            out << "registered in " << res.iterations_run << " iterations: energy " << res.history.front().total()
                << " -> " << res.history.back().total() << ", negative detjac " << dj.negative << "\n";
            return kExitOk;
        }

        if (*train_cmd) {
            const DatasetManifest m = load_data(data_path);
            const ModelConfig mc = model_opts.config(shooting.config());
            try {
                mc.validate();
                tc.validate();
            } catch (const std::invalid_argument &e) {
                throw ValidationError(e.what());
            }
            const std::vector<Sample> train_set = load_samples(m, m.split("train"));
            const std::vector<Sample> val_set = load_samples(m, m.split("val"));
            if (train_set.empty()) throw ValidationError("--data: manifest has no train pairs");
            for (const Sample &s : train_set) check_network_grid(s.source.grid(), mc.gno.modes, "--data");
            const fs::path dir = prepare_out(out_dir);
            write_config(dir, train_cmd, {{"model", json::parse(model_config_to_json(mc))}});

            Csv loss{"epoch", "match", "reg", "geodesic", "total"};
            Csv val{"epoch", "match", "reg", "geodesic", "total"};
            const auto on_epoch = [&](const EpochLog &l, const Model &) {
                loss.row({std::to_string(l.epoch), fmt(l.train.match), fmt(l.train.reg), fmt(l.train.geodesic), fmt(l.train.total())});
                val.row({std::to_string(l.epoch), fmt(l.validation.match), fmt(l.validation.reg), fmt(l.validation.geodesic),
                         fmt(l.validation.total())});
                loss.write(dir / "loss.csv");
                val.write(dir / "val_loss.csv");
                out << "epoch " << l.epoch << " train " << l.train.total() << " val " << l.validation.total() << "\n";
            };
            const auto warn = [&err](const std::string &w) { err << "warning: " << w << "\n"; };
            const GridSpec image_grid = train_set.front().source.grid();
            const TrainResult res = train(train_set, val_set, Model::init(mc, tc.seed, &image_grid), tc, on_epoch, warn);
            const std::string extra = json{{"best_epoch", res.best_epoch}, {"seed", tc.seed}}.dump();
            save_checkpoint(dir / "best.gfck", res.best, extra);
            save_checkpoint(dir / "last.gfck", res.last, extra);
            out << "best epoch " << res.best_epoch << ", checkpoint " << (dir / "best.gfck").string() << "\n";
            return kExitOk;
        }

        if (*predict_cmd) {
            const Checkpoint ck = load_model(checkpoint_path);
            const ScalarField source = load_image(source_path, "--source");
            const ScalarField target = load_image(target_path, "--target");
            if (!(source.grid() == target.grid())) throw ValidationError("--target: grid differs from --source");
            check_network_grid(source.grid(), ck.model.config.gno.modes, "--source");
            const fs::path dir = prepare_out(out_dir);
            write_config(dir, predict_cmd);
            const Prediction p = predict(source, target, ck.model);
            for (std::size_t t = 0; t < p.trajectory.velocities.size(); ++t) {
                char name[32];
                std::snprintf(name, sizeof name, "v_%03zu.gfld", t);
                write_field(dir / name, p.trajectory.velocities[t]);
            }
            write_outputs(dir, p.trajectory.transforms.back(), &p.deformed);
            const DetJacReport dj = detjac_report(p.trajectory.transforms.back());
            write_detjac(dir / "detjac.csv", {{"predict", dj}});
            out << "predicted " << p.trajectory.steps() << " steps, negative detjac " << dj.negative << "\n";
            return kExitOk;
        }

        if (*eval_cmd) {
            const Checkpoint ck = load_model(checkpoint_path);
            const DatasetManifest m = load_data(data_path);
            std::vector<const ManifestEntry *> entries;
            for (const ManifestEntry &e : m.entries) {
                if (split == "all" || e.split == split) entries.push_back(&e);
            }
            if (entries.empty()) throw ValidationError("--split: no pairs in split '" + split + "'");
            const fs::path dir = prepare_out(out_dir);
            write_config(dir, eval_cmd);
            Csv metrics{"case", "structure", "dice", "hd"};
            Csv traj_csv{"case", "t", "image", "transform", "velocity"};
            std::vector<std::pair<std::string, DetJacReport>> dj_rows;
            double dice_sum = 0.0;
            for (const ManifestEntry *e : entries) {
                const std::string name = fs::path(e->source).stem().string();
                auto [source, target] = load_pair(m, *e);
                check_network_grid(source.grid(), ck.model.config.gno.modes, "--data");
                const Prediction p = predict(source, target, ck.model);
                const Transform &phi = p.trajectory.transforms.back();
                auto [sl, tl] = load_labels(m, *e);
                const LabelMask warped = warp_labels(sl, phi);
                const double d = dice(warped, tl, 1);
                double hd = std::numeric_limits<double>::quiet_NaN();
                try {
                    hd = hausdorff(warped, tl, 1);
                } catch (const std::invalid_argument &) {
                }
                dice_sum += d;
                metrics.row({name, "1", fmt(d), fmt(hd)});
                dj_rows.emplace_back(name, detjac_report(phi));

                Trajectory ref = shoot(p.trajectory.velocities.front(), ck.model.config.shooting);
                ref.images = deform_along(source, ref);
                for (const TrajectoryMseRow &r : trajectory_mse(p.trajectory, ref)) {
                    traj_csv.row({name, std::to_string(r.t), fmt(r.image), fmt(r.transform), fmt(r.velocity)});
                }
            }
            metrics.write(dir / "metrics.csv");
            write_detjac(dir / "detjac.csv", dj_rows);
            traj_csv.write(dir / "trajectory_mse.csv");
            std::size_t folded = 0;
            for (const auto &[n, r] : dj_rows) folded += r.negative > 0;
            out << "evaluated " << entries.size() << " pairs: mean dice " << dice_sum / entries.size() << ", cases with folds "
                << folded << "\n";
            return kExitOk;
        }

        if (*bench_cmd) {
            const Checkpoint ck = load_model(checkpoint_path);
            for (int d : bench_dims) {
                check_network_grid(GridSpec{d, d}, ck.model.config.gno.modes, "--dims");
            }
            const fs::path dir = prepare_out(out_dir);
            write_config(dir, bench_cmd);
            Csv csv{"dims", "t_predict", "t_shoot", "ratio"};
            for (int d : bench_dims) {
                const ShapePair pair = gen_circles(1, d, seed).front();
                const ScalarField &s = pair.source.image;
                const ScalarField &t = pair.target.image;
                const VectorField v0 = predict(s, t, ck.model).trajectory.velocities.front();
                const ShootingConfig &sc = ck.model.config.shooting;
                const double tp = median_seconds(reps, [&] { predict(s, t, ck.model); });
                const double ts = median_seconds(reps, [&] {
                    const Trajectory traj = shoot(v0, sc);
                    warp(s, traj.transforms.back());
                });
                csv.row({std::to_string(d) + "x" + std::to_string(d), fmt(tp), fmt(ts), fmt(tp / ts)});
                out << d << "x" << d << ": predict " << tp << " s, shoot " << ts << " s\n";
            }
            csv.write(dir / "bench.csv");
            return kExitOk;
        }
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}

int dispatch(int argc, const char *const *argv) {
    return dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace geoflow::cli
