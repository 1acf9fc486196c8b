#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "geoflow/data_io.hpp"
#include "geoflow/epdiff.hpp"
#include "geoflow/field_ops.hpp"
#include "geoflow/spectral.hpp"
#include "geoflow/training.hpp"

using namespace geoflow;

namespace {

VectorField wave(const GridSpec &g, double amp) {
    VectorField v(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Point x = g.position(p);
        v.at(0, p) = amp * std::sin(2 * std::numbers::pi * x[1]);
        v.at(1, p) = amp * std::cos(2 * std::numbers::pi * (x[0] + x[1]));
    }
    return v;
}

void BM_ApplyK(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec g{n, n};
    const FourierMultiplier m(g, 3.0, 3);
    const VectorField v = wave(g, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(apply_K(v, m));
}
BENCHMARK(BM_ApplyK)->Arg(32)->Arg(64)->Arg(128);

void BM_EpdiffRhs(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec g{n, n};
    const FourierMultiplier m(g, 3.0, 3);
    const VectorField v = wave(g, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(epdiff_rhs(v, m));
}
BENCHMARK(BM_EpdiffRhs)->Arg(32)->Arg(64)->Arg(128);

void BM_Warp(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec g{n, n};
    const ScalarField s = render_disk(g, n / 2.0, n / 2.0, n / 5.0).image;
    const Transform phi(wave(g, 0.02));
    for (auto _ : state) benchmark::DoNotOptimize(warp(s, phi));
}
BENCHMARK(BM_Warp)->Arg(32)->Arg(64)->Arg(128);

// The two inference paths: shooting EPDiff versus the learned rollout, both ending in a warp.
void BM_ShootAndWarp(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec g{n, n};
    const ScalarField s = render_disk(g, n / 2.0, n / 2.0, n / 5.0).image;
    const VectorField v0 = wave(g, 0.05);
    const ShootingConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(warp(s, shoot(v0, cfg).transforms.back()));
}
BENCHMARK(BM_ShootAndWarp)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const GridSpec g{n, n};
    const ShapePair pair = gen_circles(1, n, 1).front();
    const Model model = Model::init(ModelConfig{}, 2, &g);
    for (auto _ : state) benchmark::DoNotOptimize(predict(pair.source.image, pair.target.image, model));
}
BENCHMARK(BM_Predict)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_JointLossGradient(benchmark::State &state) {
    const GridSpec g{32, 32};
    const ShapePair pair = gen_circles(1, 32, 3).front();
    const std::vector<Sample> batch{{pair.source.image, pair.target.image}};
    const Model model = Model::init(ModelConfig{}, 4, &g);
    const TrainConfig cfg;
    for (auto _ : state) {
        Model grads = model.zeros_like();
        benchmark::DoNotOptimize(joint_loss(batch, model, cfg, &grads));
    }
}
BENCHMARK(BM_JointLossGradient)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
