#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "geoflow/field.hpp"

namespace geoflow::testing {

/// Sum of a few random low-frequency Fourier modes per channel, scaled so max |f| = amplitude.
inline MultiField smooth_random(const GridSpec &g, int channels, double amplitude, std::uint64_t seed, int kmax = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> k(-kmax, kmax);
    MultiField f(g, channels);
    for (int c = 0; c < channels; ++c) {
        for (int m = 0; m < 6; ++m) {
            std::array<int, 3> kv{k(rng), k(rng), g.ndim() == 3 ? k(rng) : 0};
            const double a = u(rng), ph = std::numbers::pi * u(rng);
            for (std::size_t p = 0; p < g.size(); ++p) {
                const Point x = g.position(p);
                double arg = ph;
                for (int ax = 0; ax < g.ndim(); ++ax) arg += 2.0 * std::numbers::pi * kv[ax] * x[ax] / g.period(ax);
                f.at(c, p) += a * std::cos(arg);
            }
        }
    }
    const double m = f.max_abs();
    if (m > 0.0) f *= amplitude / m;
    return f;
}

inline VectorField smooth_velocity(const GridSpec &g, double amplitude, std::uint64_t seed, int kmax = 3) {
    return VectorField(smooth_random(g, g.ndim(), amplitude, seed, kmax));
}

/// i.i.d. uniform samples in [-1, 1].
inline MultiField white_noise(const GridSpec &g, int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MultiField f(g, channels);
    for (double &v : f.data()) v = u(rng);
    return f;
}

inline double dot(const MultiField &a, const MultiField &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

} // namespace geoflow::testing
