#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/spectral.hpp"
#include "helpers.hpp"

using namespace geoflow;
using geoflow::testing::dot;
using geoflow::testing::smooth_random;
using geoflow::testing::white_noise;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_diff(const MultiField &a, const MultiField &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

SpectralKernel random_kernel(int in, int out, std::array<int, 3> modes, std::uint64_t seed) {
    SpectralKernel k(in, out, 2, modes);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    for (Complex &w : k.weights()) w = {n(rng), n(rng)};
    return k;
}

// O(N^2) reference: explicit DFT, truncation to the signed box, explicit inverse DFT.
MultiField naive_spectral_conv(const MultiField &u, const SpectralKernel &k) {
    const GridSpec &g = u.grid();
    const int n0 = g.dim(0), n1 = g.dim(1);
    MultiField out(g, k.channels_out());
    for (std::size_t f = 0; f < k.frequency_count(); ++f) {
        const auto s = k.frequency(f);
        std::vector<Complex> uhat(u.channels());
        for (int c = 0; c < u.channels(); ++c) {
            for (int i = 0; i < n0; ++i) {
                for (int j = 0; j < n1; ++j) {
                    const double ph = -kTwoPi * (double(s[0]) * i / n0 + double(s[1]) * j / n1);
                    uhat[c] += u.at(c, g.index(i, j)) * Complex(std::cos(ph), std::sin(ph));
                }
            }
        }
        for (int o = 0; o < k.channels_out(); ++o) {
            Complex y{};
            for (int c = 0; c < u.channels(); ++c) y += k.weight(f, o, c) * uhat[c];
            for (int i = 0; i < n0; ++i) {
                for (int j = 0; j < n1; ++j) {
                    const double ph = kTwoPi * (double(s[0]) * i / n0 + double(s[1]) * j / n1);
                    out.at(o, g.index(i, j)) += (y * Complex(std::cos(ph), std::sin(ph))).real() / g.size();
                }
            }
        }
    }
    return out;
}

} // namespace

TEST_SUITE("spectral") {

TEST_CASE("fft round trip and Parseval") {
    GridSpec g{12, 8};
    const MultiField x = white_noise(g, 1, 1);
    const Fft fft(g);
    const auto X = fft.forward_real(x.channel(0));
    std::vector<double> back(g.size());
    fft.inverse_real(X, back);
    double e_space = 0.0, e_freq = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        CHECK(back[p] == doctest::Approx(x.data()[p]).epsilon(1e-12));
        e_space += x.data()[p] * x.data()[p];
        e_freq += std::norm(X[p]);
    }
    CHECK(e_space == doctest::Approx(e_freq / g.size()).epsilon(1e-10));
}

TEST_CASE("multiplier rejects invalid parameters") {
    GridSpec g{8, 8};
    CHECK_THROWS_AS(FourierMultiplier(g, 0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(FourierMultiplier(g, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(FourierMultiplier(g, 1.0, 2, -1.0), std::invalid_argument);
}

TEST_CASE("L and K leave constants unchanged and invert each other") {
    GridSpec g{16, 16};
    const FourierMultiplier m(g, 3.0, 3);
    CHECK(m.symbol({0, 0, 0}) == 1.0);
    const std::vector<double> c{0.7, -1.3};
    const VectorField k = VectorField::constant(g, c);
    CHECK(max_diff(apply_L(k, m), k) < 1e-12);
    CHECK(max_diff(apply_K(k, m), k) < 1e-12);

    const VectorField v(smooth_random(g, 2, 1.0, 2, 6));
    const double scale = v.max_abs();
    CHECK(max_diff(apply_K(apply_L(v, m), m), v) < 1e-10 * scale);
    CHECK(max_diff(apply_L(apply_K(v, m), m), v) < 1e-10 * scale);
    CHECK(max_diff(apply_L(apply_K(v, m), m), apply_K(apply_L(v, m), m)) < 1e-10 * scale);
    CHECK(apply_K(VectorField(g), m).max_abs() == 0.0);
    CHECK_THROWS_AS(apply_L(VectorField(GridSpec{8, 8}), m), GridMismatch);
}

TEST_CASE("a single Fourier mode is scaled by the closed-form symbol") {
    GridSpec g{16, 12};
    const FourierMultiplier m(g, 0.5, 2);
    const int k0 = 3, k1 = -2;
    ScalarField f(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto c = g.coords(p);
        f[p] = std::cos(kTwoPi * (double(k0) * c[0] / 16 + double(k1) * c[1] / 12));
    }
    double lap = 2.0 * (1 - std::cos(kTwoPi * k0 / 16)) + 2.0 * (1 - std::cos(kTwoPi * k1 / 12));
    const double a = std::pow(1.0 + 0.5 * lap, 2);
    CHECK(m.symbol({k0, k1, 0}) == doctest::Approx(a).epsilon(1e-14));
    const MultiField lf = apply_L(f, m);
    const MultiField kf = apply_K(f, m);
    for (std::size_t p = 0; p < g.size(); ++p) {
        CHECK(lf.data()[p] == doctest::Approx(a * f[p]).epsilon(1e-9).scale(1.0));
        CHECK(kf.data()[p] == doctest::Approx(f[p] / a).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("L equals the cubed stencil operator") {
    // (Id - alpha * Lap_h)^3 applied by finite differences on the pixel lattice.
    GridSpec g{10, 14};
    const double alpha = 0.7;
    const FourierMultiplier m(g, alpha, 3);
    auto op = [&](const ScalarField &u) {
        ScalarField r(g);
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 14; ++j) {
                const double c = u[g.index(i, j)];
                const double lap = u[g.index((i + 1) % 10, j)] + u[g.index((i + 9) % 10, j)] +
                                   u[g.index(i, (j + 1) % 14)] + u[g.index(i, (j + 13) % 14)] - 4 * c;
                r[g.index(i, j)] = c - alpha * lap;
            }
        }
        return r;
    };
    const ScalarField u(white_noise(g, 1, 3));
    const ScalarField ref = op(op(op(u)));
    CHECK(max_diff(apply_L(u, m), ref) < 1e-10 * ref.max_abs());
}

TEST_CASE("cell size rescales the Laplacian") {
    GridSpec g{8, 8};
    const FourierMultiplier fine(g, 3.0, 1, 1.0), coarse(g, 48.0, 1, 4.0);
    for (int k = 0; k < 8; ++k) CHECK(fine.symbol({k, 1, 0}) == doctest::Approx(coarse.symbol({k, 1, 0})));
}

TEST_CASE("K contracts energy, with equality only for constants") {
    GridSpec g{16, 16};
    const FourierMultiplier m(g, 3.0, 3);
    const MultiField u = white_noise(g, 1, 4);
    const MultiField ku = smooth(u, m);
    CHECK(ku.sum_squares() < u.sum_squares());
    const MultiField kku = smooth(ku, m);
    CHECK(kku.sum_squares() <= ku.sum_squares());
    const ScalarField c(g, 2.0);
    CHECK(smooth(c, m).sum_squares() == doctest::Approx(c.sum_squares()).epsilon(1e-12));
    CHECK(max_diff(smooth(c, m), c) < 1e-12);
}

TEST_CASE("white-noise band energy is divided by the squared symbol") {
    GridSpec g{32, 32};
    const FourierMultiplier m(g, 3.0, 3);
    const MultiField u = white_noise(g, 1, 5);
    const MultiField ku = smooth(u, m);
    const Fft fft(g);
    const auto U = fft.forward_real(u.channel(0));
    const auto KU = fft.forward_real(ku.channel(0));
    // Bands by Chebyshev radius of the signed frequency.
    std::vector<double> e_in(17), e_out(17), expected(17);
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto c = g.coords(p);
        const int s0 = c[0] > 16 ? c[0] - 32 : c[0], s1 = c[1] > 16 ? c[1] - 32 : c[1];
        const int band = std::max(std::abs(s0), std::abs(s1));
        const double a = m.symbol({s0, s1, 0});
        e_in[band] += std::norm(U[p]);
        e_out[band] += std::norm(KU[p]);
        expected[band] += std::norm(U[p]) / (a * a);
    }
    for (int b = 0; b <= 16; ++b) CHECK(e_out[b] == doctest::Approx(expected[b]).epsilon(1e-8));
    CHECK(e_out[16] < 1e-6 * e_in[16]);
}

TEST_CASE("spectral conv: identity, zero, zero-frequency mean") {
    GridSpec g{8, 8};
    const MultiField u = white_noise(g, 2, 6);
    const SpectralKernel id = SpectralKernel::identity(2, 2, {4, 4, 1});
    CHECK(max_diff(spectral_conv(u, id), u) < 1e-12);

    const SpectralKernel zero(2, 3, 2, {2, 2, 1});
    CHECK(spectral_conv(u, zero).max_abs() == 0.0);

    SpectralKernel dc(1, 1, 2, {2, 2, 1});
    for (std::size_t f = 0; f < dc.frequency_count(); ++f) {
        const auto s = dc.frequency(f);
        if (s[0] == 0 && s[1] == 0) dc.weight(f, 0, 0) = 1.75;
    }
    const MultiField one(g, 1, std::vector<double>(u.channel(0).begin(), u.channel(0).end()));
    double mean = 0.0;
    for (double v : one.data()) mean += v;
    mean /= g.size();
    const MultiField y = spectral_conv(one, dc);
    for (double v : y.data()) CHECK(v == doctest::Approx(1.75 * mean).epsilon(1e-12));

    CHECK_THROWS_AS(spectral_conv(u, SpectralKernel(2, 2, 2, {5, 2, 1})), ShapeError);
    CHECK_THROWS_AS(spectral_conv(white_noise(g, 3, 1), zero), ShapeError);
}

TEST_CASE("spectral conv matches an explicit DFT and is linear") {
    GridSpec g{8, 6};
    const SpectralKernel k = random_kernel(2, 3, {2, 3, 1}, 7);
    const MultiField u = white_noise(g, 2, 8), w = white_noise(g, 2, 9);
    const MultiField y = spectral_conv(u, k);
    CHECK(max_diff(y, naive_spectral_conv(u, k)) < 1e-12);

    MultiField mix = u;
    mix *= 0.3;
    mix.axpy(-2.0, w);
    MultiField expect = spectral_conv(u, k);
    expect *= 0.3;
    expect.axpy(-2.0, spectral_conv(w, k));
    CHECK(max_diff(spectral_conv(mix, k), expect) < 1e-10);
}

TEST_CASE("spectral conv backward: input adjoint and weight derivatives") {
    GridSpec g{8, 8};
    SpectralKernel k = random_kernel(2, 2, {2, 2, 1}, 10);
    const MultiField u = white_noise(g, 2, 11), r = white_noise(g, 2, 12);
    SpectralKernel kg(2, 2, 2, {2, 2, 1});
    const MultiField gu = spectral_conv_backward(u, k, r, kg);
    const MultiField du = white_noise(g, 2, 13);
    CHECK(dot(spectral_conv(du, k), r) == doctest::Approx(dot(du, gu)).epsilon(1e-12));

    const double eps = 1e-6;
    for (std::size_t idx : {0ul, 5ul, 17ul, 31ul}) {
        const Complex w0 = k.weights()[idx];
        k.weights()[idx] = w0 + eps;
        const double fp = dot(spectral_conv(u, k), r);
        k.weights()[idx] = w0 - eps;
        const double fm = dot(spectral_conv(u, k), r);
        k.weights()[idx] = w0 + Complex(0, eps);
        const double gp = dot(spectral_conv(u, k), r);
        k.weights()[idx] = w0 - Complex(0, eps);
        const double gm = dot(spectral_conv(u, k), r);
        k.weights()[idx] = w0;
        CHECK((fp - fm) / (2 * eps) == doctest::Approx(kg.weights()[idx].real()).epsilon(1e-7).scale(1e-3));
        CHECK((gp - gm) / (2 * eps) == doctest::Approx(kg.weights()[idx].imag()).epsilon(1e-7).scale(1e-3));
    }
}

}
