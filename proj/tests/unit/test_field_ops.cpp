#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/field_ops.hpp"
#include "helpers.hpp"

using namespace geoflow;
using geoflow::testing::dot;
using geoflow::testing::smooth_random;
using geoflow::testing::smooth_velocity;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarField sample(const GridSpec &g, auto &&f) {
    ScalarField s(g);
    for (std::size_t p = 0; p < g.size(); ++p) s[p] = f(g.position(p));
    return s;
}

double max_err(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Bilinear interpolation written out by hand for a single query.
double hand_bilinear(const ScalarField &f, double x, double y) {
    const GridSpec &g = f.grid();
    const double qx = x / g.spacing(0), qy = y / g.spacing(1);
    const double fx = std::floor(qx), fy = std::floor(qy);
    const double tx = qx - fx, ty = qy - fy;
    auto at = [&](long i, long j) {
        const int n0 = g.dim(0), n1 = g.dim(1);
        const int ii = static_cast<int>(((i % n0) + n0) % n0), jj = static_cast<int>(((j % n1) + n1) % n1);
        return f[g.index(ii, jj)];
    };
    const long i = static_cast<long>(fx), j = static_cast<long>(fy);
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
           tx * ty * at(i + 1, j + 1);
}

Transform fixed_point_inverse(const Transform &phi, int iterations) {
    // w(x) = -u(x + w(x))
    Transform inv = Transform::identity(phi.grid());
    for (int it = 0; it < iterations; ++it) {
        const VectorField uw(warp(static_cast<const MultiField &>(phi.displacement), inv));
        inv.displacement = -1.0 * uw;
    }
    return inv;
}

} // namespace

TEST_SUITE("field_ops") {

TEST_CASE("interpolate reproduces nodes and matches a hand bilinear formula") {
    GridSpec g{12, 10};
    const ScalarField f(smooth_random(g, 1, 1.0, 3));
    std::vector<Point> nodes;
    for (std::size_t p = 0; p < g.size(); ++p) nodes.push_back(g.position(p));
    const auto at_nodes = interpolate(f, nodes);
    CHECK(max_err(at_nodes, f.values()) < 1e-14);

    const std::vector<Point> q{{0.013, 0.77, 0}, {0.99, 0.999, 0}, {-0.31, 1.42, 0}, {3.05, -2.2, 0}};
    const auto vals = interpolate(f, q);
    for (std::size_t k = 0; k < q.size(); ++k) {
        CHECK(vals[k] == doctest::Approx(hand_bilinear(f, q[k][0], q[k][1])).epsilon(1e-13));
    }
    const std::vector<Point> bad{{std::numeric_limits<double>::quiet_NaN(), 0, 0}};
    CHECK_THROWS_AS(interpolate(f, bad), std::invalid_argument);
}

TEST_CASE("warp by the identity and of constants is exact") {
    GridSpec g{16, 16};
    const ScalarField f(smooth_random(g, 1, 1.0, 4));
    const ScalarField w = warp(f, Transform::identity(g));
    CHECK(max_err(w.values(), f.values()) == 0.0);

    const ScalarField c(g, 0.37);
    const Transform phi(smooth_velocity(g, 0.2, 5));
    const ScalarField wc = warp(c, phi);
    CHECK(max_err(wc.values(), c.values()) < 1e-15);

    CHECK_THROWS_AS(warp(f, Transform::identity(GridSpec{8, 8})), GridMismatch);
}

TEST_CASE("warp of a sine by a quarter-period shift converges to the cosine at second order") {
    const std::vector<int> sizes{30, 62, 126};
    std::vector<double> errs;
    for (int n : sizes) {
        GridSpec g{n, n};
        const ScalarField f = sample(g, [](Point x) { return std::sin(kTwoPi * x[0]); });
        const std::vector<double> shift{0.25, 0.0};
        const ScalarField w = warp(f, Transform::translation(g, shift));
        const ScalarField expect = sample(g, [](Point x) { return std::cos(kTwoPi * x[0]); });
        errs.push_back(max_err(w.values(), expect.values()));
    }
    CHECK(errs[0] < 0.01);
    for (int k = 0; k < 2; ++k) {
        const double order = std::log(errs[k] / errs[k + 1]) / std::log(double(sizes[k + 1]) / sizes[k]);
        CHECK(order == doctest::Approx(2.0).epsilon(0.1));
    }
}

TEST_CASE("compose with the identity and of translations") {
    GridSpec g{16, 16};
    const Transform phi(smooth_velocity(g, 0.05, 6));
    const Transform id = Transform::identity(g);
    CHECK(max_err(compose(id, phi).displacement.data(), phi.displacement.data()) == 0.0);
    CHECK(max_err(compose(phi, id).displacement.data(), phi.displacement.data()) == 0.0);

    const std::vector<double> a{0.13, -0.4}, b{0.21, 0.05};
    const Transform ab = compose(Transform::translation(g, a), Transform::translation(g, b));
    for (std::size_t p = 0; p < g.size(); ++p) {
        CHECK(ab.displacement.at(0, p) == doctest::Approx(0.34).epsilon(1e-12));
        CHECK(ab.displacement.at(1, p) == doctest::Approx(-0.35).epsilon(1e-12));
    }
    CHECK_THROWS_AS(compose(phi, Transform::identity(GridSpec{8, 8})), GridMismatch);
}

TEST_CASE("compose is associative for translations") {
    GridSpec g{16, 16};
    const std::vector<double> a{0.1, 0.2}, b{-0.3, 0.07}, c{0.45, -0.11};
    const Transform ta = Transform::translation(g, a), tb = Transform::translation(g, b),
                    tc = Transform::translation(g, c);
    const Transform l = compose(compose(ta, tb), tc), r = compose(ta, compose(tb, tc));
    CHECK(max_err(l.displacement.data(), r.displacement.data()) <= 1e-6);
}

TEST_CASE("compose with a fixed-point inverse gives the identity") {
    GridSpec g{32, 32};
    const Transform phi(smooth_velocity(g, 0.02, 7, 2));
    const Transform inv = fixed_point_inverse(phi, 60);
    const Transform id = compose(phi, inv);
    CHECK(id.displacement.max_abs() <= 1e-6);
}

TEST_CASE("jacobian of constants vanishes and of a sine converges at second order") {
    GridSpec g{16, 16};
    const std::vector<double> c{0.3, -0.2};
    const JacobianField jc = jacobian(VectorField::constant(g, c));
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (double v : jc.entry(i, j)) CHECK(v == 0.0);
        }
    }

    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        GridSpec gn{n, n};
        VectorField v(gn);
        const ScalarField s = sample(gn, [](Point x) { return std::sin(kTwoPi * x[0]); });
        std::copy(s.values().begin(), s.values().end(), v.component(0).begin());
        const JacobianField jac = jacobian(v);
        const ScalarField d = sample(gn, [](Point x) { return kTwoPi * std::cos(kTwoPi * x[0]); });
        errs.push_back(max_err(jac.entry(0, 0), d.values()));
        CHECK(std::ranges::all_of(jac.entry(0, 1), [](double e) { return e == 0.0; }));
    }
    CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("divergence converges and annihilates curl fields") {
    const std::vector<double> c{1.0, 2.0};
    const ScalarField dc = divergence(VectorField::constant(GridSpec{8, 8}, c));
    CHECK(dc.max_abs() == 0.0);

    std::vector<double> errs, curl_errs;
    for (int n : {16, 32, 64}) {
        GridSpec g{n, n};
        VectorField v(g), w(g);
        for (std::size_t p = 0; p < g.size(); ++p) {
            const Point x = g.position(p);
            v.at(0, p) = std::sin(kTwoPi * x[0]);
            v.at(1, p) = std::sin(kTwoPi * x[1]);
            // stream function sin(2 pi x) cos(4 pi y) / 2 pi
            w.at(0, p) = 2.0 * std::sin(kTwoPi * x[0]) * std::sin(2 * kTwoPi * x[1]);
            w.at(1, p) = std::cos(kTwoPi * x[0]) * std::cos(2 * kTwoPi * x[1]);
        }
        const ScalarField expect =
            sample(g, [](Point x) { return kTwoPi * (std::cos(kTwoPi * x[0]) + std::cos(kTwoPi * x[1])); });
        errs.push_back(max_err(divergence(v).values(), expect.values()));
        curl_errs.push_back(divergence(w).max_abs());
    }
    CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(curl_errs[2] < curl_errs[0]);
    CHECK(curl_errs[2] < 1e-12 + 0.3 * curl_errs[1]);
}

TEST_CASE("det_jacobian: identity, mean one, expansion sign, folding") {
    GridSpec g{32, 32};
    const ScalarField did = det_jacobian(Transform::identity(g));
    for (double v : did.values()) CHECK(v == 1.0);

    VectorField u(g);
    for (std::size_t p = 0; p < g.size(); ++p) u.at(0, p) = 0.1 * std::sin(kTwoPi * g.position(p)[0]) / kTwoPi;
    const ScalarField det = det_jacobian(Transform(u));
    double mean = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        mean += det[p];
        const double cx = std::cos(kTwoPi * g.position(p)[0]);
        if (cx > 0.1) CHECK(det[p] > 1.0);
        if (cx < -0.1) CHECK(det[p] < 1.0);
    }
    CHECK(mean / g.size() == doctest::Approx(1.0).epsilon(1e-12));

    const Transform random(smooth_velocity(g, 0.05, 9));
    const ScalarField dr = det_jacobian(random);
    double mr = 0.0;
    for (double v : dr.values()) mr += v;
    CHECK(mr / g.size() == doctest::Approx(1.0).epsilon(1e-12));

    VectorField fold(g);
    for (std::size_t p = 0; p < g.size(); ++p) fold.at(0, p) = 0.3 * std::sin(kTwoPi * g.position(p)[0]);
    const ScalarField df = det_jacobian(Transform(fold));
    CHECK(*std::ranges::min_element(df.values()) < 0.0);
}

TEST_CASE("dual pairing") {
    GridSpec g{16, 8};
    const VectorField m = smooth_velocity(g, 1.0, 10), v = smooth_velocity(g, 1.0, 11);
    CHECK(dual_pairing(m, VectorField(g)) == 0.0);
    const std::vector<double> e{1.0, 0.0};
    const VectorField one = VectorField::constant(g, e);
    CHECK(dual_pairing(one, one) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dual_pairing(m, v) == doctest::Approx(dual_pairing(v, m)).epsilon(1e-12));
    CHECK(dual_pairing(2.5 * m, v) == doctest::Approx(2.5 * dual_pairing(m, v)).epsilon(1e-12));
    const VectorField w = smooth_velocity(g, 1.0, 12);
    CHECK(dual_pairing(m + w, v) == doctest::Approx(dual_pairing(m, v) + dual_pairing(w, v)).epsilon(1e-12));
    CHECK_THROWS_AS(dual_pairing(m, VectorField(GridSpec{8, 8})), GridMismatch);
}

TEST_CASE("warp scatter is the adjoint of warping") {
    GridSpec g{16, 12};
    const MultiField f = smooth_random(g, 2, 1.0, 13);
    const MultiField r = testing::white_noise(g, 2, 14);
    const Transform phi(smooth_velocity(g, 0.2, 15));
    const double lhs = dot(warp(f, phi), r);
    MultiField back(g, 2);
    warp_scatter_add(phi, r, back);
    CHECK(lhs == doctest::Approx(dot(f, back)).epsilon(1e-12));
}

TEST_CASE("warp displacement sensitivity matches central differences") {
    GridSpec g{16, 16};
    const MultiField f = smooth_random(g, 2, 1.0, 16);
    const MultiField r = testing::white_noise(g, 2, 17);
    const VectorField u = smooth_velocity(g, 0.1, 18);
    const VectorField dir = smooth_velocity(g, 1.0, 19);
    const VectorField gu = warp_displacement_vjp(f, Transform(u), r);
    const double eps = 1e-7;
    const double fp = dot(warp(f, Transform(u + eps * dir)), r);
    const double fm = dot(warp(f, Transform(u - eps * dir)), r);
    CHECK((fp - fm) / (2 * eps) == doctest::Approx(dot(gu, dir)).epsilon(1e-5));
}

}
