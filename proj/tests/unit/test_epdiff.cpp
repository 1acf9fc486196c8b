#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "geoflow/epdiff.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/field_ops.hpp"
#include "helpers.hpp"

using namespace geoflow;
using geoflow::testing::dot;
using geoflow::testing::smooth_velocity;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_diff(const MultiField &a, const MultiField &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// Dense reference operators on a 2D grid, built without the FFT.
struct DenseOracle {
    GridSpec g;
    double alpha;
    int c;
    std::vector<double> kernel; // K as a circular convolution kernel

    DenseOracle(GridSpec grid, double a, int e) : g(grid), alpha(a), c(e), kernel(grid.size()) {
        const int n0 = g.dim(0), n1 = g.dim(1);
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) {
                double s = 0.0;
                for (int k0 = 0; k0 < n0; ++k0) {
                    for (int k1 = 0; k1 < n1; ++k1) {
                        const double lap = 2 * (1 - std::cos(kTwoPi * k0 / n0)) + 2 * (1 - std::cos(kTwoPi * k1 / n1));
                        s += std::cos(kTwoPi * (double(k0) * i / n0 + double(k1) * j / n1)) / std::pow(1 + alpha * lap, c);
                    }
                }
                kernel[g.index(i, j)] = s / g.size();
            }
        }
    }

    int wrap(int i, int n) const { return ((i % n) + n) % n; }
    double at(std::span<const double> f, int i, int j) const { return f[g.index(wrap(i, g.dim(0)), wrap(j, g.dim(1)))]; }

    std::vector<double> apply_k(std::span<const double> f) const {
        std::vector<double> out(g.size());
        for (int i = 0; i < g.dim(0); ++i) {
            for (int j = 0; j < g.dim(1); ++j) {
                double s = 0.0;
                for (int a = 0; a < g.dim(0); ++a) {
                    for (int b = 0; b < g.dim(1); ++b) s += at(kernel, i - a, j - b) * f[g.index(a, b)];
                }
                out[g.index(i, j)] = s;
            }
        }
        return out;
    }

    std::vector<double> apply_l(std::span<const double> f) const {
        std::vector<double> u(f.begin(), f.end());
        for (int r = 0; r < c; ++r) {
            std::vector<double> next(g.size());
            for (int i = 0; i < g.dim(0); ++i) {
                for (int j = 0; j < g.dim(1); ++j) {
                    const double lap = at(u, i + 1, j) + at(u, i - 1, j) + at(u, i, j + 1) + at(u, i, j - 1) - 4 * at(u, i, j);
                    next[g.index(i, j)] = at(u, i, j) - alpha * lap;
                }
            }
            u = std::move(next);
        }
        return u;
    }

    // Central difference along axis in torus units.
    std::vector<double> diff(std::span<const double> f, int axis) const {
        std::vector<double> out(g.size());
        const double h = g.spacing(axis);
        for (int i = 0; i < g.dim(0); ++i) {
            for (int j = 0; j < g.dim(1); ++j) {
                out[g.index(i, j)] = axis == 0 ? (at(f, i + 1, j) - at(f, i - 1, j)) / (2 * h)
                                               : (at(f, i, j + 1) - at(f, i, j - 1)) / (2 * h);
            }
        }
        return out;
    }

    // -K[(Dv)^T m + (Dm) v + m div v] when conservative is false, with div(m (x) v) otherwise.
    VectorField rhs(const VectorField &v, bool conservative) const {
        const std::size_t n = g.size();
        std::vector<std::vector<double>> m(2), dv(4), dm(4);
        for (int i = 0; i < 2; ++i) m[i] = apply_l(v.component(i));
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                dv[i * 2 + j] = diff(v.component(i), j);
                dm[i * 2 + j] = diff(m[i], j);
            }
        }
        VectorField out(g);
        for (int i = 0; i < 2; ++i) {
            std::vector<double> a(n, 0.0);
            for (std::size_t p = 0; p < n; ++p) {
                for (int j = 0; j < 2; ++j) a[p] += dv[j * 2 + i][p] * m[j][p];
            }
            if (conservative) {
                for (int j = 0; j < 2; ++j) {
                    std::vector<double> flux(n);
                    for (std::size_t p = 0; p < n; ++p) flux[p] = m[i][p] * v.component(j)[p];
                    const auto d = diff(flux, j);
                    for (std::size_t p = 0; p < n; ++p) a[p] += d[p];
                }
            } else {
                for (std::size_t p = 0; p < n; ++p) {
                    const double div = dv[0][p] + dv[3][p];
                    for (int j = 0; j < 2; ++j) a[p] += dm[i * 2 + j][p] * v.component(j)[p];
                    a[p] += m[i][p] * div;
                }
            }
            const auto ka = apply_k(a);
            for (std::size_t p = 0; p < n; ++p) out.at(i, p) = -ka[p];
        }
        return out;
    }
};

VectorField bump(const GridSpec &g, double amp, Point centre, double width, std::array<double, 2> dir) {
    VectorField v(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Point x = g.position(p);
        double r2 = 0.0;
        for (int a = 0; a < 2; ++a) {
            double d = x[a] - centre[a];
            d -= std::round(d);
            r2 += d * d;
        }
        const double b = amp * std::exp(-r2 / (2 * width * width));
        v.at(0, p) = b * dir[0];
        v.at(1, p) = b * dir[1];
    }
    return v;
}

double relative_drift(const VectorField &v0, ShootingConfig cfg) {
    const FourierMultiplier m = cfg.multiplier(v0.grid());
    const auto vs = shoot_velocities(v0, cfg, m);
    const double e0 = kinetic_energy(vs.front(), m);
    return std::abs(kinetic_energy(vs.back(), m) - e0) / e0;
}

} // namespace

TEST_SUITE("epdiff") {

TEST_CASE("rhs vanishes on zero and constant velocities") {
    GridSpec g{16, 16};
    const FourierMultiplier m(g, 3.0, 3);
    CHECK(epdiff_rhs(VectorField(g), m).max_abs() == 0.0);
    const std::vector<double> c{0.05, -0.02};
    CHECK(epdiff_rhs(VectorField::constant(g, c), m).max_abs() < 1e-15);
}

TEST_CASE("rhs matches a dense-operator oracle") {
    GridSpec g{32, 32};
    const DenseOracle oracle(g, 3.0, 3);
    const FourierMultiplier m(g, 3.0, 3);
    const VectorField v = bump(g, 0.05, {0.4, 0.55, 0}, 0.12, {0.8, -0.6});
    const VectorField rhs = epdiff_rhs(v, m);
    const VectorField ref = oracle.rhs(v, true);
    CHECK(rhs.max_abs() > 0.0);
    CHECK(max_diff(rhs, ref) < 1e-10 * ref.max_abs());
    // The advective pair written term by term differs only by discretization error.
    const VectorField expanded = oracle.rhs(v, false);
    CHECK(max_diff(expanded, ref) < 0.05 * ref.max_abs());
}

TEST_CASE("rhs vjp is the adjoint of its linearization") {
    GridSpec g{16, 16};
    const FourierMultiplier m(g, 3.0, 3);
    const VectorField v = smooth_velocity(g, 0.05, 1), w = smooth_velocity(g, 1.0, 2);
    const VectorField r(testing::white_noise(g, 2, 3));
    const double eps = 1e-6;
    const double fd = (dot(epdiff_rhs(v + eps * w, m), r) - dot(epdiff_rhs(v - eps * w, m), r)) / (2 * eps);
    CHECK(fd == doctest::Approx(dot(epdiff_rhs_vjp(v, m, r), w)).epsilon(1e-7));
}

TEST_CASE("shooting zero and constant velocities") {
    GridSpec g{16, 16};
    ShootingConfig cfg;
    const Trajectory zero = shoot(VectorField(g), cfg);
    CHECK(zero.velocities.size() == 11);
    CHECK(zero.transforms.size() == 11);
    for (const auto &v : zero.velocities) CHECK(v.max_abs() == 0.0);
    for (const auto &t : zero.transforms) CHECK(t.is_identity());
    const ScalarField det = det_jacobian(zero.transforms.back());
    for (double d : det.values()) CHECK(d == 1.0);

    const std::vector<double> c{0.1, -0.05};
    const Trajectory tr = shoot(VectorField::constant(g, c), cfg);
    for (const auto &v : tr.velocities) CHECK(max_diff(v, VectorField::constant(g, c)) < 1e-14);
    const VectorField &u = tr.transforms.back().displacement;
    CHECK(max_diff(u, VectorField::constant(g, c)) < 1e-12);
}

TEST_CASE("kinetic energy drift converges at the integrator order") {
    GridSpec g{32, 32};
    const VectorField v0 = smooth_velocity(g, 0.05, 4);
    ShootingConfig cfg;
    cfg.steps = 10;
    const double e10 = relative_drift(v0, cfg);
    cfg.steps = 40;
    const double e40 = relative_drift(v0, cfg);
    CHECK(std::log(e10 / e40) / std::log(4.0) == doctest::Approx(1.0).epsilon(0.15));

    cfg.integrator = Integrator::RK4;
    cfg.steps = 5;
    const double r5 = relative_drift(v0, cfg);
    cfg.steps = 10;
    const double r10 = relative_drift(v0, cfg);
    CHECK(std::log2(r5 / r10) > 3.5);
}

TEST_CASE("shooting is deterministic and positive for small velocities") {
    GridSpec g{32, 32};
    const VectorField v0 = smooth_velocity(g, 0.02, 5);
    const Trajectory a = shoot(v0, {}), b = shoot(v0, {});
    for (std::size_t t = 0; t < a.velocities.size(); ++t) {
        CHECK(max_diff(a.velocities[t], b.velocities[t]) == 0.0);
        CHECK(max_diff(a.transforms[t].displacement, b.transforms[t].displacement) == 0.0);
    }
    const ScalarField det = det_jacobian(a.transforms.back());
    CHECK(*std::ranges::min_element(det.values()) > 0.0);
}

TEST_CASE("non-finite velocities and bad configs fail loudly") {
    GridSpec g{16, 16};
    VectorField v0(g);
    v0.at(0, 3) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(shoot(v0, {}), BlowUpError);
    ShootingConfig bad;
    bad.steps = 0;
    CHECK_THROWS_AS(shoot(VectorField(g), bad), std::invalid_argument);
    CHECK_THROWS_AS(integrate_flow({}, 0.1), std::invalid_argument);
}

TEST_CASE("integrate_flow: identities, translations, reversibility") {
    GridSpec g{16, 16};
    std::vector<VectorField> zeros(4, VectorField(g));
    const auto id = integrate_flow(zeros, 0.25);
    CHECK(id.size() == 5);
    for (const auto &t : id) CHECK(t.is_identity());

    const std::vector<double> c{0.2, 0.04};
    std::vector<VectorField> cst(5, VectorField::constant(g, c));
    const auto tr = integrate_flow(cst, 0.1);
    for (std::size_t t = 0; t < tr.size(); ++t) {
        for (std::size_t p = 0; p < g.size(); p += 17) {
            CHECK(tr[t].displacement.at(0, p) == doctest::Approx(0.02 * t).epsilon(1e-12));
            CHECK(tr[t].displacement.at(1, p) == doctest::Approx(0.004 * t).epsilon(1e-12));
        }
    }

    GridSpec g2{32, 32};
    const VectorField v = smooth_velocity(g2, 0.2, 6, 2);
    std::vector<double> residual;
    for (int n : {10, 20, 40}) {
        std::vector<VectorField> list(n, v);
        for (int k = 0; k < n; ++k) list.push_back(-1.0 * v);
        residual.push_back(integrate_flow(list, 1.0 / n).back().displacement.max_abs());
    }
    CHECK(residual[0] < 0.2 * v.max_abs());
    CHECK(residual[1] < 0.6 * residual[0]);
    CHECK(residual[2] < 0.6 * residual[1]);
}

TEST_CASE("integrate_flow vjp matches central differences") {
    GridSpec g{16, 16};
    std::vector<VectorField> vs;
    for (int t = 0; t < 4; ++t) vs.push_back(smooth_velocity(g, 0.3, 10 + t, 2));
    const auto phis = integrate_flow(vs, 0.25);
    const VectorField r(testing::white_noise(g, 2, 20));
    const auto grads = integrate_flow_vjp(vs, phis, 0.25, r);
    REQUIRE(grads.size() == 4);
    const double eps = 1e-7;
    for (int t : {0, 3}) {
        const VectorField w = smooth_velocity(g, 1.0, 30 + t);
        auto plus = vs, minus = vs;
        plus[t] += eps * w;
        minus[t] -= eps * w;
        const double fd = (dot(integrate_flow(plus, 0.25).back().displacement, r) -
                           dot(integrate_flow(minus, 0.25).back().displacement, r)) /
                          (2 * eps);
        CHECK(fd == doctest::Approx(dot(grads[t], w)).epsilon(1e-5));
    }
}

TEST_CASE("shoot vjp matches central differences for both integrators") {
    GridSpec g{16, 16};
    for (Integrator integ : {Integrator::Euler, Integrator::RK4}) {
        ShootingConfig cfg;
        cfg.steps = 4;
        cfg.integrator = integ;
        const FourierMultiplier m = cfg.multiplier(g);
        const VectorField v0 = smooth_velocity(g, 0.05, 40), w = smooth_velocity(g, 1.0, 41);
        std::vector<VectorField> up;
        for (int t = 0; t <= 4; ++t) up.emplace_back(testing::white_noise(g, 2, 50 + t));
        auto objective = [&](const VectorField &x) {
            const auto vs = shoot_velocities(x, cfg, m);
            double s = 0.0;
            for (std::size_t t = 0; t < vs.size(); ++t) s += dot(vs[t], up[t]);
            return s;
        };
        const auto vs = shoot_velocities(v0, cfg, m);
        const VectorField grad = shoot_vjp(vs, cfg, m, up);
        const double eps = 1e-6;
        const double fd = (objective(v0 + eps * w) - objective(v0 - eps * w)) / (2 * eps);
        CHECK(fd == doctest::Approx(dot(grad, w)).epsilon(1e-6));
    }
}

TEST_CASE("deform_along: copies, translations, growing area") {
    GridSpec g{32, 32};
    ScalarField s(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Point x = g.position(p);
        s[p] = std::hypot(x[0] - 0.5, x[1] - 0.5) < 0.2 ? 1.0 : 0.0;
    }
    const auto copies = deform_along(s, shoot(VectorField(g), {}));
    CHECK(copies.size() == 11);
    for (const auto &c : copies) CHECK(max_diff(c, s) == 0.0);

    // One grid cell per step along axis 1.
    const std::vector<double> shift{0.0, 10.0 / 32};
    const auto moved = deform_along(s, shoot(VectorField::constant(g, shift), {}));
    for (int t = 0; t <= 10; ++t) {
        for (int i = 0; i < 32; ++i) {
            for (int j = 0; j < 32; ++j) {
                CHECK(moved[t][g.index(i, j)] == doctest::Approx(s[g.index(i, (j + t) % 32)]).epsilon(1e-9));
            }
        }
    }

    // Sampling points drawn toward the centre pull the disk outward.
    VectorField v0(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Point x = g.position(p);
        const double dx = x[0] - 0.5, dy = x[1] - 0.5;
        const double b = -0.3 * std::exp(-(dx * dx + dy * dy) / (2 * 0.2 * 0.2));
        v0.at(0, p) = b * dx;
        v0.at(1, p) = b * dy;
    }
    const auto grown = deform_along(s, shoot(v0, {}));
    double prev = s.sum_squares();
    for (std::size_t t = 1; t < grown.size(); ++t) {
        double area = 0.0;
        for (double v : grown[t].values()) area += v;
        CHECK(area > prev);
        prev = area;
    }
}

}
