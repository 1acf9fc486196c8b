#include "geoflow/field_ops.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "geoflow/errors.hpp"

namespace geoflow {
namespace {

// Corner indices and weights of the multilinear stencil around one query point.
struct Stencil {
    int corners = 0;
    std::array<std::size_t, 8> index{};
    std::array<double, 8> weight{};
    // d(weight)/d(position_a), physical units.
    std::array<std::array<double, 8>, 3> dweight{};
};

// q holds index-space coordinates (position / spacing).
template <bool WithGradient>
Stencil locate(const GridSpec &g, const std::array<double, 3> &q) {
    const int nd = g.ndim();
    std::array<std::size_t, 3> lo{}, hi{};
    std::array<double, 3> frac{};
    for (int a = 0; a < nd; ++a) {
        if (!std::isfinite(q[a])) throw std::invalid_argument("interpolate: non-finite position");
        const double n = g.dim(a);
        double x = q[a] - std::floor(q[a] / n) * n;
        if (x >= n) x -= n;
        auto i0 = static_cast<int>(x);
        if (i0 >= g.dim(a)) i0 = g.dim(a) - 1;
        frac[a] = x - i0;
        lo[a] = static_cast<std::size_t>(i0) * g.stride(a);
        hi[a] = static_cast<std::size_t>(i0 + 1 == g.dim(a) ? 0 : i0 + 1) * g.stride(a);
    }
    Stencil s;
    s.corners = 1 << nd;
    for (int k = 0; k < s.corners; ++k) {
        std::size_t idx = 0;
        double w = 1.0;
        for (int a = 0; a < nd; ++a) {
            const bool up = (k >> (nd - 1 - a)) & 1;
            idx += up ? hi[a] : lo[a];
            w *= up ? frac[a] : 1.0 - frac[a];
        }
        s.index[k] = idx;
        s.weight[k] = w;
        if constexpr (WithGradient) {
            for (int a = 0; a < nd; ++a) {
                double d = 1.0;
                for (int b = 0; b < nd; ++b) {
                    const bool up = (k >> (nd - 1 - b)) & 1;
                    if (b == a) d *= (up ? 1.0 : -1.0) / g.spacing(b);
                    else d *= up ? frac[b] : 1.0 - frac[b];
                }
                s.dweight[a][k] = d;
            }
        }
    }
    return s;
}

std::array<double, 3> node_query(const GridSpec &g, std::size_t p, const VectorField &u) {
    const auto c = g.coords(p);
    std::array<double, 3> q{0.0, 0.0, 0.0};
    for (int a = 0; a < g.ndim(); ++a) q[a] = c[a] + u.at(a, p) / g.spacing(a);
    return q;
}

double apply(const Stencil &s, std::span<const double> f) {
    double v = 0.0;
    for (int k = 0; k < s.corners; ++k) v += s.weight[k] * f[s.index[k]];
    return v;
}

} // namespace

std::vector<double> interpolate(const ScalarField &f, std::span<const Point> positions) {
    const GridSpec &g = f.grid();
    std::vector<double> out;
    out.reserve(positions.size());
    for (const Point &p : positions) {
        std::array<double, 3> q{0.0, 0.0, 0.0};
        for (int a = 0; a < g.ndim(); ++a) q[a] = p[a] / g.spacing(a);
        out.push_back(apply(locate<false>(g, q), f.values()));
    }
    return out;
}

MultiField warp(const MultiField &f, const Transform &phi) {
    require_same_grid(f.grid(), phi.grid(), "warp");
    const GridSpec &g = f.grid();
    MultiField out(g, f.channels());
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Stencil s = locate<false>(g, node_query(g, p, phi.displacement));
        for (int c = 0; c < f.channels(); ++c) out.at(c, p) = apply(s, f.channel(c));
    }
    return out;
}

ScalarField warp(const ScalarField &f, const Transform &phi) {
    return ScalarField(warp(static_cast<const MultiField &>(f), phi));
}

Transform compose(const Transform &phi, const Transform &psi) {
    require_same_grid(phi.grid(), psi.grid(), "compose");
    VectorField u = VectorField(warp(static_cast<const MultiField &>(phi.displacement), psi));
    u += psi.displacement;
    return Transform(std::move(u));
}

void central_difference(std::span<const double> f, const GridSpec &g, int axis, std::span<double> out) {
    const int n = g.dim(axis);
    const std::size_t stride = g.stride(axis);
    const double inv = 1.0 / (2.0 * g.spacing(axis));
    for (std::size_t p = 0; p < g.size(); ++p) {
        const int i = static_cast<int>((p / stride) % n);
        const std::size_t base = p - static_cast<std::size_t>(i) * stride;
        const std::size_t next = base + static_cast<std::size_t>(i + 1 == n ? 0 : i + 1) * stride;
        const std::size_t prev = base + static_cast<std::size_t>(i == 0 ? n - 1 : i - 1) * stride;
        out[p] = (f[next] - f[prev]) * inv;
    }
}

JacobianField jacobian(const VectorField &v) {
    JacobianField jac(v.grid());
    for (int i = 0; i < v.ndim(); ++i) {
        for (int j = 0; j < v.ndim(); ++j) central_difference(v.component(i), v.grid(), j, jac.entry(i, j));
    }
    return jac;
}

ScalarField divergence(const VectorField &v) {
    ScalarField div(v.grid());
    std::vector<double> tmp(v.grid().size());
    for (int i = 0; i < v.ndim(); ++i) {
        central_difference(v.component(i), v.grid(), i, tmp);
        for (std::size_t p = 0; p < tmp.size(); ++p) div[p] += tmp[p];
    }
    return div;
}

ScalarField det_jacobian(const Transform &phi) {
    const JacobianField du = jacobian(phi.displacement);
    const GridSpec &g = phi.grid();
    ScalarField det(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto e = [&](int i, int j) { return (i == j ? 1.0 : 0.0) + du.entry(i, j)[p]; };
        if (g.ndim() == 2) {
            det[p] = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
        } else {
            det[p] = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
                     e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
                     e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        }
    }
    return det;
}

double dual_pairing(const VectorField &m, const VectorField &v) {
    require_same_grid(m.grid(), v.grid(), "dual_pairing");
    double s = 0.0;
    const auto a = m.data();
    const auto b = v.data();
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s * m.grid().cell_volume();
}

VectorField warp_displacement_vjp(const MultiField &f, const Transform &phi, const MultiField &upstream) {
    require_same_grid(f.grid(), phi.grid(), "warp_displacement_vjp");
    require_same_grid(f.grid(), upstream.grid(), "warp_displacement_vjp");
    if (upstream.channels() != f.channels()) throw ShapeError("warp_displacement_vjp: channel mismatch");
    const GridSpec &g = f.grid();
    VectorField ubar(g);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Stencil s = locate<true>(g, node_query(g, p, phi.displacement));
        for (int c = 0; c < f.channels(); ++c) {
            const double up = upstream.at(c, p);
            if (up == 0.0) continue;
            const auto fc = f.channel(c);
            for (int a = 0; a < g.ndim(); ++a) {
                double d = 0.0;
                for (int k = 0; k < s.corners; ++k) d += s.dweight[a][k] * fc[s.index[k]];
                ubar.at(a, p) += up * d;
            }
        }
    }
    return ubar;
}

void warp_scatter_add(const Transform &phi, const MultiField &upstream, MultiField &target, double scale) {
    require_same_grid(target.grid(), phi.grid(), "warp_scatter_add");
    require_same_grid(target.grid(), upstream.grid(), "warp_scatter_add");
    if (upstream.channels() != target.channels()) throw ShapeError("warp_scatter_add: channel mismatch");
    const GridSpec &g = target.grid();
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Stencil s = locate<false>(g, node_query(g, p, phi.displacement));
        for (int c = 0; c < target.channels(); ++c) {
            const double up = scale * upstream.at(c, p);
            if (up == 0.0) continue;
            auto tc = target.channel(c);
            for (int k = 0; k < s.corners; ++k) tc[s.index[k]] += s.weight[k] * up;
        }
    }
}

} // namespace geoflow
