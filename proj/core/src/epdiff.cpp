#include "geoflow/epdiff.hpp"

#include <atomic>
#include <stdexcept>

#include "geoflow/errors.hpp"
#include "geoflow/field_ops.hpp"

namespace geoflow {
namespace {

std::atomic<std::uint64_t> g_rhs_calls{0};

// Adds sum_j D_j(a_j) to out where a_j are node-wise arrays.
void add_divergence(const GridSpec &g, const std::vector<std::vector<double>> &a, std::span<double> out,
                    std::vector<double> &tmp) {
    for (int j = 0; j < g.ndim(); ++j) {
        central_difference(a[j], g, j, tmp);
        for (std::size_t p = 0; p < out.size(); ++p) out[p] += tmp[p];
    }
}

} // namespace

void ShootingConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("ShootingConfig: steps must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("ShootingConfig: alpha must be > 0");
    if (exponent < 1) throw std::invalid_argument("ShootingConfig: exponent must be >= 1");
    if (!(cell_size > 0.0)) throw std::invalid_argument("ShootingConfig: cell size must be > 0");
}

VectorField epdiff_rhs(const VectorField &v, const FourierMultiplier &mult) {
    g_rhs_calls.fetch_add(1, std::memory_order_relaxed);
    const GridSpec &g = v.grid();
    const int d = g.ndim();
    const std::size_t n = g.size();
    const VectorField m = apply_L(v, mult);
    const JacobianField dv = jacobian(v);

    VectorField a(g);
    std::vector<std::vector<double>> flux(d, std::vector<double>(n));
    std::vector<double> tmp(n);
    for (int i = 0; i < d; ++i) {
        auto ai = a.component(i);
        // (Dv)^T m
        for (int j = 0; j < d; ++j) {
            const auto dji = dv.entry(j, i);
            const auto mj = m.component(j);
            for (std::size_t p = 0; p < n; ++p) ai[p] += dji[p] * mj[p];
        }
        // div(m_i v)
        const auto mi = m.component(i);
        for (int j = 0; j < d; ++j) {
            const auto vj = v.component(j);
            for (std::size_t p = 0; p < n; ++p) flux[j][p] = mi[p] * vj[p];
        }
        add_divergence(g, flux, ai, tmp);
    }
    VectorField rhs = apply_K(a, mult);
    rhs *= -1.0;
    return rhs;
}

VectorField epdiff_rhs_vjp(const VectorField &v, const FourierMultiplier &mult, const VectorField &upstream) {
    g_rhs_calls.fetch_add(1, std::memory_order_relaxed);
    const GridSpec &g = v.grid();
    require_same_grid(g, upstream.grid(), "epdiff_rhs_vjp");
    const int d = g.ndim();
    const std::size_t n = g.size();

    const VectorField m = apply_L(v, mult);
    const JacobianField dv = jacobian(v);
    VectorField w = apply_K(upstream, mult);
    w *= -1.0;
    const JacobianField dw = jacobian(w);

    VectorField vbar(g);
    VectorField mbar(g);
    std::vector<std::vector<double>> flux(d, std::vector<double>(n));
    std::vector<double> tmp(n);
    for (int j = 0; j < d; ++j) {
        auto vb = vbar.component(j);
        auto mb = mbar.component(j);
        const auto mj = m.component(j);
        // (Dv)^T m: vbar_j -= sum_i D_i(w_i m_j); mbar_j += sum_i w_i D_i v_j
        for (int i = 0; i < d; ++i) {
            const auto wi = w.component(i);
            for (std::size_t p = 0; p < n; ++p) flux[i][p] = wi[p] * mj[p];
        }
        std::fill(tmp.begin(), tmp.end(), 0.0);
        std::vector<double> div(n, 0.0);
        add_divergence(g, flux, div, tmp);
        for (std::size_t p = 0; p < n; ++p) vb[p] -= div[p];
        for (int i = 0; i < d; ++i) {
            const auto wi = w.component(i);
            const auto dvji = dv.entry(j, i);
            for (std::size_t p = 0; p < n; ++p) mb[p] += wi[p] * dvji[p];
        }
        // div(m (x) v): mbar_j -= sum_k (D_k w_j) v_k; vbar_j -= sum_i (D_j w_i) m_i
        for (int k = 0; k < d; ++k) {
            const auto dwjk = dw.entry(j, k);
            const auto vk = v.component(k);
            for (std::size_t p = 0; p < n; ++p) mb[p] -= dwjk[p] * vk[p];
        }
        for (int i = 0; i < d; ++i) {
            const auto dwij = dw.entry(i, j);
            const auto mi = m.component(i);
            for (std::size_t p = 0; p < n; ++p) vb[p] -= dwij[p] * mi[p];
        }
    }
    vbar += apply_L(mbar, mult);
    return vbar;
}

std::uint64_t epdiff_rhs_call_count() noexcept { return g_rhs_calls.load(std::memory_order_relaxed); }

double kinetic_energy(const VectorField &v, const FourierMultiplier &mult) {
    return dual_pairing(apply_L(v, mult), v);
}

std::vector<VectorField> shoot_velocities(const VectorField &v0, const ShootingConfig &cfg,
                                          const FourierMultiplier &mult) {
    cfg.validate();
    require_same_grid(v0.grid(), mult.grid(), "shoot");
    const double dt = cfg.step_size();
    std::vector<VectorField> vs;
    vs.reserve(cfg.steps + 1);
    vs.push_back(v0);
    for (int t = 0; t < cfg.steps; ++t) {
        const VectorField &v = vs.back();
        VectorField next = v;
        if (cfg.integrator == Integrator::Euler) {
            next.axpy(dt, epdiff_rhs(v, mult));
        } else {
            const VectorField k1 = epdiff_rhs(v, mult);
            VectorField s = v;
            s.axpy(0.5 * dt, k1);
            const VectorField k2 = epdiff_rhs(s, mult);
            s = v;
            s.axpy(0.5 * dt, k2);
            const VectorField k3 = epdiff_rhs(s, mult);
            s = v;
            s.axpy(dt, k3);
            const VectorField k4 = epdiff_rhs(s, mult);
            next.axpy(dt / 6.0, k1).axpy(dt / 3.0, k2).axpy(dt / 3.0, k3).axpy(dt / 6.0, k4);
        }
        if (!next.all_finite()) throw BlowUpError("shoot: non-finite velocity", t + 1);
        vs.push_back(std::move(next));
    }
    return vs;
}

Trajectory shoot(const VectorField &v0, const ShootingConfig &cfg) {
    cfg.validate();
    const FourierMultiplier mult = cfg.multiplier(v0.grid());
    Trajectory traj;
    traj.velocities = shoot_velocities(v0, cfg, mult);
    traj.transforms = integrate_flow(std::span(traj.velocities).first(cfg.steps), cfg.step_size());
    for (std::size_t t = 0; t < traj.transforms.size(); ++t) {
        if (!traj.transforms[t].displacement.all_finite()) {
            throw BlowUpError("shoot: non-finite displacement", static_cast<int>(t));
        }
    }
    return traj;
}

std::vector<Transform> integrate_flow(std::span<const VectorField> velocities, double dt) {
    if (velocities.empty()) throw std::invalid_argument("integrate_flow: velocity list is empty");
    const GridSpec &g = velocities.front().grid();
    std::vector<Transform> phis;
    phis.reserve(velocities.size() + 1);
    phis.push_back(Transform::identity(g));
    for (const VectorField &v : velocities) {
        require_same_grid(g, v.grid(), "integrate_flow");
        VectorField u = VectorField(warp(static_cast<const MultiField &>(v), phis.back()));
        u *= dt;
        u += phis.back().displacement;
        phis.emplace_back(std::move(u));
    }
    return phis;
}

std::vector<VectorField> integrate_flow_vjp(std::span<const VectorField> velocities,
                                            std::span<const Transform> transforms, double dt,
                                            const VectorField &final_upstream) {
    if (transforms.size() != velocities.size() + 1) {
        throw std::invalid_argument("integrate_flow_vjp: need one more transform than velocities");
    }
    const GridSpec &g = final_upstream.grid();
    std::vector<VectorField> vbar(velocities.size(), VectorField(g));
    VectorField ubar = final_upstream;
    for (std::size_t t = velocities.size(); t-- > 0;) {
        warp_scatter_add(transforms[t], ubar, vbar[t], dt);
        VectorField du = warp_displacement_vjp(velocities[t], transforms[t], ubar);
        ubar.axpy(dt, du);
    }
    return vbar;
}

VectorField shoot_vjp(std::span<const VectorField> velocities, const ShootingConfig &cfg,
                      const FourierMultiplier &mult, std::span<const VectorField> upstream) {
    if (velocities.empty()) throw std::invalid_argument("shoot_vjp: empty trajectory");
    const GridSpec &g = velocities.front().grid();
    const double dt = cfg.step_size();
    const std::size_t steps = velocities.size() - 1;
    auto upstream_at = [&](std::size_t t) -> const VectorField * {
        return t < upstream.size() ? &upstream[t] : nullptr;
    };

    VectorField bar(g);
    if (const auto *u = upstream_at(steps)) bar += *u;
    for (std::size_t t = steps; t-- > 0;) {
        const VectorField &v = velocities[t];
        VectorField prev = bar;
        if (cfg.integrator == Integrator::Euler) {
            prev.axpy(dt, epdiff_rhs_vjp(v, mult, bar));
        } else {
            // Recompute the stages, then walk them backwards.
            const VectorField k1 = epdiff_rhs(v, mult);
            VectorField s2 = v;
            s2.axpy(0.5 * dt, k1);
            const VectorField k2 = epdiff_rhs(s2, mult);
            VectorField s3 = v;
            s3.axpy(0.5 * dt, k2);
            const VectorField k3 = epdiff_rhs(s3, mult);
            VectorField s4 = v;
            s4.axpy(dt, k3);

            VectorField k1bar = (dt / 6.0) * bar;
            VectorField k2bar = (dt / 3.0) * bar;
            VectorField k3bar = (dt / 3.0) * bar;
            const VectorField k4bar = (dt / 6.0) * bar;

            const VectorField a4 = epdiff_rhs_vjp(s4, mult, k4bar);
            prev += a4;
            k3bar.axpy(dt, a4);
            const VectorField a3 = epdiff_rhs_vjp(s3, mult, k3bar);
            prev += a3;
            k2bar.axpy(0.5 * dt, a3);
            const VectorField a2 = epdiff_rhs_vjp(s2, mult, k2bar);
            prev += a2;
            k1bar.axpy(0.5 * dt, a2);
            prev += epdiff_rhs_vjp(v, mult, k1bar);
        }
        if (const auto *u = upstream_at(t)) prev += *u;
        bar = std::move(prev);
    }
    return bar;
}

std::vector<ScalarField> deform_along(const ScalarField &source, const Trajectory &traj) {
    std::vector<ScalarField> out;
    out.reserve(traj.transforms.size());
    for (const Transform &phi : traj.transforms) out.push_back(warp(source, phi));
    return out;
}

} // namespace geoflow
