#include "geoflow/lddmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

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

struct Forward {
    std::vector<VectorField> velocities;
    std::vector<Transform> transforms;
    ScalarField warped;
    EnergyTerms terms;
};

Forward run_forward(const VectorField &v0, const RegistrationProblem &prob, const FourierMultiplier &mult) {
    Forward f;
    f.velocities = shoot_velocities(v0, prob.shooting, mult);
    f.transforms = integrate_flow(std::span(f.velocities).first(prob.shooting.steps), prob.shooting.step_size());
    f.warped = warp(prob.source, f.transforms.back());
    f.terms.regularity = kinetic_energy(v0, mult);
    f.terms.matching = prob.lambda * ssd(f.warped, prob.target);
    return f;
}

} // namespace

void RegistrationProblem::validate() const {
    require_same_grid(source.grid(), target.grid(), "RegistrationProblem");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("RegistrationProblem: lambda must be > 0");
    shooting.validate();
}

EnergyTerms energy(const VectorField &v0, const RegistrationProblem &prob) {
    prob.validate();
    require_same_grid(v0.grid(), prob.source.grid(), "energy");
    const FourierMultiplier mult = prob.shooting.multiplier(v0.grid());
    return run_forward(v0, prob, mult).terms;
}

EnergyGradient grad_energy(const VectorField &v0, const RegistrationProblem &prob) {
    prob.validate();
    require_same_grid(v0.grid(), prob.source.grid(), "grad_energy");
    const GridSpec &g = v0.grid();
    const FourierMultiplier mult = prob.shooting.multiplier(g);
    const Forward fwd = run_forward(v0, prob, mult);

    // d(matching)/d(warped) = 2 lambda cv (S(phi) - T)
    ScalarField resid = fwd.warped;
    resid -= prob.target;
    resid *= 2.0 * prob.lambda * g.cell_volume();
    const VectorField ubar = warp_displacement_vjp(prob.source, fwd.transforms.back(), resid);
    const std::span<const VectorField> used = std::span(fwd.velocities).first(prob.shooting.steps);
    const std::vector<VectorField> vbar = integrate_flow_vjp(used, fwd.transforms, prob.shooting.step_size(), ubar);

    EnergyGradient out;
    out.energy = fwd.terms;
    out.gradient = shoot_vjp(fwd.velocities, prob.shooting, mult, vbar);
    // d(L v0, v0)/dv0 = 2 cv L v0
    out.gradient.axpy(2.0 * g.cell_volume(), apply_L(v0, mult));
    return out;
}

RegistrationResult register_optimize(const RegistrationProblem &prob, const RegisterOptions &opts) {
    prob.validate();
    if (opts.iterations < 1) throw std::invalid_argument("register_optimize: iterations must be >= 1");
    const GridSpec &g = prob.source.grid();
    const FourierMultiplier mult = prob.shooting.multiplier(g);
    double min_spacing = std::numeric_limits<double>::max();
    for (int a = 0; a < g.ndim(); ++a) min_spacing = std::min(min_spacing, g.spacing(a));

    RegistrationResult res;
    res.v0 = VectorField(g);
    EnergyGradient cur = grad_energy(res.v0, prob);
    res.history.push_back(cur.energy);
    double step = opts.step;

    for (int it = 0; it < opts.iterations; ++it) {
        // Sobolev gradient: K applied to the L2 gradient.
        VectorField dir = apply_K(cur.gradient, mult);
        const double scale = dir.max_abs();
        if (scale == 0.0 || !std::isfinite(scale)) {
            res.status = RegisterStatus::Converged;
            break;
        }
        dir *= -min_spacing / scale;

        bool accepted = false;
        for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
            VectorField trial = res.v0;
            trial.axpy(step, dir);
            EnergyTerms e;
            try {
                e = energy(trial, prob);
            } catch (const BlowUpError &) {
                step *= 0.5;
                continue;
            }
            if (e.total() < cur.energy.total()) {
                res.v0 = std::move(trial);
                cur = grad_energy(res.v0, prob);
                accepted = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        res.iterations_run = it + 1;
        res.history.push_back(cur.energy);
        if (!accepted) {
            res.status = RegisterStatus::Converged;
            break;
        }
    }

    res.trajectory = shoot(res.v0, prob.shooting);
    res.trajectory.images = deform_along(prob.source, res.trajectory);
    return res;
}

} // namespace geoflow
