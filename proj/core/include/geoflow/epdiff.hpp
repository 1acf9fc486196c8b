#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geoflow/field.hpp"
#include "geoflow/spectral.hpp"

namespace geoflow {

enum class Integrator { Euler, RK4 };

/// Time discretization of a geodesic on [0, 1] plus the metric parameters of L.
struct ShootingConfig {
    int steps = 10;
    double alpha = 3.0;
    int exponent = 3;
    Integrator integrator = Integrator::Euler;
    /// Cell size (pixel units) used in the Laplacian symbol; 1 for image grids.
    double cell_size = 1.0;

    double step_size() const noexcept { return 1.0 / steps; }
    FourierMultiplier multiplier(const GridSpec &grid) const { return {grid, alpha, exponent, cell_size}; }
    void validate() const;
};

/// v_0..v_T, phi_0..phi_T and optionally S(phi_0)..S(phi_T).
struct Trajectory {
    std::vector<VectorField> velocities;
    std::vector<Transform> transforms;
    std::vector<ScalarField> images;

    std::size_t steps() const noexcept { return velocities.empty() ? 0 : velocities.size() - 1; }
};

/// dv/dt = -K[(Dv)^T m + (Dm) v + m div v], m = L v.
///
/// The advective pair (Dm) v + m div v is evaluated as div(m (x) v), which is the same
/// expression in the continuum and makes the semi-discrete flow conserve (Lv, v) exactly.
VectorField epdiff_rhs(const VectorField &v, const FourierMultiplier &mult);

/// Vector-Jacobian product of epdiff_rhs at v.
VectorField epdiff_rhs_vjp(const VectorField &v, const FourierMultiplier &mult, const VectorField &upstream);

/// Number of epdiff_rhs / epdiff_rhs_vjp evaluations in this process.
std::uint64_t epdiff_rhs_call_count() noexcept;

/// (L v, v) with cell-volume weighting.
double kinetic_energy(const VectorField &v, const FourierMultiplier &mult);

/// v_0..v_T by forward integration of the EPDiff equation. Throws BlowUpError naming the step.
std::vector<VectorField> shoot_velocities(const VectorField &v0, const ShootingConfig &cfg,
                                          const FourierMultiplier &mult);

/// Full geodesic: velocities plus transforms integrated from them.
Trajectory shoot(const VectorField &v0, const ShootingConfig &cfg);

/// phi_0 = Id, u_{t+1}(x) = u_t(x) + dt * v_t(x + u_t(x)). n velocities give n + 1 transforms.
std::vector<Transform> integrate_flow(std::span<const VectorField> velocities, double dt);

/// Reverse mode of integrate_flow for an upstream sensitivity on the final displacement.
/// Returns one sensitivity per input velocity.
std::vector<VectorField> integrate_flow_vjp(std::span<const VectorField> velocities,
                                            std::span<const Transform> transforms, double dt,
                                            const VectorField &final_upstream);

/// Reverse mode of shoot_velocities: given sensitivities on v_0..v_T (missing trailing entries
/// count as zero), returns the sensitivity on v_0.
VectorField shoot_vjp(std::span<const VectorField> velocities, const ShootingConfig &cfg,
                      const FourierMultiplier &mult, std::span<const VectorField> upstream);

/// S warped by every transform of the trajectory; element 0 equals S.
std::vector<ScalarField> deform_along(const ScalarField &source, const Trajectory &traj);

} // namespace geoflow
