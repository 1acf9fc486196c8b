#pragma once

#include <vector>

#include "geoflow/epdiff.hpp"
#include "geoflow/field.hpp"

namespace geoflow {

/// Pairwise registration of a source onto a target by geodesic shooting from v0.
struct RegistrationProblem {
    ScalarField source;
    ScalarField target;
    double lambda = 0.03;
    ShootingConfig shooting;

    void validate() const;
};

struct EnergyTerms {
    double regularity = 0.0; ///< (L v0, v0)
    double matching = 0.0;   ///< lambda * ||S(phi_1) - T||^2, cell-volume weighted
    double total() const noexcept { return regularity + matching; }
};

/// E(v0) = (L v0, v0) + lambda * SSD(S(phi_1), T).
EnergyTerms energy(const VectorField &v0, const RegistrationProblem &prob);

struct EnergyGradient {
    EnergyTerms energy;
    VectorField gradient;
};

/// Exact gradient of the discrete energy, by reverse accumulation through the Euler/RK4
/// steps, the flow integration and the final warp.
EnergyGradient grad_energy(const VectorField &v0, const RegistrationProblem &prob);

struct RegisterOptions {
    int iterations = 300;
    /// Initial step, in grid cells of maximal velocity change along the search direction.
    double step = 0.5;
    int max_backtracks = 12;
};

enum class RegisterStatus { MaxIterations, Converged };

struct RegistrationResult {
    VectorField v0;
    Trajectory trajectory;
    /// history[k] = total energy after k accepted-or-rejected iterations; history[0] is E(0).
    std::vector<EnergyTerms> history;
    RegisterStatus status = RegisterStatus::MaxIterations;
    int iterations_run = 0;
};

/// Preconditioned (Sobolev) gradient descent from v0 = 0 with backtracking line search.
RegistrationResult register_optimize(const RegistrationProblem &prob, const RegisterOptions &opts = {});

} // namespace geoflow
