#pragma once

#include <span>
#include <vector>

#include "geoflow/field.hpp"

namespace geoflow {

/// Multilinear interpolation with periodic wrap on every axis. Positions are physical
/// (torus) coordinates. Throws std::invalid_argument on a non-finite position.
std::vector<double> interpolate(const ScalarField &f, std::span<const Point> positions);

/// out(x) = f(x + u(x)) for every node x, channel by channel.
ScalarField warp(const ScalarField &f, const Transform &phi);
MultiField warp(const MultiField &f, const Transform &phi);

/// (phi o psi)(x) = phi(psi(x)).
Transform compose(const Transform &phi, const Transform &psi);

/// Second-order central difference along `axis` with periodic wrap.
void central_difference(std::span<const double> f, const GridSpec &grid, int axis, std::span<double> out);

JacobianField jacobian(const VectorField &v);
ScalarField divergence(const VectorField &v);

/// det(Id + Du) at every node.
ScalarField det_jacobian(const Transform &phi);

/// sum_x sum_i m_i(x) v_i(x) times the cell volume.
double dual_pairing(const VectorField &m, const VectorField &v);

// Reverse-mode building blocks. Each returns or accumulates the vector-Jacobian product of
// the corresponding forward operation for a given upstream sensitivity.

/// Sensitivity of warp(f, phi) with respect to the displacement of phi:
/// ubar_a(x) = sum_c upstream_c(x) * d f_c / d x_a evaluated at x + u(x).
VectorField warp_displacement_vjp(const MultiField &f, const Transform &phi, const MultiField &upstream);

/// target += scale * (adjoint of f -> warp(f, phi)) applied to upstream.
void warp_scatter_add(const Transform &phi, const MultiField &upstream, MultiField &target, double scale = 1.0);

} // namespace geoflow
