#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rotframe/operators.hpp"

namespace rotframe {

// Conventions for the identity tables in algebra.cpp.
// A physical operator is stored as phase * (c.grad + f) with phase 1 (positions, shape
// functionals) or 1/i (momenta, Lambda). The physical commutator is then
// phase_a * phase_b * [A, B]_field, and both sides of every identity are compared as a
// complex coefficient vector plus a complex multiplier. Some useful reductions:
//   [f, (1/i) V]          = i V.grad f
//   [(1/i) V, (1/i) W]    = -[V, W]_field
//   i * Pi                = V              (so "i Pi_Y" on a right-hand side is the field V_Y)
// All checks are pointwise; commutator coefficients use the analytic Jacobians of the
// operands, never finite differences.

struct IdentityCheck {
  std::string id;
  double max_dev = 0.0;
  Vec point_of_max;
  int evaluations = 0;
  bool pass = false;
};

struct AlgebraReport {
  std::vector<IdentityCheck> checks;
  int n_points = 0;
  double tol = 0.0;
  bool all_pass = false;
};

// Random N=3 system and chart of the requested kind; on-surface sample points.
AlgebraReport verify_algebra(GaugeKind kind, int n_points, double tol, std::uint64_t seed);
AlgebraReport verify_algebra(const ParticleSystem& sys, const GaugeChart& gauge, int n_points, double tol,
                             std::uint64_t seed);

// Operator forms of the gauge conditions on the momentum fields: S({Pi/m}) = 0 (linear and
// CM), sum of momenta = 0 (CM), and the principal-axes counterpart sum(X Pi_Y + Y Pi_X) = 0.
AlgebraReport verify_constraints(const ParticleSystem& sys, const GaugeChart& gauge, int n_points, double tol,
                                 std::uint64_t seed);

// Draws a point of the gauge surface: projection for linear charts, gauge fixing for the
// principal axes. Near-degenerate shapes are rejected.
Vec sample_on_surface(const ParticleSystem& sys, const GaugeChart& gauge, std::mt19937_64& rng);

// Random system with masses in [0.5, 2] and a random chart of the given kind.
struct RandomSetup {
  ParticleSystem sys;
  GaugeChart gauge;
};
RandomSetup random_setup(GaugeKind kind, int n_particles, std::uint64_t seed);

}  // namespace rotframe
