#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rotframe/gauge.hpp"

namespace rotframe {

// -(hbar^2 / 2 mass) u'' + potential(r) u = E u with u = 0 at both ends.
struct RadialProblem {
  double mass = 1.0;
  double hbar = 1.0;
  std::function<double(double)> potential;  // centrifugal part included by the caller
  double r_min = 0.0;
  double r_max = 1.0;
  int n_points = 2000;     // interior nodes of the coarse grid; the fine grid has 2n+1
  double tolerance = 0.0;  // GridTooCoarse above this Richardson error; 0 disables
};

struct SpectrumResult {
  std::vector<double> eigenvalues;  // Richardson-extrapolated, ascending
  std::vector<double> errors;       // per state |E_fine - E_coarse| / 3
  double convergence = 0.0;         // max of errors
  Vec grid;                         // fine-grid nodes
  std::vector<Vec> eigenvectors;    // on grid, sum u^2 h = 1
};

void validate(const RadialProblem& problem);
SpectrumResult radial_solve(const RadialProblem& problem, int n_states);

// Single particle in a central trap: finite volumes on [0, r_max] in the weighted
// (unabsorbed) form, which is the absorbed half-line problem with the -1/4 shift.
struct PolarGrid {
  double r_max = 12.0;
  int n_cells = 2000;  // coarse grid; the fine grid has twice as many
  double tolerance = 0.0;
};

SpectrumResult n1_polar_spectrum(const ParticleSystem& sys, double ell, int n_states,
                                 const PolarGrid& grid = {});
// Absorbed effective potential U(X) + hbar^2 (ell^2 - 1/4) / (2 m X^2).
double n1_effective_potential(const ParticleSystem& sys, double ell, double x);

struct EckartSpringParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double k = 1.0;
  double a = 20.0;
  double hbar = 1.0;

  double reduced_mass() const { return m1 * m2 / (m1 + m2); }
  double total_mass() const { return m1 + m2; }
  double omega() const;
  double oscillator_length() const;
  double epsilon() const;
  // Same masses, spring and hbar with the rest length chosen to give eps.
  EckartSpringParams with_epsilon(double eps) const;
};

void validate(const EckartSpringParams& params);

struct PerturbativeResult {
  double e0 = 0.0;
  double e1 = 0.0;
  // Coefficients on the unperturbed n-1, n, n+1 oscillator states.
  double coeff_lower = 0.0;
  double coeff_same = 1.0;
  double coeff_upper = 0.0;
};

// Closed-form low-order series; ell must be an integer.
PerturbativeResult eckart_perturbative(const EckartSpringParams& params, double ell, int n);

struct EckartOracleGrid {
  double half_width = 10.0;  // oscillator lengths on each side of the rest length
  int n_points = 24000;
  double tolerance = 1e-7;   // in units of hbar omega
};

SpectrumResult eckart_oracle_spectrum(const EckartSpringParams& params, double ell, int n_states,
                                      const EckartOracleGrid& grid = {});
double eckart_oracle(const EckartSpringParams& params, double ell, int n, const EckartOracleGrid& grid = {});

// Overlaps of a grid function (in r) with oscillator states centred at `center`,
// by Gauss-Hermite quadrature of the spline-interpolated function.
std::vector<double> oscillator_overlaps(const Vec& grid, const Vec& values, double center, double length,
                                        int n_max, int nodes = 96);

struct EckartRow {
  int ell = 0;
  int n = 0;
  double eps = 0.0;
  double e_oracle = 0.0;
  double e0 = 0.0;
  double e1_pred = 0.0;
  double slope_fit = 0.0;
  double slope_err = 0.0;  // relative deviation of slope_fit from the prediction
};

struct EckartCell {
  int ell = 0;
  int n = 0;
  double slope_fit = 0.0;
  double slope_pred = 0.0;
  double quartic_fit = 0.0;
  double slope_rel_err = 0.0;
  double residual_exponent = 0.0;
  double max_oracle_error = 0.0;
  // Wavefunction mixing at the largest eps; lower is unused when n = 0.
  double eps_wavefunction = 0.0;
  double coeff_lower = 0.0;
  double coeff_upper = 0.0;
  double coeff_lower_pred = 0.0;
  double coeff_upper_pred = 0.0;
  double coeff_rel_err = 0.0;          // against the closed-form series
  double coeff_rel_err_first_order = 0.0;  // against textbook first-order mixing
  bool sign_match = false;
  double other_overlap_scale = 0.0;    // max |c_k|, |k - n| >= 2, over eps^4 max(1, |ell^2 - 1/4|)
  bool slope_pass = false;
  bool exponent_pass = false;
  bool wavefunction_pass = false;
};

struct EckartReport {
  std::vector<EckartRow> rows;
  std::vector<EckartCell> cells;
  double max_slope_rel_err = 0.0;
  double min_residual_exponent = 0.0;
  double max_coeff_rel_err = 0.0;
  double max_coeff_rel_err_first_order = 0.0;
  double max_oracle_error = 0.0;
  double slope_spread_over_n = 0.0;  // max relative spread of slopes across n for fixed ell
  bool energies_pass = false;
  bool exponents_pass = false;
  bool wavefunctions_pass = false;
  bool pass = false;
};

struct EckartTolerances {
  double slope_rel = 0.02;
  double min_exponent = 2.5;
  double coeff_rel = 0.05;
};

EckartReport eckart_experiment(const EckartSpringParams& base, const std::vector<double>& eps_sweep,
                               const std::vector<int>& ells, const std::vector<int>& ns,
                               const EckartTolerances& tol = {}, const EckartOracleGrid& grid = {});

enum class OrderChart { Eckart, LinearizedPrincipalAxes };

// Classical residual angular momentum to first order in the deformation, linear gauge
// about the shape, with the frame rate from the same expansion.
double intrinsic_lambda(const ParticleSystem& sys, const EquilibriumShape& shape, const LinearChart& chart,
                        const Vec& deformation, const Vec& deformation_rate, double ell_z);
double intrinsic_xi(const ParticleSystem& sys, const EquilibriumShape& shape, const Vec& deformation,
                    const Vec& deformation_rate, double ell_z);

struct OrderCheckReport {
  std::vector<double> scales;
  std::vector<double> lambdas;
  double exponent = 0.0;
  double lambda_at_shape = 0.0;
};

// Lambda at shape + s * dR for one random on-surface direction and velocity.
OrderCheckReport eckart_order_check(const ParticleSystem& sys, const EquilibriumShape& shape, OrderChart chart,
                                    const std::vector<double>& scales, std::uint64_t seed);

}  // namespace rotframe
