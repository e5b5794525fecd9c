#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "rotframe/operators.hpp"
#include "rotframe/quadrature.hpp"

namespace rotframe {

// Parametrization of a gauge surface by free coordinates u.
//   linear / CM gauges: affine, x = offset + basis * u, obtained by eliminating the
//     coordinates with the best-conditioned constraint block; weight = q * factor;
//   two-body Eckart: single coordinate u = dX1 - dX2 (measure du);
//   principal axes: every coordinate except one Y_e, solved from S = 0, weight Q/|m_e X_e|.
// The weight is the full measure on u-space including the Faddeev-Popov factor.
class SurfaceChart {
 public:
  SurfaceChart(const ParticleSystem& sys, const GaugeChart& gauge, const std::optional<Vec>& reference = std::nullopt);

  GaugeKind kind() const noexcept { return kind_of(gauge_); }
  const GaugeChart& gauge() const noexcept { return gauge_; }
  const ParticleSystem& system() const noexcept { return sys_; }
  Eigen::Index free_dim() const noexcept { return free_dim_; }
  // Indices of the ambient coordinates kept as free coordinates (empty for the Eckart pair chart).
  const std::vector<Eigen::Index>& free_indices() const noexcept { return free_; }

  Vec embed(const Vec& u) const;
  Vec free_coords(const Vec& cfg) const;
  // Gauge functional(s) at cfg: max of |s| (or |S|) and |C| when the center is fixed.
  double residual(const Vec& cfg) const;
  // Faddeev-Popov factor that absorption moves into the wave function: q, or 2Q/R.
  double jacobian(const Vec& cfg) const;
  double weight(const Vec& cfg) const;
  // Measure left after absorption, weight / jacobian.
  double absorbed_weight(const Vec& cfg) const;
  bool in_domain(const Vec& cfg) const;

 private:
  ParticleSystem sys_;
  GaugeChart gauge_;
  Eigen::Index free_dim_ = 0;
  std::vector<Eigen::Index> free_;
  Vec offset_;
  Mat basis_;
  double factor_ = 1.0;     // constant delta-function Jacobian of the linear charts
  Eigen::Index solved_ = -1;  // eliminated Y for principal axes
  bool eckart_pair_ = false;
};

// Box in free coordinates covering both bumps to `width` standard deviations.
Box bump_box(const SurfaceChart& chart, const std::vector<BumpParams>& bumps, double width = 8.0);

struct InnerProductResult {
  cplx value{0.0, 0.0};
  double error = 0.0;
  long evaluations = 0;
};

// <phi|psi> with the chart weight, or the absorbed weight when both functions carry the
// absorbed Jacobian. Throws QuadratureNotConverged when the integrand has not decayed on the
// box faces or the level difference exceeds spec.tol.
InnerProductResult inner_product(const SurfaceChart& chart, const WaveFunction& phi, const WaveFunction& psi,
                                 const QuadratureSpec& spec, const Box& box);
// Same with an operator applied on the right: <phi| op psi>.
using PointOperator = std::function<cplx(const Vec&)>;
InnerProductResult matrix_element(const SurfaceChart& chart, const WaveFunction& phi, const PointOperator& op_psi,
                                  bool absorbed, const QuadratureSpec& spec, const Box& box);

// Gauge-fixed Hamiltonian applied pointwise. For an unabsorbed psi the kinetic term keeps the
// ordering (1/J) Pi J Pi with J = q (linear, CM, Eckart) or 2Q/R (principal axes); for an
// absorbed psi the flat kinetic term plus the quantum potential is used. Angular momenta are
// in units of hbar.
PointOperator apply_hamiltonian(const ParticleSystem& sys, const GaugeChart& gauge, const WaveFunction& psi,
                                double ell_z);
// Residual angular momentum Lambda psi (hbar included).
PointOperator apply_lambda(const ParticleSystem& sys, const GaugeChart& gauge, const WaveFunction& psi);
// Kinetic and centrifugal parts alone, as used by both representations; `flat` drops the
// Jacobian from the kinetic ordering.
cplx hamiltonian_terms(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg, const Jet& psi,
                       double ell_z, bool flat);

double quantum_potential(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg);

// psi~ = J^(1/2) psi and back.
WaveFunction absorb_jacobian(const SurfaceChart& chart, const WaveFunction& psi);
WaveFunction emit_jacobian(const SurfaceChart& chart, const WaveFunction& psi_tilde);

// Jet of the Faddeev-Popov factor J at cfg up to second order.
Jet jacobian_jet(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg);

struct RepresentationReport {
  double max_dev = 0.0;         // |J^(1/2) H J^(-1/2) psi~ - H~ psi~| relative to |psi~|
  double max_potential_dev = 0.0;  // recovered quantum potential vs the closed form
  int points = 0;
  bool pass = false;
};
RepresentationReport representation_check(const ParticleSystem& sys, const GaugeChart& gauge,
                                          const WaveFunction& psi_tilde, double ell_z,
                                          const std::vector<Vec>& points, double tol);

struct HermiticityReport {
  double max_asym_h = 0.0;        // |<phi|H psi> - <H phi|psi>| / (|phi| |psi|)
  double max_asym_lambda = 0.0;
  double max_asym_potential = 0.0;
  double max_quad_error = 0.0;    // largest reported relative quadrature error
  double worst_ratio = 0.0;       // max over trials of asymmetry / reported error
  int trials = 0;
  bool pass = false;
};
// Random localized Gaussian-times-polynomial pairs on the gauge surface; pass when every
// asymmetry stays below tol_factor times the quadrature error reported for that trial.
HermiticityReport hermiticity_check(const ParticleSystem& sys, const GaugeChart& gauge, double ell_z, int trials,
                                    double tol_factor, std::uint64_t seed, const QuadratureSpec& spec = {});

}  // namespace rotframe
