#pragma once

#include <vector>

#include "rotframe/gauge.hpp"
#include "rotframe/wavefunction.hpp"

namespace rotframe {

// Flow of the residual angular momentum on the gauge surface, closed form.
// OffSurface when the start violates the gauge beyond tol (relative).
Vec orbit_linear(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg0, double alpha,
                 double tol = 1e-12);
// CollinearDegenerate when 2Q = R^2; the sin(w a)/w factor keeps small w finite.
Vec orbit_quadratic(const ParticleSystem& sys, const Vec& cfg0, double alpha, double tol = 1e-12);
Vec orbit(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg0, double alpha, double tol = 1e-12);

// sqrt(1 - 4 Q^2 / R^4) at cfg.
double orbit_frequency(const ParticleSystem& sys, const Vec& cfg);

// Per-particle radii rho_gamma^2 conserved by the flow.
Vec kernel_invariants(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg, double tol = 1e-9);

// exp(-sum w_g rho_g^2) times a polynomial in the conserved scalars: sum c_k q^k (linear
// gauges) or sum c_jk Q^j (R^2)^k (principal axes). Empty polynomials mean 1.
struct KernelFactor {
  Vec widths;
  std::vector<double> poly_linear;
  Mat poly_quadratic;
};

// C exp(i sum l_g a_g); NonIntegerEigenvalue unless every l_g is an integer.
WaveFunction eigenfunction_linear(const ParticleSystem& sys, const LinearChart& chart,
                                  const std::vector<double>& lambdas, const KernelFactor& kernel = {});
// C exp(i sum n_g atan2(k Y_g, X_g)) with k = sqrt((R^2 + 2Q) / (R^2 - 2Q)); eigenvalue n w.
WaveFunction eigenfunction_quadratic(const ParticleSystem& sys, const std::vector<double>& ns,
                                     const KernelFactor& kernel = {});
double eigenvalue_quadratic(const ParticleSystem& sys, const std::vector<double>& ns, const Vec& cfg);

struct GeneratorReport {
  double max_dev = 0.0;  // |d orbit / d alpha + coefficient field| at alpha = 0
  double dalpha = 0.0;
  int points = 0;
};
// Central difference of the orbit against the operator-engine field of Lambda, which points
// against the flow with the 1/i carried by the physical operator.
GeneratorReport verify_generator(const ParticleSystem& sys, const GaugeChart& gauge, const std::vector<Vec>& cfgs,
                                 double dalpha);

struct OrbitInvariantReport {
  double gauge_drift = 0.0;     // s or S
  double jacobian_drift = 0.0;  // q, or Q with R^2 and the frequency
  double radius_drift = 0.0;    // rho_gamma^2
  double center_drift = 0.0;    // only for gauges that fix the centre of mass
  double group_law_dev = 0.0;
  double period_dev = 0.0;      // after 2 pi / w
  int samples = 0;
};
OrbitInvariantReport orbit_invariants(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg0,
                                      int samples);

struct EigenfunctionReport {
  double max_dev = 0.0;               // |Lambda psi - lambda psi| / |psi|, lambda in units of hbar
  double max_integer_dev = 0.0;       // linear: distance of the recovered eigenvalue to the integer
  double max_eigenvalue_dev = 0.0;    // recovered vs predicted
  std::vector<double> recovered;      // Lambda psi / (hbar psi) per point, real part
  int points = 0;
};
// Linear kinds take lambdas, principal axes takes ns.
EigenfunctionReport verify_eigenfunction(const ParticleSystem& sys, const GaugeChart& gauge,
                                         const std::vector<double>& quanta, const KernelFactor& kernel,
                                         const std::vector<Vec>& points);

}  // namespace rotframe
