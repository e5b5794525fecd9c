#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rotframe/gauge.hpp"
#include "rotframe/wavefunction.hpp"

namespace rotframe {

// Real first-order operator c(x).grad + f(x). Momentum-like physical operators carry
// an overall 1/i that is tracked by the caller (see algebra.hpp for the conventions).
class FirstOrderOperator {
 public:
  using CoeffFn = std::function<Vec(const Vec&)>;
  using JacFn = std::function<Mat(const Vec&)>;
  using ScalarFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  FirstOrderOperator() = default;
  FirstOrderOperator(Eigen::Index dim, CoeffFn coeff, JacFn coeff_jac, std::string name = {});

  static FirstOrderOperator multiplier(Eigen::Index dim, ScalarFn f, GradFn grad, std::string name = {});
  FirstOrderOperator with_multiplier(ScalarFn f, GradFn grad) const;
  FirstOrderOperator renamed(std::string name) const;

  Eigen::Index dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }
  bool has_field() const noexcept { return static_cast<bool>(coeff_); }
  bool has_multiplier() const noexcept { return static_cast<bool>(mult_); }
  // False when derivatives of this operator come from finite differences.
  bool exact() const noexcept { return exact_; }

  Vec coeff(const Vec& x) const;
  Mat coeff_jac(const Vec& x) const;
  double mult(const Vec& x) const;
  Vec mult_grad(const Vec& x) const;

  // (c.grad + f) applied to a jet; first derivatives only.
  cplx apply(const Vec& x, const Jet& psi) const;

 private:
  friend FirstOrderOperator commutator(const FirstOrderOperator&, const FirstOrderOperator&);
  Eigen::Index dim_ = 0;
  CoeffFn coeff_;
  JacFn jac_;
  ScalarFn mult_;
  GradFn mult_grad_;
  std::string name_;
  bool exact_ = true;
};

// [A, B] = (a.grad b - b.grad a).grad + (a.grad g - b.grad f). The Jacobian of the
// result is a central-difference estimate, so the result is flagged inexact.
FirstOrderOperator commutator(const FirstOrderOperator& a, const FirstOrderOperator& b);

FirstOrderOperator linear_combination(const std::vector<FirstOrderOperator>& ops, const Vec& weights,
                                      std::string name = {});
FirstOrderOperator position_operator(Eigen::Index dim, Eigen::Index index);
FirstOrderOperator constant_field(const Vec& c, std::string name = {});
// Field of the lab angular momentum: coefficients (-y, x) per particle.
FirstOrderOperator angular_momentum_field(Eigen::Index dim);

// Momentum fields, ordered like coordinates (Pi_X1, Pi_Y1, ...).
std::vector<FirstOrderOperator> pi_linear(const ParticleSystem& sys, const LinearChart& chart);
std::vector<FirstOrderOperator> pi_linear_cm(const ParticleSystem& sys, const LinearChart& chart);
std::vector<FirstOrderOperator> pi_quadratic(const ParticleSystem& sys);

FirstOrderOperator lambda_linear(const ParticleSystem& sys, const LinearChart& chart);
// Same field built from the center-of-mass momenta; differs from lambda_linear off the C=0 plane.
FirstOrderOperator lambda_linear_cm(const ParticleSystem& sys, const LinearChart& chart);
FirstOrderOperator lambda_quadratic(const ParticleSystem& sys);
// Eckart-frame field in displacement coordinates dR = R - Z.
FirstOrderOperator lambda_eckart(const ParticleSystem& sys, const EquilibriumShape& shape);

std::vector<FirstOrderOperator> momentum_fields(const ParticleSystem& sys, const GaugeChart& gauge);
// Residual angular momentum field in body coordinates R for any gauge.
FirstOrderOperator residual_field(const ParticleSystem& sys, const GaugeChart& gauge);

// Central-difference Jacobian of an operator's coefficients, for cross-checks.
Mat finite_difference_jacobian(const FirstOrderOperator& op, const Vec& x, double h = 1e-5);

struct LabMomentumReport {
  double max_dev = 0.0;
  Vec point_of_max;
  int points = 0;
  bool pass = false;
};

// Compares finite-difference lab momenta of psi(R(r)) exp(i ell theta(r)) with the chain-rule
// expression built from Pi and Lambda in a linear gauge.
LabMomentumReport lab_momentum_check(const ParticleSystem& sys, const LinearChart& chart,
                                     const WaveFunction& psi, double ell_z,
                                     const std::vector<Vec>& lab_points, double tol);

}  // namespace rotframe
