#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rotframe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

// Coordinates are interleaved: (x_1, y_1, ..., x_N, y_N).
constexpr Eigen::Index x_index(int particle) noexcept { return 2 * particle; }
constexpr Eigen::Index y_index(int particle) noexcept { return 2 * particle + 1; }

enum class Frame { Lab, Body };

struct Configuration {
  Vec coords;
  Frame frame = Frame::Lab;
};

// Central potential of one distance with its derivative supplied in closed form.
struct RadialFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  bool singular_at_zero = false;
};

namespace potentials {
RadialFunction spring(double k, double rest_length);  // k/2 (d - a)^2
RadialFunction log_interaction(double g);             // -g ln d
RadialFunction harmonic(double k);                    // k/2 r^2
}  // namespace potentials

// Pairwise term; an empty pair list means every pair a < b.
struct PairTerm {
  RadialFunction potential;
  std::vector<std::pair<int, int>> pairs;
};

// One-body central term U(|r|). With mass_weighted the value is m*U.
struct BodyTerm {
  RadialFunction potential;
  bool mass_weighted = false;
};

class ParticleSystem {
 public:
  explicit ParticleSystem(std::vector<double> masses, std::vector<PairTerm> pair_terms = {},
                          std::optional<BodyTerm> body = std::nullopt, double hbar = 1.0);

  int size() const noexcept { return static_cast<int>(masses_.size()); }
  Eigen::Index dim() const noexcept { return 2 * static_cast<Eigen::Index>(masses_.size()); }
  double mass(int particle) const { return masses_.at(static_cast<std::size_t>(particle)); }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double total_mass() const noexcept { return total_mass_; }
  double hbar() const noexcept { return hbar_; }
  // Mass attached to each coordinate slot, length 2N.
  const Vec& coord_masses() const noexcept { return coord_masses_; }

  const std::vector<PairTerm>& pair_terms() const noexcept { return pair_terms_; }
  const std::optional<BodyTerm>& body_term() const noexcept { return body_; }
  bool translation_invariant() const noexcept { return !body_.has_value(); }

 private:
  std::vector<double> masses_;
  std::vector<PairTerm> pair_terms_;
  std::optional<BodyTerm> body_;
  double hbar_;
  double total_mass_;
  Vec coord_masses_;
};

struct LinearChart {
  Vec A;
  Vec B;
};

struct ShapeValuesLinear {
  double s;
  double q;
  double r2;
};

struct ShapeValuesQuadratic {
  double S;
  double Q;
  double R2;
};

double chart_norm2(const ParticleSystem& sys, const LinearChart& chart);
// Throws InvalidChart (size, zero norm) or ChartNotTranslationInvariant.
void validate_chart(const ParticleSystem& sys, const LinearChart& chart,
                    bool require_translation_invariance = false, double tol = 1e-12);

// Gauge functional sum m (A x + B y) and its conjugate sum m (B x - A y) of any 2N-vector.
double linear_s(const ParticleSystem& sys, const LinearChart& chart, const Vec& v);
double linear_q(const ParticleSystem& sys, const LinearChart& chart, const Vec& v);

ShapeValuesLinear shape_linear(const ParticleSystem& sys, const Vec& cfg, const LinearChart& chart);
ShapeValuesQuadratic shape_quadratic(const ParticleSystem& sys, const Vec& cfg);
Vec2 center_of_mass(const ParticleSystem& sys, const Vec& cfg);
double moment_of_inertia(const ParticleSystem& sys, const Vec& cfg);

double potential_energy(const ParticleSystem& sys, const Vec& cfg);
Vec potential_gradient(const ParticleSystem& sys, const Vec& cfg);

double angular_momentum_lab(const ParticleSystem& sys, const Vec& cfg, const Vec& vel);
Vec2 total_momentum_lab(const ParticleSystem& sys, const Vec& vel);
double kinetic_energy(const ParticleSystem& sys, const Vec& vel);

// z-hat cross each particle vector: (x, y) -> (-y, x).
Vec cross_z(const Vec& v);

// Reference shape for quasi-rigid systems.
struct EquilibriumShape {
  Vec Z;
};
void validate_equilibrium(const ParticleSystem& sys, const EquilibriumShape& shape,
                          double tol = 1e-12);
// Two-body shape on the x axis with the center of mass at the origin.
EquilibriumShape two_body_equilibrium(double m1, double m2, double separation);

LinearChart eckart_chart(const EquilibriumShape& shape);                       // A=-Z_y, B=Z_x
LinearChart linearized_principal_axes_chart(const EquilibriumShape& shape);    // A=Z_y, B=Z_x

// Oscillator units: length sqrt(hbar/(m w)), energy hbar w, time 1/w.
struct OscillatorUnits {
  double hbar = 1.0;
  double mass = 1.0;
  double omega = 1.0;

  double length() const;
  double energy() const { return hbar * omega; }
  double time() const { return 1.0 / omega; }
  double to_internal_length(double x) const { return x / length(); }
  double from_internal_length(double x) const { return x * length(); }
  double to_internal_energy(double e) const { return e / energy(); }
  double from_internal_energy(double e) const { return e * energy(); }
};

}  // namespace rotframe
