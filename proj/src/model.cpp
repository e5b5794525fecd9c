#include "rotframe/model.hpp"

#include <cmath>
#include <numeric>

#include "rotframe/error.hpp"

namespace rotframe {

namespace potentials {

RadialFunction spring(double k, double rest_length) {
  return {[k, rest_length](double d) { return 0.5 * k * (d - rest_length) * (d - rest_length); },
          [k, rest_length](double d) { return k * (d - rest_length); }, false};
}

RadialFunction log_interaction(double g) {
  return {[g](double d) { return -g * std::log(d); }, [g](double d) { return -g / d; }, true};
}

RadialFunction harmonic(double k) {
  return {[k](double r) { return 0.5 * k * r * r; }, [k](double r) { return k * r; }, false};
}

}  // namespace potentials

ParticleSystem::ParticleSystem(std::vector<double> masses, std::vector<PairTerm> pair_terms,
                               std::optional<BodyTerm> body, double hbar)
    : masses_(std::move(masses)), pair_terms_(std::move(pair_terms)), body_(std::move(body)),
      hbar_(hbar) {
  if (masses_.empty()) throw Error(ErrorKind::InvalidArgument, "system needs at least one particle");
  for (double m : masses_)
    if (!(m > 0.0) || !std::isfinite(m))
      throw Error(ErrorKind::InvalidArgument, "masses must be positive and finite");
  if (!(hbar_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "hbar must be positive");
  const int n = size();
  for (auto& term : pair_terms_) {
    if (!term.potential.value || !term.potential.derivative)
      throw Error(ErrorKind::InvalidArgument, "pair potential needs value and derivative");
    if (term.pairs.empty())
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) term.pairs.emplace_back(a, b);
    for (const auto& [a, b] : term.pairs)
      if (a < 0 || b < 0 || a >= n || b >= n || a == b)
        throw Error(ErrorKind::InvalidArgument, "pair index out of range");
  }
  if (body_ && (!body_->potential.value || !body_->potential.derivative))
    throw Error(ErrorKind::InvalidArgument, "body potential needs value and derivative");
  total_mass_ = std::accumulate(masses_.begin(), masses_.end(), 0.0);
  coord_masses_.resize(dim());
  for (int a = 0; a < n; ++a) coord_masses_(x_index(a)) = coord_masses_(y_index(a)) = masses_[a];
}

namespace {

void check_size(const ParticleSystem& sys, const Vec& v) {
  if (v.size() != sys.dim())
    throw Error(ErrorKind::DimensionMismatch,
                "expected " + std::to_string(sys.dim()) + " coordinates, got " + std::to_string(v.size()));
}

}  // namespace

double chart_norm2(const ParticleSystem& sys, const LinearChart& chart) {
  double r2 = 0.0;
  for (int a = 0; a < sys.size(); ++a) r2 += sys.mass(a) * (chart.A(a) * chart.A(a) + chart.B(a) * chart.B(a));
  return r2;
}

void validate_chart(const ParticleSystem& sys, const LinearChart& chart,
                    bool require_translation_invariance, double tol) {
  if (chart.A.size() != sys.size() || chart.B.size() != sys.size())
    throw Error(ErrorKind::InvalidChart, "chart coefficient count differs from particle count");
  if (!chart.A.allFinite() || !chart.B.allFinite())
    throw Error(ErrorKind::InvalidChart, "chart coefficients must be finite");
  const double r2 = chart_norm2(sys, chart);
  if (!(r2 > 0.0)) throw Error(ErrorKind::InvalidChart, "chart norm sum m(A^2+B^2) vanishes");
  if (require_translation_invariance) {
    double sa = 0.0, sb = 0.0;
    for (int a = 0; a < sys.size(); ++a) {
      sa += sys.mass(a) * chart.A(a);
      sb += sys.mass(a) * chart.B(a);
    }
    const double scale = std::sqrt(r2 * sys.total_mass());
    if (std::abs(sa) > tol * scale || std::abs(sb) > tol * scale)
      throw Error(ErrorKind::ChartNotTranslationInvariant,
                  "sum m A and sum m B must vanish for a center-of-mass gauge");
  }
}

double linear_s(const ParticleSystem& sys, const LinearChart& chart, const Vec& v) {
  double s = 0.0;
  for (int a = 0; a < sys.size(); ++a)
    s += sys.mass(a) * (chart.A(a) * v(x_index(a)) + chart.B(a) * v(y_index(a)));
  return s;
}

double linear_q(const ParticleSystem& sys, const LinearChart& chart, const Vec& v) {
  double q = 0.0;
  for (int a = 0; a < sys.size(); ++a)
    q += sys.mass(a) * (chart.B(a) * v(x_index(a)) - chart.A(a) * v(y_index(a)));
  return q;
}

ShapeValuesLinear shape_linear(const ParticleSystem& sys, const Vec& cfg, const LinearChart& chart) {
  check_size(sys, cfg);
  return {linear_s(sys, chart, cfg), linear_q(sys, chart, cfg), chart_norm2(sys, chart)};
}

ShapeValuesQuadratic shape_quadratic(const ParticleSystem& sys, const Vec& cfg) {
  check_size(sys, cfg);
  ShapeValuesQuadratic out{0.0, 0.0, 0.0};
  for (int a = 0; a < sys.size(); ++a) {
    const double x = cfg(x_index(a)), y = cfg(y_index(a)), m = sys.mass(a);
    out.S += m * x * y;
    out.Q += 0.5 * m * (x * x - y * y);
    out.R2 += m * (x * x + y * y);
  }
  return out;
}

Vec2 center_of_mass(const ParticleSystem& sys, const Vec& cfg) {
  check_size(sys, cfg);
  Vec2 c = Vec2::Zero();
  for (int a = 0; a < sys.size(); ++a) c += sys.mass(a) * cfg.segment<2>(x_index(a));
  return c / sys.total_mass();
}

double moment_of_inertia(const ParticleSystem& sys, const Vec& cfg) {
  return shape_quadratic(sys, cfg).R2;
}

double potential_energy(const ParticleSystem& sys, const Vec& cfg) {
  check_size(sys, cfg);
  double v = 0.0;
  for (const auto& term : sys.pair_terms())
    for (const auto& [a, b] : term.pairs) {
      const double d = (cfg.segment<2>(x_index(a)) - cfg.segment<2>(x_index(b))).norm();
      if (d == 0.0 && term.potential.singular_at_zero)
        throw Error(ErrorKind::CoincidentParticles, "particles " + std::to_string(a) + " and " +
                                                        std::to_string(b) + " coincide");
      v += term.potential.value(d);
    }
  if (const auto& body = sys.body_term())
    for (int a = 0; a < sys.size(); ++a) {
      const double u = body->potential.value(cfg.segment<2>(x_index(a)).norm());
      v += body->mass_weighted ? sys.mass(a) * u : u;
    }
  return v;
}

Vec potential_gradient(const ParticleSystem& sys, const Vec& cfg) {
  check_size(sys, cfg);
  Vec g = Vec::Zero(sys.dim());
  for (const auto& term : sys.pair_terms())
    for (const auto& [a, b] : term.pairs) {
      const Vec2 diff = cfg.segment<2>(x_index(a)) - cfg.segment<2>(x_index(b));
      const double d = diff.norm();
      if (d == 0.0) {
        // Direction undefined; only a vanishing slope at contact is acceptable.
        const double slope = term.potential.singular_at_zero ? NAN : term.potential.derivative(0.0);
        if (!std::isfinite(slope) || slope != 0.0)
          throw Error(ErrorKind::CoincidentParticles, "particles " + std::to_string(a) + " and " +
                                                          std::to_string(b) + " coincide");
        continue;
      }
      const Vec2 f = term.potential.derivative(d) / d * diff;
      g.segment<2>(x_index(a)) += f;
      g.segment<2>(x_index(b)) -= f;
    }
  if (const auto& body = sys.body_term())
    for (int a = 0; a < sys.size(); ++a) {
      const Vec2 r = cfg.segment<2>(x_index(a));
      const double rn = r.norm();
      if (rn == 0.0) continue;
      double du = body->potential.derivative(rn);
      if (body->mass_weighted) du *= sys.mass(a);
      g.segment<2>(x_index(a)) += du / rn * r;
    }
  return g;
}

double angular_momentum_lab(const ParticleSystem& sys, const Vec& cfg, const Vec& vel) {
  check_size(sys, cfg);
  check_size(sys, vel);
  double l = 0.0;
  for (int a = 0; a < sys.size(); ++a)
    l += sys.mass(a) * (cfg(x_index(a)) * vel(y_index(a)) - cfg(y_index(a)) * vel(x_index(a)));
  return l;
}

Vec2 total_momentum_lab(const ParticleSystem& sys, const Vec& vel) {
  check_size(sys, vel);
  Vec2 p = Vec2::Zero();
  for (int a = 0; a < sys.size(); ++a) p += sys.mass(a) * vel.segment<2>(x_index(a));
  return p;
}

double kinetic_energy(const ParticleSystem& sys, const Vec& vel) {
  check_size(sys, vel);
  return 0.5 * vel.cwiseProduct(sys.coord_masses()).dot(vel);
}

Vec cross_z(const Vec& v) {
  Vec out(v.size());
  for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
    out(i) = -v(i + 1);
    out(i + 1) = v(i);
  }
  return out;
}

void validate_equilibrium(const ParticleSystem& sys, const EquilibriumShape& shape, double tol) {
  check_size(sys, shape.Z);
  const auto quad = shape_quadratic(sys, shape.Z);
  const double scale = std::max(quad.R2, 1e-300);
  if (std::abs(quad.S) > tol * scale)
    throw Error(ErrorKind::InvalidArgument, "equilibrium shape is not on its principal axes");
  const Vec2 c = center_of_mass(sys, shape.Z);
  if (c.norm() > tol * std::sqrt(scale / sys.total_mass()))
    throw Error(ErrorKind::InvalidArgument, "equilibrium shape is not centered");
  bool distinct = false;
  for (int a = 1; a < sys.size() && !distinct; ++a)
    distinct = (shape.Z.segment<2>(x_index(a)) - shape.Z.segment<2>(0)).norm() > 0.0;
  if (!distinct) throw Error(ErrorKind::InvalidArgument, "equilibrium shape needs two distinct sites");
}

EquilibriumShape two_body_equilibrium(double m1, double m2, double separation) {
  const double total = m1 + m2;
  Vec z = Vec::Zero(4);
  z(0) = separation * m2 / total;
  z(2) = -separation * m1 / total;
  return {z};
}

LinearChart eckart_chart(const EquilibriumShape& shape) {
  const Eigen::Index n = shape.Z.size() / 2;
  LinearChart chart{Vec(n), Vec(n)};
  for (Eigen::Index a = 0; a < n; ++a) {
    chart.A(a) = -shape.Z(2 * a + 1);
    chart.B(a) = shape.Z(2 * a);
  }
  return chart;
}

LinearChart linearized_principal_axes_chart(const EquilibriumShape& shape) {
  const Eigen::Index n = shape.Z.size() / 2;
  LinearChart chart{Vec(n), Vec(n)};
  for (Eigen::Index a = 0; a < n; ++a) {
    chart.A(a) = shape.Z(2 * a + 1);
    chart.B(a) = shape.Z(2 * a);
  }
  return chart;
}

double OscillatorUnits::length() const { return std::sqrt(hbar / (mass * omega)); }

}  // namespace rotframe
