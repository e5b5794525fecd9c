#include "rotframe/residual.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rotframe/error.hpp"
#include "rotframe/hilbert.hpp"
#include "rotframe/operators.hpp"

namespace rotframe {

namespace {

double mass_norm(const ParticleSystem& sys, const Vec& cfg) {
  return std::sqrt(cfg.cwiseProduct(sys.coord_masses()).dot(cfg));
}

void check_linear_surface(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg, double tol) {
  if (cfg.size() != sys.dim()) throw Error(ErrorKind::DimensionMismatch, "configuration size");
  const double scale = std::sqrt(chart_norm2(sys, chart)) * mass_norm(sys, cfg);
  const double s = linear_s(sys, chart, cfg);
  if (std::abs(s) > tol * std::max(scale, 1e-300))
    throw Error(ErrorKind::OffSurface, "gauge functional " + std::to_string(s) + " off the surface");
}

ShapeValuesQuadratic check_quadratic_surface(const ParticleSystem& sys, const Vec& cfg, double tol) {
  if (cfg.size() != sys.dim()) throw Error(ErrorKind::DimensionMismatch, "configuration size");
  const auto sh = shape_quadratic(sys, cfg);
  if (!(sh.R2 > 0)) throw Error(ErrorKind::DegenerateInertia, "R^2 vanishes");
  if (std::abs(sh.S) > tol * sh.R2)
    throw Error(ErrorKind::OffSurface, "S = " + std::to_string(sh.S) + " off the surface");
  return sh;
}

double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0 + t * t * t * t / 120.0;
  return std::sin(t) / t;
}

// Linear-gauge shifted coordinates u = X - B q / r2, v = Y + A q / r2.
struct LinearFrame {
  double q = 0.0;
  double r2 = 0.0;
  Vec grad_q;
};

LinearFrame linear_frame(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg) {
  LinearFrame f;
  f.q = linear_q(sys, chart, cfg);
  f.r2 = chart_norm2(sys, chart);
  f.grad_q = Vec::Zero(sys.dim());
  for (int i = 0; i < sys.size(); ++i) {
    f.grad_q(x_index(i)) = sys.mass(i) * chart.B(i);
    f.grad_q(y_index(i)) = -sys.mass(i) * chart.A(i);
  }
  return f;
}

struct QuadraticFrame {
  ShapeValuesQuadratic shape{};
  double k = 0.0;  // 2Q / R^2
  Vec grad_q;
  Vec grad_r2;
  Vec grad_k;
};

QuadraticFrame quadratic_frame(const ParticleSystem& sys, const Vec& cfg) {
  QuadraticFrame f;
  f.shape = shape_quadratic(sys, cfg);
  if (!(f.shape.R2 > 0)) throw Error(ErrorKind::DegenerateInertia, "R^2 vanishes");
  f.k = 2.0 * f.shape.Q / f.shape.R2;
  f.grad_q = Vec(sys.dim());
  f.grad_r2 = Vec(sys.dim());
  for (int i = 0; i < sys.size(); ++i) {
    const double m = sys.mass(i), x = cfg(x_index(i)), y = cfg(y_index(i));
    f.grad_q(x_index(i)) = m * x;
    f.grad_q(y_index(i)) = -m * y;
    f.grad_r2(x_index(i)) = 2 * m * x;
    f.grad_r2(y_index(i)) = 2 * m * y;
  }
  f.grad_k = 2.0 * f.grad_q / f.shape.R2 - 2.0 * f.shape.Q * f.grad_r2 / (f.shape.R2 * f.shape.R2);
  return f;
}

void check_integers(const std::vector<double>& values, int expected) {
  if (static_cast<int>(values.size()) != expected)
    throw Error(ErrorKind::DimensionMismatch, "need one quantum number per particle");
  for (double v : values)
    if (!std::isfinite(v) || std::abs(v - std::round(v)) > 1e-12)
      throw Error(ErrorKind::NonIntegerEigenvalue, "quantum number " + std::to_string(v) + " is not an integer");
}

struct ScalarGrad {
  double value = 0.0;
  Vec grad;
};

// Gaussian in the radii times a polynomial; radii and polynomial gradients supplied by the caller.
ScalarGrad kernel_value(const KernelFactor& kernel, const std::vector<ScalarGrad>& radii, double poly_value,
                        const Vec& poly_grad) {
  Eigen::Index dim = poly_grad.size();
  double expo = 0.0;
  Vec grad_expo = Vec::Zero(dim);
  if (kernel.widths.size() > 0) {
    if (kernel.widths.size() != static_cast<Eigen::Index>(radii.size()))
      throw Error(ErrorKind::DimensionMismatch, "one Gaussian width per particle");
    for (std::size_t g = 0; g < radii.size(); ++g) {
      const double w = kernel.widths(static_cast<Eigen::Index>(g));
      expo -= w * radii[g].value;
      grad_expo -= w * radii[g].grad;
    }
  }
  const double e = std::exp(expo);
  return {e * poly_value, e * (poly_value * grad_expo + poly_grad)};
}

// psi = C exp(i phi) from (C, phi) with gradients; the Hessian is a central difference of the gradient.
Jet phase_jet(const std::function<std::pair<ScalarGrad, ScalarGrad>(const Vec&)>& parts, const Vec& x, int order) {
  auto grad_at = [&](const Vec& p) {
    const auto [c, phi] = parts(p);
    const cplx e = std::exp(cplx(0.0, phi.value));
    return CVec((c.grad.cast<cplx>() + cplx(0.0, c.value) * phi.grad.cast<cplx>()) * e);
  };
  const auto [c, phi] = parts(x);
  Jet j;
  j.value = c.value * std::exp(cplx(0.0, phi.value));
  if (order >= 1) j.grad = grad_at(x);
  if (order >= 2) {
    const Eigen::Index n = x.size();
    j.hess = CMat(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double step = 1e-5 * std::max(1.0, std::abs(x(k)));
      Vec xp = x, xm = x;
      xp(k) += step;
      xm(k) -= step;
      j.hess.col(k) = (grad_at(xp) - grad_at(xm)) / (2 * step);
    }
    j.hess = (0.5 * (j.hess + j.hess.transpose())).eval();
  }
  return j;
}

double polynomial(const std::vector<double>& c, double t, double* derivative) {
  if (c.empty()) {
    *derivative = 0.0;
    return 1.0;
  }
  double v = 0.0, d = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    d = d * t + v;
    v = v * t + c[k];
  }
  *derivative = d;
  return v;
}

}  // namespace

Vec orbit_linear(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg0, double alpha, double tol) {
  validate_chart(sys, chart);
  check_linear_surface(sys, chart, cfg0, tol);
  const auto f = linear_frame(sys, chart, cfg0);
  const double c = std::cos(alpha), s = std::sin(alpha), t = f.q / f.r2;
  Vec out(cfg0.size());
  for (int i = 0; i < sys.size(); ++i) {
    const double u = cfg0(x_index(i)) - chart.B(i) * t, v = cfg0(y_index(i)) + chart.A(i) * t;
    out(x_index(i)) = chart.B(i) * t + c * u + s * v;
    out(y_index(i)) = -chart.A(i) * t + c * v - s * u;
  }
  return out;
}

double orbit_frequency(const ParticleSystem& sys, const Vec& cfg) {
  const auto sh = shape_quadratic(sys, cfg);
  if (!(sh.R2 > 0)) throw Error(ErrorKind::DegenerateInertia, "R^2 vanishes");
  const double k = 2.0 * sh.Q / sh.R2;
  return std::sqrt(std::max(0.0, (1.0 - k) * (1.0 + k)));
}

Vec orbit_quadratic(const ParticleSystem& sys, const Vec& cfg0, double alpha, double tol) {
  const auto sh = check_quadratic_surface(sys, cfg0, tol);
  if (sh.Q < -tol * sh.R2) throw Error(ErrorKind::InvalidArgument, "Q < 0 lies outside the chosen Gribov cell");
  const double k = 2.0 * sh.Q / sh.R2;
  if (1.0 - k <= 1e-15) throw Error(ErrorKind::CollinearDegenerate, "2Q = R^2, the orbit frequency vanishes");
  const double w = std::sqrt((1.0 - k) * (1.0 + k));
  const double c = std::cos(w * alpha), sn = alpha * sinc(w * alpha);
  Vec out(cfg0.size());
  for (int i = 0; i < sys.size(); ++i) {
    const double x = cfg0(x_index(i)), y = cfg0(y_index(i));
    out(x_index(i)) = c * x + (1.0 + k) * sn * y;
    out(y_index(i)) = -(1.0 - k) * sn * x + c * y;
  }
  return out;
}

Vec orbit(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg0, double alpha, double tol) {
  if (kind_of(gauge) == GaugeKind::PrincipalAxes) return orbit_quadratic(sys, cfg0, alpha, tol);
  return orbit_linear(sys, linear_chart_of(gauge), cfg0, alpha, tol);
}

Vec kernel_invariants(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg, double tol) {
  Vec rho(sys.size());
  if (kind_of(gauge) == GaugeKind::PrincipalAxes) {
    const auto sh = check_quadratic_surface(sys, cfg, tol);
    const double k = 2.0 * sh.Q / sh.R2;
    for (int i = 0; i < sys.size(); ++i) {
      const double x = cfg(x_index(i)), y = cfg(y_index(i));
      rho(i) = (1.0 - k) * x * x + (1.0 + k) * y * y;
    }
    return rho;
  }
  const LinearChart chart = linear_chart_of(gauge);
  check_linear_surface(sys, chart, cfg, tol);
  const double t = linear_q(sys, chart, cfg) / chart_norm2(sys, chart);
  for (int i = 0; i < sys.size(); ++i) {
    const double u = cfg(x_index(i)) - chart.B(i) * t, v = cfg(y_index(i)) + chart.A(i) * t;
    rho(i) = u * u + v * v;
  }
  return rho;
}

WaveFunction eigenfunction_linear(const ParticleSystem& sys, const LinearChart& chart,
                                  const std::vector<double>& lambdas, const KernelFactor& kernel) {
  validate_chart(sys, chart);
  check_integers(lambdas, sys.size());
  auto parts = [sys, chart, lambdas, kernel](const Vec& x) {
    const auto f = linear_frame(sys, chart, x);
    const Eigen::Index dim = sys.dim();
    std::vector<ScalarGrad> radii;
    ScalarGrad phase{0.0, Vec::Zero(dim)};
    for (int i = 0; i < sys.size(); ++i) {
      const double u = x(x_index(i)) - chart.B(i) * f.q / f.r2, v = x(y_index(i)) + chart.A(i) * f.q / f.r2;
      Vec gu = -chart.B(i) / f.r2 * f.grad_q, gv = chart.A(i) / f.r2 * f.grad_q;
      gu(x_index(i)) += 1.0;
      gv(y_index(i)) += 1.0;
      radii.push_back({u * u + v * v, 2 * u * gu + 2 * v * gv});
      const double l = lambdas[static_cast<std::size_t>(i)];
      if (l == 0.0) continue;
      const double rr = u * u + v * v;
      if (!(rr > 0)) throw Error(ErrorKind::InvalidArgument, "phase undefined where a radius vanishes");
      phase.value += l * std::atan2(v, u);
      phase.grad += l * (u * gv - v * gu) / rr;
    }
    double dp = 0.0;
    const double p = polynomial(kernel.poly_linear, f.q, &dp);
    return std::make_pair(kernel_value(kernel, radii, p, dp * f.grad_q), phase);
  };
  return WaveFunction(sys.dim(), [parts](const Vec& x, int order) { return phase_jet(parts, x, order); });
}

WaveFunction eigenfunction_quadratic(const ParticleSystem& sys, const std::vector<double>& ns,
                                     const KernelFactor& kernel) {
  check_integers(ns, sys.size());
  auto parts = [sys, ns, kernel](const Vec& x) {
    const auto f = quadratic_frame(sys, x);
    const double k = f.k;
    if (1.0 - k <= 1e-12) throw Error(ErrorKind::CollinearDegenerate, "2Q = R^2 at the evaluation point");
    const double kappa = std::sqrt((1.0 + k) / (1.0 - k));
    const Vec grad_kappa = kappa / ((1.0 - k) * (1.0 + k)) * f.grad_k;
    const Eigen::Index dim = sys.dim();
    std::vector<ScalarGrad> radii;
    ScalarGrad phase{0.0, Vec::Zero(dim)};
    for (int i = 0; i < sys.size(); ++i) {
      const double X = x(x_index(i)), Y = x(y_index(i));
      Vec g = (Y * Y - X * X) * f.grad_k;
      g(x_index(i)) += 2 * (1.0 - k) * X;
      g(y_index(i)) += 2 * (1.0 + k) * Y;
      radii.push_back({(1.0 - k) * X * X + (1.0 + k) * Y * Y, g});
      const double n = ns[static_cast<std::size_t>(i)];
      if (n == 0.0) continue;
      const double w = kappa * Y;
      const double rr = X * X + w * w;
      if (!(rr > 0)) throw Error(ErrorKind::InvalidArgument, "phase undefined at a particle on the origin");
      Vec gw = Y * grad_kappa;
      gw(y_index(i)) += kappa;
      Vec gx = Vec::Zero(dim);
      gx(x_index(i)) = 1.0;
      phase.value += n * std::atan2(w, X);
      phase.grad += n * (X * gw - w * gx) / rr;
    }
    // Polynomial sum c_jk Q^j (R^2)^k.
    double p = 1.0;
    Vec gp = Vec::Zero(dim);
    if (kernel.poly_quadratic.size() > 0) {
      p = 0.0;
      const double q = f.shape.Q, r2 = f.shape.R2;
      for (Eigen::Index a = 0; a < kernel.poly_quadratic.rows(); ++a)
        for (Eigen::Index b = 0; b < kernel.poly_quadratic.cols(); ++b) {
          const double c = kernel.poly_quadratic(a, b);
          if (c == 0.0) continue;
          const double qa = std::pow(q, static_cast<double>(a)), rb = std::pow(r2, static_cast<double>(b));
          p += c * qa * rb;
          if (a > 0) gp += c * static_cast<double>(a) * std::pow(q, static_cast<double>(a - 1)) * rb * f.grad_q;
          if (b > 0) gp += c * qa * static_cast<double>(b) * std::pow(r2, static_cast<double>(b - 1)) * f.grad_r2;
        }
    }
    return std::make_pair(kernel_value(kernel, radii, p, gp), phase);
  };
  return WaveFunction(sys.dim(), [parts](const Vec& x, int order) { return phase_jet(parts, x, order); });
}

double eigenvalue_quadratic(const ParticleSystem& sys, const std::vector<double>& ns, const Vec& cfg) {
  check_integers(ns, sys.size());
  double n = 0.0;
  for (double v : ns) n += v;
  return n * orbit_frequency(sys, cfg);
}

GeneratorReport verify_generator(const ParticleSystem& sys, const GaugeChart& gauge, const std::vector<Vec>& cfgs,
                                 double dalpha) {
  if (!(dalpha > 0)) throw Error(ErrorKind::InvalidArgument, "dalpha must be positive");
  const FirstOrderOperator field = residual_field(sys, gauge);
  GeneratorReport rep;
  rep.dalpha = dalpha;
  for (const Vec& x : cfgs) {
    const Vec d = (orbit(sys, gauge, x, dalpha, 1e-9) - orbit(sys, gauge, x, -dalpha, 1e-9)) / (2 * dalpha);
    rep.max_dev = std::max(rep.max_dev, (d + field.coeff(x)).cwiseAbs().maxCoeff());
    ++rep.points;
  }
  return rep;
}

OrbitInvariantReport orbit_invariants(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg0,
                                      int samples) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  const GaugeKind kind = kind_of(gauge);
  const bool quadratic = kind == GaugeKind::PrincipalAxes;
  const double period = quadratic ? 2 * std::numbers::pi / orbit_frequency(sys, cfg0) : 2 * std::numbers::pi;
  const double size2 = cfg0.squaredNorm();
  const Vec rho0 = kernel_invariants(sys, gauge, cfg0, 1e-9);
  OrbitInvariantReport rep;
  rep.samples = samples;

  double scalar_scale = 0.0;
  std::vector<double> base;
  auto scalars = [&](const Vec& x) {
    if (quadratic) {
      const auto sh = shape_quadratic(sys, x);
      return std::vector<double>{sh.S, sh.Q, sh.R2, orbit_frequency(sys, x)};
    }
    const auto sh = shape_linear(sys, x, linear_chart_of(gauge));
    return std::vector<double>{sh.s, sh.q};
  };
  base = scalars(cfg0);
  scalar_scale = quadratic ? shape_quadratic(sys, cfg0).R2
                           : std::sqrt(chart_norm2(sys, linear_chart_of(gauge))) * mass_norm(sys, cfg0);

  for (int j = 0; j <= samples; ++j) {
    const double a = period * j / samples;
    const Vec x = orbit(sys, gauge, cfg0, a, 1e-9);
    const auto s = scalars(x);
    rep.gauge_drift = std::max(rep.gauge_drift, std::abs(s[0] - base[0]) / scalar_scale);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double scale = (quadratic && i == 3) ? 1.0 : scalar_scale;
      rep.jacobian_drift = std::max(rep.jacobian_drift, std::abs(s[i] - base[i]) / scale);
    }
    rep.radius_drift = std::max(
        rep.radius_drift, (kernel_invariants(sys, gauge, x, 1e-9) - rho0).cwiseAbs().maxCoeff() / size2);
    if (has_cm_condition(kind))
      rep.center_drift =
          std::max(rep.center_drift, (center_of_mass(sys, x) - center_of_mass(sys, cfg0)).norm() / std::sqrt(size2));
    const double b = period * (0.37 + 0.11 * j / samples);
    const Vec composed = orbit(sys, gauge, x, b, 1e-9);
    rep.group_law_dev = std::max(rep.group_law_dev,
                                 (composed - orbit(sys, gauge, cfg0, a + b, 1e-9)).norm() / std::sqrt(size2));
  }
  rep.period_dev = (orbit(sys, gauge, cfg0, period, 1e-9) - cfg0).norm() / std::sqrt(size2);
  return rep;
}

EigenfunctionReport verify_eigenfunction(const ParticleSystem& sys, const GaugeChart& gauge,
                                         const std::vector<double>& quanta, const KernelFactor& kernel,
                                         const std::vector<Vec>& points) {
  const bool quadratic = kind_of(gauge) == GaugeKind::PrincipalAxes;
  const WaveFunction psi = quadratic ? eigenfunction_quadratic(sys, quanta, kernel)
                                     : eigenfunction_linear(sys, linear_chart_of(gauge), quanta, kernel);
  const PointOperator lam = apply_lambda(sys, gauge, psi);
  double total = 0.0;
  for (double q : quanta) total += q;
  EigenfunctionReport rep;
  for (const Vec& x : points) {
    const cplx value = psi.value(x);
    if (std::abs(value) == 0.0) continue;
    const double predicted = quadratic ? eigenvalue_quadratic(sys, quanta, x) : total;
    const cplx applied = lam(x) / sys.hbar();
    const cplx recovered = applied / value;
    rep.max_dev = std::max(rep.max_dev, std::abs(applied - predicted * value) / std::abs(value));
    rep.max_eigenvalue_dev = std::max(rep.max_eigenvalue_dev, std::abs(recovered - predicted));
    if (!quadratic)
      rep.max_integer_dev =
          std::max(rep.max_integer_dev, std::abs(recovered.real() - std::round(recovered.real())) +
                                            std::abs(recovered.imag()));
    rep.recovered.push_back(recovered.real());
    ++rep.points;
  }
  return rep;
}

}  // namespace rotframe
