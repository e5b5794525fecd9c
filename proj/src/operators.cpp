#include "rotframe/operators.hpp"

#include <cmath>

#include "rotframe/error.hpp"

namespace rotframe {

FirstOrderOperator::FirstOrderOperator(Eigen::Index dim, CoeffFn coeff, JacFn coeff_jac, std::string name)
    : dim_(dim), coeff_(std::move(coeff)), jac_(std::move(coeff_jac)), name_(std::move(name)) {
  if (!coeff_ || !jac_) throw Error(ErrorKind::InvalidArgument, "field operator needs coefficients and Jacobian");
}

FirstOrderOperator FirstOrderOperator::multiplier(Eigen::Index dim, ScalarFn f, GradFn grad, std::string name) {
  FirstOrderOperator op;
  op.dim_ = dim;
  op.mult_ = std::move(f);
  op.mult_grad_ = std::move(grad);
  op.name_ = std::move(name);
  return op;
}

FirstOrderOperator FirstOrderOperator::with_multiplier(ScalarFn f, GradFn grad) const {
  FirstOrderOperator op = *this;
  op.mult_ = std::move(f);
  op.mult_grad_ = std::move(grad);
  return op;
}

FirstOrderOperator FirstOrderOperator::renamed(std::string name) const {
  FirstOrderOperator op = *this;
  op.name_ = std::move(name);
  return op;
}

Vec FirstOrderOperator::coeff(const Vec& x) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "operator evaluated at wrong dimension");
  return coeff_ ? coeff_(x) : Vec::Zero(dim_);
}

Mat FirstOrderOperator::coeff_jac(const Vec& x) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "operator evaluated at wrong dimension");
  return jac_ ? jac_(x) : Mat::Zero(dim_, dim_);
}

double FirstOrderOperator::mult(const Vec& x) const { return mult_ ? mult_(x) : 0.0; }

Vec FirstOrderOperator::mult_grad(const Vec& x) const { return mult_grad_ ? mult_grad_(x) : Vec::Zero(dim_); }

cplx FirstOrderOperator::apply(const Vec& x, const Jet& psi) const {
  cplx out = mult(x) * psi.value;
  if (coeff_) out += coeff(x).cast<cplx>().dot(psi.grad);
  return out;
}

namespace {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  const Vec f0 = f(x);
  Mat j(f0.size(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double step = h * std::max(1.0, std::abs(x(k)));
    Vec xp = x, xm = x;
    xp(k) += step;
    xm(k) -= step;
    j.col(k) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return j;
}

}  // namespace

Mat finite_difference_jacobian(const FirstOrderOperator& op, const Vec& x, double h) {
  return fd_jacobian([&op](const Vec& y) { return op.coeff(y); }, x, h);
}

FirstOrderOperator commutator(const FirstOrderOperator& a, const FirstOrderOperator& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "commutator of operators of different dimension");
  const Eigen::Index n = a.dim();
  const std::string name = "[" + a.name() + "," + b.name() + "]";
  FirstOrderOperator out;
  out.dim_ = n;
  out.name_ = name;
  out.exact_ = false;
  if (a.has_field() || b.has_field()) {
    out.coeff_ = [a, b](const Vec& x) -> Vec {
      return b.coeff_jac(x) * a.coeff(x) - a.coeff_jac(x) * b.coeff(x);
    };
    auto c = out.coeff_;
    out.jac_ = [c](const Vec& x) -> Mat { return fd_jacobian(c, x, 1e-5); };
  }
  if ((a.has_field() && b.has_multiplier()) || (b.has_field() && a.has_multiplier())) {
    out.mult_ = [a, b](const Vec& x) {
      return a.coeff(x).dot(b.mult_grad(x)) - b.coeff(x).dot(a.mult_grad(x));
    };
    auto m = out.mult_;
    out.mult_grad_ = [m](const Vec& x) -> Vec {
      return fd_jacobian([&m](const Vec& y) { return Vec::Constant(1, m(y)); }, x, 1e-5).row(0).transpose();
    };
  }
  return out;
}

FirstOrderOperator linear_combination(const std::vector<FirstOrderOperator>& ops, const Vec& weights,
                                      std::string name) {
  if (ops.empty() || static_cast<Eigen::Index>(ops.size()) != weights.size())
    throw Error(ErrorKind::DimensionMismatch, "one weight per operator is required");
  const Eigen::Index n = ops.front().dim();
  for (const auto& op : ops)
    if (op.dim() != n) throw Error(ErrorKind::DimensionMismatch, "operators of different dimension");
  FirstOrderOperator out(
      n,
      [ops, weights, n](const Vec& x) {
        Vec c = Vec::Zero(n);
        for (std::size_t k = 0; k < ops.size(); ++k) c += weights(k) * ops[k].coeff(x);
        return c;
      },
      [ops, weights, n](const Vec& x) {
        Mat j = Mat::Zero(n, n);
        for (std::size_t k = 0; k < ops.size(); ++k) j += weights(k) * ops[k].coeff_jac(x);
        return j;
      },
      std::move(name));
  bool any_mult = false;
  for (const auto& op : ops) any_mult = any_mult || op.has_multiplier();
  if (any_mult)
    out = out.with_multiplier(
        [ops, weights](const Vec& x) {
          double f = 0.0;
          for (std::size_t k = 0; k < ops.size(); ++k) f += weights(k) * ops[k].mult(x);
          return f;
        },
        [ops, weights, n](const Vec& x) {
          Vec g = Vec::Zero(n);
          for (std::size_t k = 0; k < ops.size(); ++k) g += weights(k) * ops[k].mult_grad(x);
          return g;
        });
  return out;
}

FirstOrderOperator position_operator(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw Error(ErrorKind::DimensionMismatch, "coordinate index out of range");
  return FirstOrderOperator::multiplier(
      dim, [index](const Vec& x) { return x(index); },
      [dim, index](const Vec&) {
        Vec g = Vec::Zero(dim);
        g(index) = 1.0;
        return g;
      },
      (index % 2 ? "Y" : "X") + std::to_string(index / 2 + 1));
}

FirstOrderOperator constant_field(const Vec& c, std::string name) {
  const Eigen::Index n = c.size();
  return FirstOrderOperator(
      n, [c](const Vec&) { return c; }, [n](const Vec&) { return Mat::Zero(n, n); }, std::move(name));
}

FirstOrderOperator angular_momentum_field(Eigen::Index dim) {
  Mat j = Mat::Zero(dim, dim);
  for (Eigen::Index i = 0; i + 1 < dim; i += 2) {
    j(i, i + 1) = -1.0;
    j(i + 1, i) = 1.0;
  }
  return FirstOrderOperator(
      dim, [](const Vec& x) { return cross_z(x); }, [j](const Vec&) { return j; }, "Lz");
}

namespace {

std::string momentum_name(Eigen::Index k) {
  return std::string(k % 2 ? "PiY" : "PiX") + std::to_string(k / 2 + 1);
}

// Chart coefficients spread over the coordinate layout: (A_1, B_1, ..., A_N, B_N).
Vec chart_direction(const LinearChart& chart) {
  Vec n(2 * chart.A.size());
  for (Eigen::Index a = 0; a < chart.A.size(); ++a) {
    n(2 * a) = chart.A(a);
    n(2 * a + 1) = chart.B(a);
  }
  return n;
}

// Gradient of q = sum m (B x - A y).
Vec q_gradient(const ParticleSystem& sys, const LinearChart& chart) {
  Vec g(sys.dim());
  for (int a = 0; a < sys.size(); ++a) {
    g(x_index(a)) = sys.mass(a) * chart.B(a);
    g(y_index(a)) = -sys.mass(a) * chart.A(a);
  }
  return g;
}

}  // namespace

std::vector<FirstOrderOperator> pi_linear(const ParticleSystem& sys, const LinearChart& chart) {
  validate_chart(sys, chart);
  const Eigen::Index n = sys.dim();
  const Vec dir = chart_direction(chart);
  const double r2 = chart_norm2(sys, chart);
  std::vector<FirstOrderOperator> out;
  for (Eigen::Index k = 0; k < n; ++k) {
    Vec c = -sys.coord_masses()(k) * dir(k) / r2 * dir;
    c(k) += 1.0;
    out.push_back(constant_field(c, momentum_name(k)));
  }
  return out;
}

std::vector<FirstOrderOperator> pi_linear_cm(const ParticleSystem& sys, const LinearChart& chart) {
  validate_chart(sys, chart, true);
  const Eigen::Index n = sys.dim();
  const Vec dir = chart_direction(chart);
  const double r2 = chart_norm2(sys, chart), total = sys.total_mass();
  std::vector<FirstOrderOperator> out;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double m = sys.coord_masses()(k);
    Vec c = -m * dir(k) / r2 * dir;
    for (Eigen::Index j = k % 2; j < n; j += 2) c(j) -= m / total;
    c(k) += 1.0;
    out.push_back(constant_field(c, momentum_name(k)));
  }
  return out;
}

std::vector<FirstOrderOperator> pi_quadratic(const ParticleSystem& sys) {
  const Eigen::Index n = sys.dim();
  const Vec masses = sys.coord_masses();
  // Swap of x and y within each particle: d = (Y_1, X_1, ...).
  Mat swap = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; i += 2) swap(i, i + 1) = swap(i + 1, i) = 1.0;
  auto inertia = [masses](const Vec& x) {
    const double r2 = x.cwiseProduct(masses).dot(x);
    if (!(r2 > 0.0)) throw Error(ErrorKind::DegenerateInertia, "R^2 vanishes");
    return r2;
  };
  std::vector<FirstOrderOperator> out;
  for (Eigen::Index k = 0; k < n; ++k) {
    // Pi_X uses the particle's Y in the projection weight and vice versa.
    const Eigen::Index partner = k % 2 ? k - 1 : k + 1;
    const double m = masses(k);
    auto coeff = [=](const Vec& x) {
      const double g = m * x(partner) / inertia(x);
      Vec c = -g * (swap * x);
      c(k) += 1.0;
      return c;
    };
    auto jac = [=](const Vec& x) {
      const double r2 = inertia(x);
      const double g = m * x(partner) / r2;
      Vec grad_g = -g / r2 * 2.0 * masses.cwiseProduct(x);
      grad_g(partner) += m / r2;
      return Mat(-(swap * x) * grad_g.transpose() - g * swap);
    };
    out.emplace_back(n, coeff, jac, momentum_name(k));
  }
  return out;
}

FirstOrderOperator lambda_linear(const ParticleSystem& sys, const LinearChart& chart) {
  validate_chart(sys, chart);
  const Eigen::Index n = sys.dim();
  const Vec dir = chart_direction(chart);
  const double r2 = chart_norm2(sys, chart);
  const Vec gq = q_gradient(sys, chart);
  // c = z^x - (q/r2) (A, B) per particle... written out: c_X = -(Y + A q/r2), c_Y = X - B q/r2.
  const Mat rot = angular_momentum_field(n).coeff_jac(Vec::Zero(n));
  return FirstOrderOperator(
      n, [dir, r2, gq](const Vec& x) { return Vec(cross_z(x) - gq.dot(x) / r2 * dir); },
      [rot, dir, r2, gq](const Vec&) { return Mat(rot - dir * gq.transpose() / r2); }, "Lambda");
}

FirstOrderOperator lambda_linear_cm(const ParticleSystem& sys, const LinearChart& chart) {
  validate_chart(sys, chart, true);
  const Eigen::Index n = sys.dim();
  const Vec dir = chart_direction(chart);
  const double r2 = chart_norm2(sys, chart), total = sys.total_mass();
  const Vec gq = q_gradient(sys, chart);
  const Vec masses = sys.coord_masses();
  const Mat rot = angular_momentum_field(n).coeff_jac(Vec::Zero(n));
  // Rotation about the center of mass: c_X = -(Y - C_y) - A q/r2, c_Y = (X - C_x) - B q/r2.
  Mat shift = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; i += 2)
    for (Eigen::Index j = 0; j < n; j += 2) {
      shift(i, j + 1) = masses(j + 1) / total;
      shift(i + 1, j) = -masses(j) / total;
    }
  return FirstOrderOperator(
      n, [dir, r2, gq, shift](const Vec& x) { return Vec(cross_z(x) + shift * x - gq.dot(x) / r2 * dir); },
      [rot, dir, r2, gq, shift](const Vec&) { return Mat(rot + shift - dir * gq.transpose() / r2); }, "Lambda");
}

FirstOrderOperator lambda_quadratic(const ParticleSystem& sys) {
  const Eigen::Index n = sys.dim();
  const Vec masses = sys.coord_masses();
  auto kappa_and_grad = [masses, n](const Vec& x, Vec* grad) {
    double q = 0.0;
    Vec gq(n);
    for (Eigen::Index i = 0; i < n; i += 2) {
      q += 0.5 * masses(i) * (x(i) * x(i) - x(i + 1) * x(i + 1));
      gq(i) = masses(i) * x(i);
      gq(i + 1) = -masses(i) * x(i + 1);
    }
    const double r2 = x.cwiseProduct(masses).dot(x);
    if (!(r2 > 0.0)) throw Error(ErrorKind::DegenerateInertia, "R^2 vanishes");
    if (grad) *grad = 2.0 * gq / r2 - 2.0 * q / (r2 * r2) * 2.0 * masses.cwiseProduct(x);
    return 2.0 * q / r2;
  };
  auto coeff = [kappa_and_grad, n](const Vec& x) {
    const double k = kappa_and_grad(x, nullptr);
    Vec c(n);
    for (Eigen::Index i = 0; i < n; i += 2) {
      c(i) = -(1.0 + k) * x(i + 1);
      c(i + 1) = (1.0 - k) * x(i);
    }
    return c;
  };
  auto jac = [kappa_and_grad, n](const Vec& x) {
    Vec gk;
    const double k = kappa_and_grad(x, &gk);
    Mat j(n, n);
    for (Eigen::Index i = 0; i < n; i += 2) {
      j.row(i) = -x(i + 1) * gk.transpose();
      j.row(i + 1) = -x(i) * gk.transpose();
      j(i, i + 1) -= 1.0 + k;
      j(i + 1, i) += 1.0 - k;
    }
    return j;
  };
  return FirstOrderOperator(n, coeff, jac, "Lambda");
}

FirstOrderOperator lambda_eckart(const ParticleSystem& sys, const EquilibriumShape& shape) {
  validate_equilibrium(sys, shape);
  const LinearChart chart = eckart_chart(shape);
  const Eigen::Index n = sys.dim();
  const double r2 = chart_norm2(sys, chart);
  const Vec gq = q_gradient(sys, chart);  // q(dR) = sum m (Z_x dX + Z_y dY)
  // Direction (Z_y, -Z_x) per particle so that c_X = -dY + Z_y q/r2, c_Y = dX - Z_x q/r2.
  Vec dir(n);
  for (Eigen::Index i = 0; i < n; i += 2) {
    dir(i) = shape.Z(i + 1);
    dir(i + 1) = -shape.Z(i);
  }
  const Mat rot = angular_momentum_field(n).coeff_jac(Vec::Zero(n));
  return FirstOrderOperator(
      n, [dir, r2, gq](const Vec& d) { return Vec(cross_z(d) + gq.dot(d) / r2 * dir); },
      [rot, dir, r2, gq](const Vec&) { return Mat(rot + dir * gq.transpose() / r2); }, "Lambda");
}

std::vector<FirstOrderOperator> momentum_fields(const ParticleSystem& sys, const GaugeChart& gauge) {
  switch (kind_of(gauge)) {
    case GaugeKind::Linear: return pi_linear(sys, linear_chart_of(gauge));
    case GaugeKind::LinearCm:
    case GaugeKind::Eckart: return pi_linear_cm(sys, linear_chart_of(gauge));
    case GaugeKind::PrincipalAxes: return pi_quadratic(sys);
  }
  throw Error(ErrorKind::InvalidChart, "unhandled gauge kind");
}

FirstOrderOperator residual_field(const ParticleSystem& sys, const GaugeChart& gauge) {
  switch (kind_of(gauge)) {
    case GaugeKind::Linear: return lambda_linear(sys, linear_chart_of(gauge));
    case GaugeKind::LinearCm:
    case GaugeKind::Eckart: return lambda_linear_cm(sys, linear_chart_of(gauge));
    case GaugeKind::PrincipalAxes: return lambda_quadratic(sys);
  }
  throw Error(ErrorKind::InvalidChart, "unhandled gauge kind");
}

LabMomentumReport lab_momentum_check(const ParticleSystem& sys, const LinearChart& chart,
                                     const WaveFunction& psi, double ell_z,
                                     const std::vector<Vec>& lab_points, double tol) {
  const auto pis = pi_linear(sys, chart);
  const auto lam = lambda_linear(sys, chart);
  const cplx i(0.0, 1.0);
  auto lab_value = [&](const Vec& r) {
    const auto fixed = fix_linear(sys, r, chart);
    return psi.value(fixed.body.coords) * std::exp(i * ell_z * fixed.theta);
  };
  LabMomentumReport rep;
  for (const Vec& r : lab_points) {
    const auto fixed = fix_linear(sys, r, chart);
    const Vec& body = fixed.body.coords;
    const Jet j = psi(body, 1);
    const double q = linear_q(sys, chart, body);
    const cplx lam_psi = -i * lam.apply(body, j);
    const cplx phase = std::exp(i * ell_z * fixed.theta);
    const double c = std::cos(fixed.theta), s = std::sin(fixed.theta);
    for (int a = 0; a < sys.size(); ++a) {
      const double m = sys.mass(a);
      const cplx px = -i * pis[x_index(a)].apply(body, j) + m * chart.A(a) / q * (ell_z * j.value - lam_psi);
      const cplx py = -i * pis[y_index(a)].apply(body, j) + m * chart.B(a) / q * (ell_z * j.value - lam_psi);
      const cplx rhs[2] = {(c * px - s * py) * phase, (s * px + c * py) * phase};
      for (int comp = 0; comp < 2; ++comp) {
        const Eigen::Index k = 2 * a + comp;
        const double h = 1e-3 * std::max(1.0, std::abs(r(k)));
        auto at = [&](double off) {
          Vec rr = r;
          rr(k) += off;
          return lab_value(rr);
        };
        const cplx d = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
        const double dev = std::abs(-i * d - rhs[comp]);
        if (dev > rep.max_dev || rep.point_of_max.size() == 0) {
          rep.max_dev = std::max(rep.max_dev, dev);
          rep.point_of_max = r;
        }
      }
    }
    ++rep.points;
  }
  rep.pass = rep.max_dev < tol;
  return rep;
}

}  // namespace rotframe
