#include "rotframe/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "rotframe/algebra.hpp"
#include "rotframe/error.hpp"

namespace rotframe {

namespace {

const cplx kI(0.0, 1.0);

// Rows of the linear constraints: gradient of s, and of the center of mass when fixed.
Mat constraint_rows(const ParticleSystem& sys, const LinearChart& chart, bool cm) {
  const Eigen::Index n = sys.dim();
  Mat g = Mat::Zero(cm ? 3 : 1, n);
  for (int a = 0; a < sys.size(); ++a) {
    g(0, x_index(a)) = sys.mass(a) * chart.A(a);
    g(0, y_index(a)) = sys.mass(a) * chart.B(a);
    if (cm) {
      g(1, x_index(a)) = sys.mass(a) / sys.total_mass();
      g(2, y_index(a)) = sys.mass(a) / sys.total_mass();
    }
  }
  return g;
}

// Column subset of size k with the largest |det|.
std::vector<Eigen::Index> best_block(const Mat& g, double& det_out) {
  const Eigen::Index k = g.rows(), n = g.cols();
  std::vector<Eigen::Index> best, cur(static_cast<std::size_t>(k));
  double best_det = 0.0;
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    Eigen::Index j = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) cur[static_cast<std::size_t>(j++)] = i;
    Mat block(k, k);
    for (Eigen::Index c = 0; c < k; ++c) block.col(c) = g.col(cur[static_cast<std::size_t>(c)]);
    const double d = std::abs(block.determinant());
    if (d > best_det) {
      best_det = d;
      best = cur;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  det_out = best_det;
  return best;
}

double shape_q(const ParticleSystem& sys, const Vec& x) { return shape_quadratic(sys, x).Q; }

Vec grad_q_quadratic(const ParticleSystem& sys, const Vec& x) {
  Vec g(x.size());
  for (int a = 0; a < sys.size(); ++a) {
    g(x_index(a)) = sys.mass(a) * x(x_index(a));
    g(y_index(a)) = -sys.mass(a) * x(y_index(a));
  }
  return g;
}

Vec grad_q_linear(const ParticleSystem& sys, const LinearChart& chart) {
  Vec g(sys.dim());
  for (int a = 0; a < sys.size(); ++a) {
    g(x_index(a)) = sys.mass(a) * chart.B(a);
    g(y_index(a)) = -sys.mass(a) * chart.A(a);
  }
  return g;
}

// Real jet of v^p from the jet of v.
Jet power_jet(const Jet& v, double p, int order) {
  Jet out;
  out.value = std::pow(v.value, p);
  if (order >= 1) out.grad = p * std::pow(v.value, p - 1.0) * v.grad;
  if (order >= 2)
    out.hess = p * std::pow(v.value, p - 1.0) * v.hess +
               p * (p - 1.0) * std::pow(v.value, p - 2.0) * v.grad * v.grad.transpose();
  return out;
}

// Hessian by central differences of analytic gradients, for functions that stop at first order.
CMat hessian_fallback(const WaveFunction& psi, const Vec& x) {
  const Eigen::Index n = x.size();
  CMat h(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double step = std::cbrt(2.2e-16) * std::max(1.0, std::abs(x(j)));
    Vec xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    h.col(j) = (psi(xp, 1).grad - psi(xm, 1).grad) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose()).eval();
}

Jet jet2(const WaveFunction& psi, const Vec& x) {
  Jet j = psi(x, 2);
  if (j.hess.size() == 0) j.hess = hessian_fallback(psi, x);
  return j;
}

// Applies the first-order field twice: c.grad(c.grad psi).
cplx second_along(const Vec& c, const Mat& jac, const Jet& psi) {
  const CVec cc = c.cast<cplx>();
  return (cc.transpose() * psi.hess * cc)(0) + (jac * c).cast<cplx>().dot(psi.grad);
}

cplx first_along(const Vec& c, const Jet& psi) { return (c.cast<cplx>().transpose() * psi.grad)(0); }

// Cached operator families of one gauge.
struct GaugeOperators {
  std::vector<FirstOrderOperator> pis;
  FirstOrderOperator lambda;
  Vec masses;
};

GaugeOperators operators_of(const ParticleSystem& sys, const GaugeChart& gauge) {
  return {momentum_fields(sys, gauge), residual_field(sys, gauge), sys.coord_masses()};
}

double centrifugal_prefactor(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg) {
  if (kind_of(gauge) == GaugeKind::PrincipalAxes) {
    const auto sh = shape_quadratic(sys, cfg);
    if (!(sh.Q > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "Q vanishes");
    return sh.R2 / (8.0 * sh.Q * sh.Q);
  }
  const LinearChart chart = linear_chart_of(gauge);
  const double q = linear_q(sys, chart, cfg);
  if (!(q > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "q vanishes");
  return chart_norm2(sys, chart) / (2.0 * q * q);
}

// Gradient of log J.
Vec log_jacobian_grad(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg) {
  if (kind_of(gauge) == GaugeKind::PrincipalAxes) {
    const double q = shape_q(sys, cfg);
    const double r2 = moment_of_inertia(sys, cfg);
    return grad_q_quadratic(sys, cfg) / q - sys.coord_masses().cwiseProduct(cfg) / r2;
  }
  const LinearChart chart = linear_chart_of(gauge);
  return grad_q_linear(sys, chart) / linear_q(sys, chart, cfg);
}

cplx terms_with(const GaugeOperators& ops, const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg,
                const Jet& psi, double ell_z, bool flat) {
  const double hbar = sys.hbar();
  const double pref = centrifugal_prefactor(sys, gauge, cfg);
  cplx kin(0.0, 0.0);
  const Vec dlog = flat ? Vec() : log_jacobian_grad(sys, gauge, cfg);
  for (std::size_t k = 0; k < ops.pis.size(); ++k) {
    const Vec c = ops.pis[k].coeff(cfg);
    cplx t = second_along(c, ops.pis[k].coeff_jac(cfg), psi);
    if (!flat) t += c.dot(dlog) * first_along(c, psi);
    kin -= t / (2.0 * ops.masses(static_cast<Eigen::Index>(k)));
  }
  const Vec lc = ops.lambda.coeff(cfg);
  const cplx l1 = first_along(lc, psi);
  const cplx l2 = second_along(lc, ops.lambda.coeff_jac(cfg), psi);
  // (ell - Lambda/hbar)^2 psi with Lambda/hbar = -i L.
  const cplx cent = ell_z * ell_z * psi.value + 2.0 * kI * ell_z * l1 - l2;
  return hbar * hbar * (kin + pref * cent);
}

}  // namespace

SurfaceChart::SurfaceChart(const ParticleSystem& sys, const GaugeChart& gauge, const std::optional<Vec>& reference)
    : sys_(sys), gauge_(gauge) {
  validate_gauge(sys, gauge);
  const Eigen::Index n = sys.dim();
  const GaugeKind k = kind_of(gauge);
  if (k == GaugeKind::PrincipalAxes) {
    int e = 0;
    if (reference) {
      if (reference->size() != n) throw Error(ErrorKind::DimensionMismatch, "reference configuration size");
      double best = -1.0;
      for (int a = 0; a < sys.size(); ++a) {
        const double v = std::abs(sys.mass(a) * (*reference)(x_index(a)));
        if (v > best) {
          best = v;
          e = a;
        }
      }
      if (!(best > 0.0)) throw Error(ErrorKind::NoEliminableCoordinate, "every X vanishes at the reference");
    }
    solved_ = y_index(e);
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != solved_) free_.push_back(i);
    free_dim_ = n - 1;
    return;
  }
  const LinearChart chart = linear_chart_of(gauge);
  const bool cm = has_cm_condition(k);
  if (k == GaugeKind::Eckart && sys.size() == 2) {
    const Vec& z = std::get<EckartGauge>(gauge).shape.Z;
    if (z(1) == 0.0 && z(3) == 0.0) {
      // u = dX1 - dX2; dY vanish and the center stays fixed.
      eckart_pair_ = true;
      free_dim_ = 1;
      offset_ = z;
      const double m1 = sys.mass(0), m2 = sys.mass(1), total = sys.total_mass();
      basis_ = Mat::Zero(4, 1);
      basis_(0, 0) = m2 / total;
      basis_(2, 0) = -m1 / total;
      // delta(s) delta(C_y) integrated over dY1, dY2.
      const double det = std::abs(m1 * z(0) * m2 / total - m2 * z(2) * m1 / total);
      if (!(det > 0.0)) throw Error(ErrorKind::NoEliminableCoordinate, "degenerate pair shape");
      factor_ = 1.0 / det;
      return;
    }
  }
  const Mat g = constraint_rows(sys, chart, cm);
  double det = 0.0;
  const auto elim = best_block(g, det);
  if (!(det > 1e-14)) throw Error(ErrorKind::NoEliminableCoordinate, "constraints do not determine any coordinate");
  std::vector<bool> is_elim(static_cast<std::size_t>(n), false);
  for (auto e : elim) is_elim[static_cast<std::size_t>(e)] = true;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!is_elim[static_cast<std::size_t>(i)]) free_.push_back(i);
  free_dim_ = static_cast<Eigen::Index>(free_.size());
  const Eigen::Index r = g.rows();
  Mat ge(r, r), gf(r, free_dim_);
  for (Eigen::Index c = 0; c < r; ++c) ge.col(c) = g.col(elim[static_cast<std::size_t>(c)]);
  for (Eigen::Index c = 0; c < free_dim_; ++c) gf.col(c) = g.col(free_[static_cast<std::size_t>(c)]);
  const Mat solve = -ge.fullPivLu().solve(gf);
  basis_ = Mat::Zero(n, free_dim_);
  for (Eigen::Index c = 0; c < free_dim_; ++c) basis_(free_[static_cast<std::size_t>(c)], c) = 1.0;
  for (Eigen::Index c = 0; c < r; ++c) basis_.row(elim[static_cast<std::size_t>(c)]) = solve.row(c);
  offset_ = Vec::Zero(n);
  factor_ = 1.0 / det;
}

Vec SurfaceChart::embed(const Vec& u) const {
  if (u.size() != free_dim_) throw Error(ErrorKind::DimensionMismatch, "free coordinate count");
  if (solved_ < 0) return offset_ + basis_ * u;
  const Eigen::Index n = sys_.dim();
  Vec x(n);
  for (Eigen::Index c = 0; c < free_dim_; ++c) x(free_[static_cast<std::size_t>(c)]) = u(c);
  const Eigen::Index xe = solved_ - 1;
  const int e = static_cast<int>(xe / 2);
  double s = 0.0;
  for (int a = 0; a < sys_.size(); ++a)
    if (a != e) s += sys_.mass(a) * x(x_index(a)) * x(y_index(a));
  const double denom = sys_.mass(e) * x(xe);
  if (denom == 0.0) throw Error(ErrorKind::DegenerateJacobian, "eliminated coordinate has vanishing X");
  x(solved_) = -s / denom;
  return x;
}

Vec SurfaceChart::free_coords(const Vec& cfg) const {
  if (cfg.size() != sys_.dim()) throw Error(ErrorKind::DimensionMismatch, "configuration size");
  if (eckart_pair_) return Vec::Constant(1, (cfg(0) - offset_(0)) - (cfg(2) - offset_(2)));
  Vec u(free_dim_);
  for (Eigen::Index c = 0; c < free_dim_; ++c) u(c) = cfg(free_[static_cast<std::size_t>(c)]);
  return u;
}

double SurfaceChart::residual(const Vec& cfg) const {
  if (kind() == GaugeKind::PrincipalAxes) return std::abs(shape_quadratic(sys_, cfg).S);
  double r = std::abs(linear_s(sys_, linear_chart_of(gauge_), cfg));
  if (has_cm_condition(kind())) r = std::max(r, center_of_mass(sys_, cfg).norm());
  return r;
}

double SurfaceChart::jacobian(const Vec& cfg) const {
  if (kind() == GaugeKind::PrincipalAxes) {
    const auto sh = shape_quadratic(sys_, cfg);
    return sh.R2 > 0.0 ? 2.0 * sh.Q / std::sqrt(sh.R2) : 0.0;
  }
  return linear_q(sys_, linear_chart_of(gauge_), cfg);
}

double SurfaceChart::weight(const Vec& cfg) const {
  if (solved_ >= 0) {
    const double q = shape_q(sys_, cfg);
    return q / std::abs(sys_.mass(static_cast<int>(solved_ / 2)) * cfg(solved_ - 1));
  }
  return jacobian(cfg) * factor_;
}

double SurfaceChart::absorbed_weight(const Vec& cfg) const {
  if (solved_ >= 0)
    return std::sqrt(moment_of_inertia(sys_, cfg)) /
           (2.0 * std::abs(sys_.mass(static_cast<int>(solved_ / 2)) * cfg(solved_ - 1)));
  return factor_;
}

bool SurfaceChart::in_domain(const Vec& cfg) const { return jacobian(cfg) > 0.0; }

Box bump_box(const SurfaceChart& chart, const std::vector<BumpParams>& bumps, double width) {
  if (bumps.empty()) throw Error(ErrorKind::InvalidArgument, "no bumps to cover");
  const Eigen::Index f = chart.free_dim();
  Box box{Vec::Constant(f, std::numeric_limits<double>::infinity()),
          Vec::Constant(f, -std::numeric_limits<double>::infinity())};
  for (const auto& b : bumps) {
    const Vec u = chart.free_coords(b.center);
    // The pair chart mixes two coordinates, which widens the marginal by sqrt(2).
    const double half = width * b.sigma * (chart.free_indices().empty() ? std::sqrt(2.0) : 1.0);
    box.lo = box.lo.cwiseMin((u.array() - half).matrix());
    box.hi = box.hi.cwiseMax((u.array() + half).matrix());
  }
  return box;
}

InnerProductResult matrix_element(const SurfaceChart& chart, const WaveFunction& phi, const PointOperator& op_psi,
                                  bool absorbed, const QuadratureSpec& spec, const Box& box) {
  auto integrand = [&](const Vec& u) -> cplx {
    Vec x;
    try {
      x = chart.embed(u);
    } catch (const Error&) {
      return 0.0;
    }
    if (!chart.in_domain(x)) return 0.0;
    const double w = absorbed ? chart.absorbed_weight(x) : chart.weight(x);
    return w * std::conj(phi.value(x)) * op_psi(x);
  };
  if (boundary_fraction(integrand, box) > 1e-8)
    throw Error(ErrorKind::QuadratureNotConverged, "integrand has not decayed on the box faces");
  const auto r = integrate_box(integrand, box, spec);
  return {r.value, r.error, r.evaluations};
}

InnerProductResult inner_product(const SurfaceChart& chart, const WaveFunction& phi, const WaveFunction& psi,
                                 const QuadratureSpec& spec, const Box& box) {
  if (phi.jacobian_absorbed() != psi.jacobian_absorbed())
    throw Error(ErrorKind::InvalidArgument, "mixing absorbed and plain wave functions");
  return matrix_element(chart, phi, [&psi](const Vec& x) { return psi.value(x); }, psi.jacobian_absorbed(), spec,
                        box);
}

cplx hamiltonian_terms(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg, const Jet& psi,
                       double ell_z, bool flat) {
  return terms_with(operators_of(sys, gauge), sys, gauge, cfg, psi, ell_z, flat);
}

double quantum_potential(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg) {
  const double h2 = sys.hbar() * sys.hbar();
  if (kind_of(gauge) == GaugeKind::PrincipalAxes) {
    const auto sh = shape_quadratic(sys, cfg);
    if (!(sh.Q > 0.0) || !(sh.R2 > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "Q or R vanishes");
    return h2 * (-sh.R2 / (8.0 * sh.Q * sh.Q) + (7.0 - 4.0 * sys.size()) / (8.0 * sh.R2));
  }
  const LinearChart chart = linear_chart_of(gauge);
  const double q = linear_q(sys, chart, cfg);
  if (!(q > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "q vanishes");
  return -h2 * chart_norm2(sys, chart) / (8.0 * q * q);
}

PointOperator apply_hamiltonian(const ParticleSystem& sys, const GaugeChart& gauge, const WaveFunction& psi,
                                double ell_z) {
  auto ops = std::make_shared<GaugeOperators>(operators_of(sys, gauge));
  return [ops, sys, gauge, psi, ell_z](const Vec& x) {
    const Jet j = jet2(psi, x);
    const bool flat = psi.jacobian_absorbed();
    cplx h = terms_with(*ops, sys, gauge, x, j, ell_z, flat) + potential_energy(sys, x) * j.value;
    if (flat) h += quantum_potential(sys, gauge, x) * j.value;
    return h;
  };
}

PointOperator apply_lambda(const ParticleSystem& sys, const GaugeChart& gauge, const WaveFunction& psi) {
  const FirstOrderOperator lam = residual_field(sys, gauge);
  const double hbar = sys.hbar();
  return [lam, psi, hbar](const Vec& x) { return -kI * hbar * lam.apply(x, psi(x, 1)); };
}

Jet jacobian_jet(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg) {
  const Eigen::Index n = sys.dim();
  Jet out;
  if (kind_of(gauge) == GaugeKind::PrincipalAxes) {
    const Vec m = sys.coord_masses();
    Jet two_q;
    two_q.value = 2.0 * shape_q(sys, cfg);
    two_q.grad = (2.0 * grad_q_quadratic(sys, cfg)).cast<cplx>();
    Vec d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = (i % 2 ? -2.0 : 2.0) * m(i);
    two_q.hess = d.asDiagonal().toDenseMatrix().cast<cplx>();
    Jet r2;
    r2.value = moment_of_inertia(sys, cfg);
    r2.grad = (2.0 * m.cwiseProduct(cfg)).cast<cplx>();
    r2.hess = (2.0 * m).asDiagonal().toDenseMatrix().cast<cplx>();
    return jet_product(two_q, power_jet(r2, -0.5, 2), 2);
  }
  const LinearChart chart = linear_chart_of(gauge);
  out.value = linear_q(sys, chart, cfg);
  out.grad = grad_q_linear(sys, chart).cast<cplx>();
  out.hess = CMat::Zero(n, n);
  return out;
}

WaveFunction absorb_jacobian(const SurfaceChart& chart, const WaveFunction& psi) {
  if (psi.jacobian_absorbed()) throw Error(ErrorKind::InvalidArgument, "wave function already absorbed");
  const ParticleSystem sys = chart.system();
  const GaugeChart gauge = chart.gauge();
  return WaveFunction(
      psi.dim(),
      [sys, gauge, psi](const Vec& x, int order) {
        const Jet j = jacobian_jet(sys, gauge, x);
        if (!(j.value.real() > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "outside the Jacobian domain");
        Jet p = psi(x, order);
        if (order >= 2 && p.hess.size() == 0) p.hess = hessian_fallback(psi, x);
        return jet_product(power_jet(j, 0.5, order), p, order);
      },
      true);
}

WaveFunction emit_jacobian(const SurfaceChart& chart, const WaveFunction& psi_tilde) {
  if (!psi_tilde.jacobian_absorbed()) throw Error(ErrorKind::InvalidArgument, "wave function is not absorbed");
  const ParticleSystem sys = chart.system();
  const GaugeChart gauge = chart.gauge();
  return WaveFunction(
      psi_tilde.dim(),
      [sys, gauge, psi_tilde](const Vec& x, int order) {
        const Jet j = jacobian_jet(sys, gauge, x);
        if (!(j.value.real() > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "outside the Jacobian domain");
        Jet p = psi_tilde(x, order);
        if (order >= 2 && p.hess.size() == 0) p.hess = hessian_fallback(psi_tilde, x);
        return jet_product(power_jet(j, -0.5, order), p, order);
      },
      false);
}

RepresentationReport representation_check(const ParticleSystem& sys, const GaugeChart& gauge,
                                          const WaveFunction& psi_tilde, double ell_z,
                                          const std::vector<Vec>& points, double tol) {
  const GaugeOperators ops = operators_of(sys, gauge);
  RepresentationReport rep;
  for (const Vec& x : points) {
    const Jet jt = jet2(psi_tilde, x);
    const Jet jac = jacobian_jet(sys, gauge, x);
    const Jet psi = jet_product(power_jet(jac, -0.5, 2), jt, 2);
    // J^(1/2) H psi with the curved ordering, against the flat form.
    const cplx curved = std::sqrt(jac.value) * terms_with(ops, sys, gauge, x, psi, ell_z, false);
    const cplx flat = terms_with(ops, sys, gauge, x, jt, ell_z, true);
    const double vq = quantum_potential(sys, gauge, x);
    const double scale = std::max(std::abs(jt.value), 1e-300);
    rep.max_dev = std::max(rep.max_dev, std::abs(curved - flat - vq * jt.value) / scale);
    if (std::abs(jt.value) > 1e-8) {
      const cplx recovered = (curved - flat) / jt.value;
      rep.max_potential_dev = std::max(rep.max_potential_dev, std::abs(recovered - vq));
    }
    ++rep.points;
  }
  rep.pass = rep.points > 0 && rep.max_dev < tol && rep.max_potential_dev < tol;
  return rep;
}

HermiticityReport hermiticity_check(const ParticleSystem& sys, const GaugeChart& gauge, double ell_z, int trials,
                                    double tol_factor, std::uint64_t seed, const QuadratureSpec& spec) {
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trial");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto ops = std::make_shared<GaugeOperators>(operators_of(sys, gauge));
  const FirstOrderOperator lam = residual_field(sys, gauge);
  const Eigen::Index n = sys.dim();
  const bool quadratic = kind_of(gauge) == GaugeKind::PrincipalAxes;
  HermiticityReport rep;
  rep.pass = true;
  for (int t = 0; t < trials; ++t) {
    const Vec c = sample_on_surface(sys, gauge, rng);
    // Keep the bumps far from the Jacobian zero and, for principal axes, from X_e = 0.
    double sigma = 0.4;
    if (quadratic) {
      const double q = shape_q(sys, c);
      const double mmax = *std::max_element(sys.masses().begin(), sys.masses().end());
      sigma = std::min({sigma, 0.1 * q / grad_q_quadratic(sys, c).norm(), 0.1 * std::sqrt(q / mmax)});
      double xe = 0.0;
      for (int a = 0; a < sys.size(); ++a) xe = std::max(xe, std::abs(c(x_index(a))));
      sigma = std::min(sigma, 0.1 * xe);
    } else {
      const LinearChart chart = linear_chart_of(gauge);
      sigma = std::min(sigma, 0.1 * linear_q(sys, chart, c) / grad_q_linear(sys, chart).norm());
    }
    auto make_bump = [&](const Vec& center) {
      BumpParams b;
      b.center = center;
      b.sigma = sigma;
      b.c0 = cplx(normal(rng), normal(rng));
      b.lin_re = Vec(n);
      b.lin_im = Vec(n);
      Mat k(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        b.lin_re(i) = normal(rng) / sigma;
        b.lin_im(i) = normal(rng) / sigma;
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = normal(rng) / (sigma * sigma);
      }
      b.quad = 0.5 * (k + k.transpose());
      return b;
    };
    Vec c2 = c;
    for (Eigen::Index i = 0; i < n; ++i) c2(i) += 0.5 * sigma * normal(rng);
    const BumpParams bp = make_bump(c), bq = make_bump(c2);
    const WaveFunction phi = gaussian_bump(bp), psi = gaussian_bump(bq);
    const SurfaceChart chart(sys, gauge, c);
    // Whitened free coordinates: u = u0 + L v with L L^T = sigma^2 (K^T K)^-1 and K the
    // tangent map of the chart at the first center, so both bumps look round in v.
    const Vec u0 = chart.free_coords(c);
    const Eigen::Index f = chart.free_dim();
    Mat tangent(n, f);
    for (Eigen::Index j = 0; j < f; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(u0(j)));
      Vec up = u0, um = u0;
      up(j) += h;
      um(j) -= h;
      tangent.col(j) = (chart.embed(up) - chart.embed(um)) / (2.0 * h);
    }
    const Mat cov = sigma * sigma * (tangent.transpose() * tangent).inverse();
    const Mat lower = Eigen::LLT<Mat>(cov).matrixL();
    const double det_l = lower.determinant();
    const Vec v2 = lower.triangularView<Eigen::Lower>().solve(chart.free_coords(c2) - u0);
    const double width = 6.5;
    const Box box{(v2.cwiseMin(Vec::Zero(f)).array() - width).matrix(),
                  (v2.cwiseMax(Vec::Zero(f)).array() + width).matrix()};

    // Norms, <phi|H psi>, <H phi|psi>, the same for Lambda and for the potential.
    auto integrand = [&](const Vec& white) -> CVec {
      CVec out = CVec::Zero(8);
      Vec x;
      try {
        x = chart.embed(u0 + lower * white);
      } catch (const Error&) {
        return out;
      }
      if (!chart.in_domain(x)) return out;
      const double w = chart.weight(x) * det_l;
      const Jet jp = jet2(phi, x), jq = jet2(psi, x);
      const double v = potential_energy(sys, x);
      const cplx hp = terms_with(*ops, sys, gauge, x, jp, ell_z, false) + v * jp.value;
      const cplx hq = terms_with(*ops, sys, gauge, x, jq, ell_z, false) + v * jq.value;
      const cplx lp = -kI * sys.hbar() * lam.apply(x, jp), lq = -kI * sys.hbar() * lam.apply(x, jq);
      out(0) = w * std::norm(jp.value);
      out(1) = w * std::norm(jq.value);
      out(2) = w * std::conj(jp.value) * hq;
      out(3) = w * std::conj(hp) * jq.value;
      out(4) = w * std::conj(jp.value) * lq;
      out(5) = w * std::conj(lp) * jq.value;
      out(6) = w * std::conj(jp.value) * v * jq.value;
      out(7) = w * std::conj(v * jp.value) * jq.value;
      return out;
    };
    const double edge = boundary_fraction([&](const Vec& u) { return integrand(u)(2); }, box);
    if (edge > 1e-8) throw Error(ErrorKind::QuadratureNotConverged, "test functions reach the box faces");
    QuadratureSpec s = spec;
    s.tol = 0.0;
    const auto r = integrate_box(integrand, 8, box, s);
    const double norm = std::sqrt(r[0].value.real() * r[1].value.real());
    const double err_h = (r[2].error + r[3].error) / norm;
    const double err_l = (r[4].error + r[5].error) / norm;
    const double err_v = (r[6].error + r[7].error) / norm;
    const double ah = std::abs(r[2].value - r[3].value) / norm;
    const double al = std::abs(r[4].value - r[5].value) / norm;
    const double av = std::abs(r[6].value - r[7].value) / norm;
    rep.max_asym_h = std::max(rep.max_asym_h, ah);
    rep.max_asym_lambda = std::max(rep.max_asym_lambda, al);
    rep.max_asym_potential = std::max(rep.max_asym_potential, av);
    rep.max_quad_error = std::max({rep.max_quad_error, err_h, err_l});
    rep.worst_ratio = std::max({rep.worst_ratio, ah / err_h, al / err_l, av / err_v});
    if (!(ah < tol_factor * err_h) || !(al < tol_factor * err_l)) rep.pass = false;
    ++rep.trials;
  }
  return rep;
}

}  // namespace rotframe
