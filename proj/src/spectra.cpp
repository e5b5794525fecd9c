#include "rotframe/spectra.hpp"

#include <gsl/gsl_integration.h>
#include <gsl/gsl_spline.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "rotframe/error.hpp"

namespace rotframe {

namespace {

struct GridSpectrum {
  std::vector<double> values;
  Vec nodes;
  std::vector<Vec> vectors;
};

// Lowest n_states eigenpairs of the symmetric tridiagonal (diag, off).
void tridiagonal_lowest(std::vector<double> diag, std::vector<double> off, int n_states,
                        std::vector<double>& values, Mat& vectors) {
  const auto n = static_cast<lapack_int>(diag.size());
  if (n_states > n) throw Error(ErrorKind::InvalidArgument, "more states requested than grid points");
  off.resize(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
  vectors.resize(n, n_states);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevx(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0.0, 0.0, 1,
                                         n_states, 2 * LAPACKE_dlamch('S'), &found, w.data(), vectors.data(), n,
                                         ifail.data());
  if (info != 0 || found != n_states)
    throw Error(ErrorKind::GridTooCoarse, "tridiagonal eigensolver failed, info " + std::to_string(info));
  values.assign(w.begin(), w.begin() + n_states);
}

void fix_sign(Vec& u) {
  const double big = u.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u(i)) > 1e-3 * big) {
      if (u(i) < 0) u = -u;
      return;
    }
  }
}

GridSpectrum solve_dirichlet(const RadialProblem& p, int interior, int n_states) {
  const double h = (p.r_max - p.r_min) / (interior + 1);
  const double kin = p.hbar * p.hbar / (2 * p.mass * h * h);
  std::vector<double> diag(static_cast<std::size_t>(interior));
  std::vector<double> off(static_cast<std::size_t>(interior - 1), -kin);
  GridSpectrum out;
  out.nodes.resize(interior);
  for (int i = 0; i < interior; ++i) {
    const double r = p.r_min + (i + 1) * h;
    const double v = p.potential(r);
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "effective potential not finite on the grid");
    out.nodes(i) = r;
    diag[static_cast<std::size_t>(i)] = 2 * kin + v;
  }
  Mat z;
  tridiagonal_lowest(std::move(diag), std::move(off), n_states, out.values, z);
  for (int s = 0; s < n_states; ++s) {
    Vec u = z.col(s) / std::sqrt(h);
    fix_sign(u);
    out.vectors.push_back(std::move(u));
  }
  return out;
}

SpectrumResult richardson(const GridSpectrum& coarse, GridSpectrum fine, double tolerance) {
  SpectrumResult res;
  for (std::size_t s = 0; s < fine.values.size(); ++s) {
    const double diff = fine.values[s] - coarse.values[s];
    res.eigenvalues.push_back(fine.values[s] + diff / 3.0);
    res.errors.push_back(std::abs(diff) / 3.0);
  }
  res.convergence = *std::max_element(res.errors.begin(), res.errors.end());
  res.grid = std::move(fine.nodes);
  res.eigenvectors = std::move(fine.vectors);
  if (tolerance > 0 && res.convergence > tolerance)
    throw Error(ErrorKind::GridTooCoarse,
                "Richardson error " + std::to_string(res.convergence) + " above " + std::to_string(tolerance));
  return res;
}

double body_potential(const ParticleSystem& sys, double x) {
  const auto& body = *sys.body_term();
  const double u = body.potential.value(x);
  return body.mass_weighted ? sys.mass(0) * u : u;
}

GridSpectrum solve_polar(const ParticleSystem& sys, double ell, double r_max, int cells, int n_states) {
  const double m = sys.mass(0), hbar = sys.hbar();
  const double h = r_max / cells;
  const double kin = hbar * hbar / (2 * m * h * h);
  std::vector<double> diag(static_cast<std::size_t>(cells));
  std::vector<double> off(static_cast<std::size_t>(cells - 1));
  GridSpectrum out;
  out.nodes.resize(cells);
  for (int i = 0; i < cells; ++i) {
    const double x = (i + 0.5) * h;
    out.nodes(i) = x;
    // Face fluxes x_{i+1/2} (f_{i+1} - f_i) / h over the cell weight x_i h; the face at 0 carries nothing.
    diag[static_cast<std::size_t>(i)] =
        kin * (2.0 * i + 1.0) * h / x + hbar * hbar * ell * ell / (2 * m * x * x) + body_potential(sys, x);
    if (i + 1 < cells) off[static_cast<std::size_t>(i)] = -kin * (i + 1.0) / std::sqrt((i + 0.5) * (i + 1.5));
  }
  Mat z;
  tridiagonal_lowest(std::move(diag), std::move(off), n_states, out.values, z);
  for (int s = 0; s < n_states; ++s) {
    Vec u = z.col(s) / std::sqrt(h);
    fix_sign(u);
    out.vectors.push_back(std::move(u));
  }
  return out;
}

void check_integer(double ell) {
  if (!std::isfinite(ell) || std::abs(ell - std::round(ell)) > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "angular momentum must be an integer, got " + std::to_string(ell));
}

// Least squares y = c1 x1 + c2 x2.
std::pair<double, double> fit_two(const std::vector<double>& x1, const std::vector<double>& x2,
                                  const std::vector<double>& y) {
  Mat a(static_cast<Eigen::Index>(y.size()), 2);
  Vec b(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = x1[i];
    a(r, 1) = x2[i];
    b(r) = y[i];
  }
  const Vec c = a.colPivHouseholderQr().solve(b);
  return {c(0), c(1)};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> one(x.size(), 1.0), lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  return fit_two(lx, one, ly).first;
}

}  // namespace

void validate(const RadialProblem& p) {
  if (!(p.mass > 0) || !(p.hbar > 0)) throw Error(ErrorKind::InvalidArgument, "mass and hbar must be positive");
  if (!(p.r_min > 0) || !(p.r_max > p.r_min)) throw Error(ErrorKind::InvalidArgument, "need 0 < r_min < r_max");
  if (p.n_points < 200) throw Error(ErrorKind::InvalidArgument, "at least 200 grid points");
  if (!p.potential) throw Error(ErrorKind::InvalidArgument, "no potential");
}

SpectrumResult radial_solve(const RadialProblem& problem, int n_states) {
  validate(problem);
  if (n_states < 1) throw Error(ErrorKind::InvalidArgument, "n_states must be positive");
  const GridSpectrum coarse = solve_dirichlet(problem, problem.n_points, n_states);
  return richardson(coarse, solve_dirichlet(problem, 2 * problem.n_points + 1, n_states), problem.tolerance);
}

double n1_effective_potential(const ParticleSystem& sys, double ell, double x) {
  const double hbar = sys.hbar();
  const double u = sys.body_term() ? body_potential(sys, x) : 0.0;
  return u + hbar * hbar * (ell * ell - 0.25) / (2 * sys.mass(0) * x * x);
}

SpectrumResult n1_polar_spectrum(const ParticleSystem& sys, double ell, int n_states, const PolarGrid& grid) {
  if (sys.size() != 1) throw Error(ErrorKind::InvalidArgument, "polar reduction needs one particle");
  if (!sys.body_term()) throw Error(ErrorKind::InvalidArgument, "polar spectrum needs a confining central term");
  if (!(grid.r_max > 0) || grid.n_cells < 200) throw Error(ErrorKind::InvalidArgument, "bad polar grid");
  if (n_states < 1) throw Error(ErrorKind::InvalidArgument, "n_states must be positive");
  const GridSpectrum coarse = solve_polar(sys, ell, grid.r_max, grid.n_cells, n_states);
  return richardson(coarse, solve_polar(sys, ell, grid.r_max, 2 * grid.n_cells, n_states), grid.tolerance);
}

double EckartSpringParams::omega() const { return std::sqrt(k / reduced_mass()); }
double EckartSpringParams::oscillator_length() const { return std::sqrt(hbar / (reduced_mass() * omega())); }
double EckartSpringParams::epsilon() const { return oscillator_length() / a; }

EckartSpringParams EckartSpringParams::with_epsilon(double eps) const {
  if (!(eps > 0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  EckartSpringParams out = *this;
  out.a = oscillator_length() / eps;
  return out;
}

void validate(const EckartSpringParams& p) {
  if (!(p.m1 > 0 && p.m2 > 0 && p.k > 0 && p.a > 0 && p.hbar > 0))
    throw Error(ErrorKind::InvalidArgument, "spring parameters must be positive");
}

PerturbativeResult eckart_perturbative(const EckartSpringParams& params, double ell, int n) {
  validate(params);
  check_integer(ell);
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be non-negative");
  const double hw = params.hbar * params.omega();
  const double eps = params.epsilon();
  const double c = ell * ell - 0.25;
  PerturbativeResult r;
  r.e0 = hw * (n + 0.5);
  r.e1 = 0.5 * hw * eps * eps * c;
  const double pre = 0.5 * eps * eps * eps * c;
  r.coeff_lower = n > 0 ? pre * std::sqrt(n / 2.0) : 0.0;
  r.coeff_upper = -pre * std::sqrt((n + 1) / 2.0);
  return r;
}

SpectrumResult eckart_oracle_spectrum(const EckartSpringParams& params, double ell, int n_states,
                                      const EckartOracleGrid& grid) {
  validate(params);
  check_integer(ell);
  const double mu = params.reduced_mass(), len = params.oscillator_length(), a = params.a;
  const double hbar = params.hbar, k = params.k;
  const double c = ell * ell - 0.25;
  RadialProblem p;
  p.mass = mu;
  p.hbar = hbar;
  p.potential = [=](double r) { return hbar * hbar * c / (2 * mu * r * r) + 0.5 * k * (r - a) * (r - a); };
  p.r_min = std::max(a - grid.half_width * len, 1e-6 * a);
  p.r_max = a + grid.half_width * len;
  p.n_points = grid.n_points;
  p.tolerance = grid.tolerance * hbar * params.omega();
  SpectrumResult res = radial_solve(p, n_states);
  for (const Vec& u : res.eigenvectors) {
    const double big = u.cwiseAbs().maxCoeff();
    if (std::abs(u(0)) > 1e-12 * big || std::abs(u(u.size() - 1)) > 1e-12 * big)
      throw Error(ErrorKind::GridTooCoarse, "oracle wave function not negligible at the domain edge");
  }
  return res;
}

double eckart_oracle(const EckartSpringParams& params, double ell, int n, const EckartOracleGrid& grid) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be non-negative");
  return eckart_oracle_spectrum(params, ell, n + 1, grid).eigenvalues.back();
}

std::vector<double> oscillator_overlaps(const Vec& grid, const Vec& values, double center, double length,
                                        int n_max, int nodes) {
  if (grid.size() != values.size() || grid.size() < 4)
    throw Error(ErrorKind::DimensionMismatch, "grid and values differ in size");
  const auto size = static_cast<std::size_t>(grid.size());
  std::unique_ptr<gsl_interp_accel, decltype(&gsl_interp_accel_free)> acc(gsl_interp_accel_alloc(),
                                                                          gsl_interp_accel_free);
  std::unique_ptr<gsl_spline, decltype(&gsl_spline_free)> spline(gsl_spline_alloc(gsl_interp_cspline, size),
                                                                 gsl_spline_free);
  gsl_spline_init(spline.get(), grid.data(), values.data(), size);
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> rule(
      gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, static_cast<std::size_t>(nodes), 0.0, 1.0, 0.0,
                                  0.0),
      gsl_integration_fixed_free);
  const double* x = gsl_integration_fixed_nodes(rule.get());
  const double* w = gsl_integration_fixed_weights(rule.get());
  std::vector<double> out(static_cast<std::size_t>(n_max + 1), 0.0);
  const double quarter_pi = std::pow(std::numbers::pi, -0.25);
  for (int i = 0; i < nodes; ++i) {
    const double r = center + length * x[i];
    if (r < grid(0) || r > grid(grid.size() - 1)) continue;
    const double f = std::sqrt(length) * gsl_spline_eval(spline.get(), r, acc.get());
    const double weight = w[i] * std::exp(x[i] * x[i]);
    // Normalized Hermite functions by the stable three-term recurrence.
    double prev = 0.0, cur = quarter_pi * std::exp(-0.5 * x[i] * x[i]);
    for (int k = 0; k <= n_max; ++k) {
      out[static_cast<std::size_t>(k)] += weight * cur * f;
      const double next = std::sqrt(2.0 / (k + 1)) * x[i] * cur - std::sqrt(k / (k + 1.0)) * prev;
      prev = cur;
      cur = next;
    }
  }
  return out;
}

EckartReport eckart_experiment(const EckartSpringParams& base, const std::vector<double>& eps_sweep,
                               const std::vector<int>& ells, const std::vector<int>& ns, const EckartTolerances& tol,
                               const EckartOracleGrid& grid) {
  validate(base);
  if (eps_sweep.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least three eps values");
  if (ells.empty() || ns.empty()) throw Error(ErrorKind::InvalidArgument, "empty ell or n list");
  for (double e : eps_sweep)
    if (!(e > 0 && e <= 0.1)) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 0.1]");
  for (int n : ns)
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be non-negative");
  const int n_top = *std::max_element(ns.begin(), ns.end());
  const double eps_wf = *std::max_element(eps_sweep.begin(), eps_sweep.end());
  const double hw = base.hbar * base.omega();

  EckartReport rep;
  rep.energies_pass = rep.exponents_pass = rep.wavefunctions_pass = true;
  rep.min_residual_exponent = std::numeric_limits<double>::infinity();
  for (int ell : ells) {
    // One oracle solve per (ell, eps) serves every n.
    std::vector<SpectrumResult> spectra;
    for (double eps : eps_sweep) spectra.push_back(eckart_oracle_spectrum(base.with_epsilon(eps), ell, n_top + 1, grid));
    std::vector<double> slopes_for_ell;
    for (int n : ns) {
      EckartCell cell;
      cell.ell = ell;
      cell.n = n;
      std::vector<double> e2, e4, shift, resid;
      for (std::size_t j = 0; j < eps_sweep.size(); ++j) {
        const double eps = eps_sweep[j];
        const auto pert = eckart_perturbative(base.with_epsilon(eps), ell, n);
        const double e = spectra[j].eigenvalues[static_cast<std::size_t>(n)];
        cell.max_oracle_error = std::max(cell.max_oracle_error, spectra[j].errors[static_cast<std::size_t>(n)] / hw);
        e2.push_back(eps * eps);
        e4.push_back(std::pow(eps, 4));
        shift.push_back((e - pert.e0) / hw);
        resid.push_back((e - pert.e0 - pert.e1) / hw);
        rep.rows.push_back({ell, n, eps, e, pert.e0, pert.e1, 0.0, 0.0});
      }
      const auto [s2, s4] = fit_two(e2, e4, shift);
      double misfit = 0.0, signal = 0.0;
      for (std::size_t j = 0; j < shift.size(); ++j) {
        misfit = std::max(misfit, std::abs(s2 * e2[j] + s4 * e4[j] - shift[j]));
        signal = std::max(signal, std::abs(shift[j]));
      }
      if (misfit > 0.05 * signal)
        throw Error(ErrorKind::FitResidualTooLarge, "energy shift is not quadratic plus quartic in eps");
      cell.slope_fit = s2;
      cell.quartic_fit = s4;
      cell.slope_pred = 0.5 * (ell * ell - 0.25);
      cell.slope_rel_err = std::abs(s2 - cell.slope_pred) / std::abs(cell.slope_pred);
      cell.residual_exponent = loglog_slope(eps_sweep, resid);
      for (std::size_t j = rep.rows.size() - eps_sweep.size(); j < rep.rows.size(); ++j) {
        rep.rows[j].slope_fit = s2;
        rep.rows[j].slope_err = cell.slope_rel_err;
      }
      slopes_for_ell.push_back(s2);

      // Mixing into neighbouring oscillator states at the largest eps.
      const auto wf_params = base.with_epsilon(eps_wf);
      const std::size_t jw = static_cast<std::size_t>(
          std::max_element(eps_sweep.begin(), eps_sweep.end()) - eps_sweep.begin());
      const auto ov = oscillator_overlaps(spectra[jw].grid, spectra[jw].eigenvectors[static_cast<std::size_t>(n)],
                                          wf_params.a, wf_params.oscillator_length(), n + 4);
      const double sign = ov[static_cast<std::size_t>(n)] < 0 ? -1.0 : 1.0;
      const auto pert = eckart_perturbative(wf_params, ell, n);
      const double c = ell * ell - 0.25, e3 = std::pow(eps_wf, 3);
      cell.eps_wavefunction = eps_wf;
      cell.coeff_upper = sign * ov[static_cast<std::size_t>(n + 1)];
      cell.coeff_upper_pred = pert.coeff_upper;
      cell.coeff_rel_err = std::abs(cell.coeff_upper - pert.coeff_upper) / std::abs(pert.coeff_upper);
      const double first_upper = e3 * c * std::sqrt((n + 1) / 2.0);
      cell.coeff_rel_err_first_order = std::abs(cell.coeff_upper - first_upper) / std::abs(first_upper);
      cell.sign_match = (cell.coeff_upper > 0) == (pert.coeff_upper > 0);
      if (n > 0) {
        cell.coeff_lower = sign * ov[static_cast<std::size_t>(n - 1)];
        cell.coeff_lower_pred = pert.coeff_lower;
        cell.coeff_rel_err = std::max(cell.coeff_rel_err,
                                      std::abs(cell.coeff_lower - pert.coeff_lower) / std::abs(pert.coeff_lower));
        const double first_lower = -e3 * c * std::sqrt(n / 2.0);
        cell.coeff_rel_err_first_order =
            std::max(cell.coeff_rel_err_first_order, std::abs(cell.coeff_lower - first_lower) / std::abs(first_lower));
      }
      double other = 0.0;
      for (int k = 0; k <= n + 4; ++k)
        if (std::abs(k - n) >= 2) other = std::max(other, std::abs(ov[static_cast<std::size_t>(k)]));
      cell.other_overlap_scale = other / (std::pow(eps_wf, 4) * std::max(1.0, std::abs(c)));

      cell.slope_pass = cell.slope_rel_err < tol.slope_rel;
      cell.exponent_pass = cell.residual_exponent >= tol.min_exponent;
      cell.wavefunction_pass = cell.coeff_rel_err < tol.coeff_rel && cell.sign_match;
      rep.energies_pass = rep.energies_pass && cell.slope_pass;
      rep.exponents_pass = rep.exponents_pass && cell.exponent_pass;
      rep.wavefunctions_pass = rep.wavefunctions_pass && cell.wavefunction_pass;
      rep.max_slope_rel_err = std::max(rep.max_slope_rel_err, cell.slope_rel_err);
      rep.min_residual_exponent = std::min(rep.min_residual_exponent, cell.residual_exponent);
      rep.max_coeff_rel_err = std::max(rep.max_coeff_rel_err, cell.coeff_rel_err);
      rep.max_coeff_rel_err_first_order = std::max(rep.max_coeff_rel_err_first_order, cell.coeff_rel_err_first_order);
      rep.max_oracle_error = std::max(rep.max_oracle_error, cell.max_oracle_error);
      rep.cells.push_back(cell);
    }
    const auto [lo, hi] = std::minmax_element(slopes_for_ell.begin(), slopes_for_ell.end());
    rep.slope_spread_over_n = std::max(rep.slope_spread_over_n, (*hi - *lo) / std::abs(0.5 * (ell * ell - 0.25)));
  }
  rep.pass = rep.energies_pass && rep.exponents_pass && rep.wavefunctions_pass;
  return rep;
}

namespace {

double mass_wedge(const ParticleSystem& sys, const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < sys.size(); ++i)
    s += sys.mass(i) * (a(x_index(i)) * b(y_index(i)) - a(y_index(i)) * b(x_index(i)));
  return s;
}

double mass_dot(const ParticleSystem& sys, const Vec& a, const Vec& b) {
  return a.cwiseProduct(sys.coord_masses()).dot(b);
}

LinearChart order_chart(const EquilibriumShape& shape, OrderChart chart) {
  return chart == OrderChart::Eckart ? eckart_chart(shape) : linearized_principal_axes_chart(shape);
}

}  // namespace

double intrinsic_xi(const ParticleSystem& sys, const EquilibriumShape& shape, const Vec& deformation,
                    const Vec& deformation_rate, double ell_z) {
  const Vec& z = shape.Z;
  const double r2 = mass_dot(sys, z, z);
  return (1.0 - 2.0 * mass_dot(sys, z, deformation) / r2) * (mass_wedge(sys, z, deformation_rate) - ell_z) / r2 +
         mass_wedge(sys, deformation, deformation_rate) / r2;
}

double intrinsic_lambda(const ParticleSystem& sys, const EquilibriumShape& shape, const LinearChart& chart,
                        const Vec& deformation, const Vec& deformation_rate, double ell_z) {
  const Vec& z = shape.Z;
  const double r2 = mass_dot(sys, z, z);
  const double xi = intrinsic_xi(sys, shape, deformation, deformation_rate, ell_z);
  const double qz = linear_q(sys, chart, z);
  return mass_wedge(sys, z, deformation_rate) + mass_wedge(sys, deformation, deformation_rate) -
         xi * (r2 + 2.0 * mass_dot(sys, z, deformation)) +
         xi * qz / r2 * (qz + 2.0 * linear_q(sys, chart, deformation));
}

OrderCheckReport eckart_order_check(const ParticleSystem& sys, const EquilibriumShape& shape, OrderChart chart,
                                    const std::vector<double>& scales, std::uint64_t seed) {
  validate_equilibrium(sys, shape);
  if (scales.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two scales");
  for (double s : scales)
    if (!(s > 0)) throw Error(ErrorKind::InvalidArgument, "scales must be positive");
  const LinearChart lc = order_chart(shape, chart);
  const Vec& z = shape.Z;
  const double r2 = mass_dot(sys, z, z);
  if (std::abs(linear_s(sys, lc, z)) > 1e-10 * r2)
    throw Error(ErrorKind::OffSurface, "shape violates the linearized gauge condition");

  // Directions satisfying the linear gauge and centre-of-mass conditions.
  const Eigen::Index dim = sys.dim();
  Mat g = Mat::Zero(3, dim);
  for (int i = 0; i < sys.size(); ++i) {
    g(0, x_index(i)) = sys.mass(i) * lc.A(i);
    g(0, y_index(i)) = sys.mass(i) * lc.B(i);
    g(1, x_index(i)) = sys.mass(i);
    g(2, y_index(i)) = sys.mass(i);
  }
  const Mat proj = Mat::Identity(dim, dim) - g.transpose() * (g * g.transpose()).ldlt().solve(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    Vec v(dim);
    for (auto& c : v) c = normal(rng);
    v = proj * v;
    return Vec(v / v.norm());
  };
  const double size = std::sqrt(r2 / sys.total_mass());
  const Vec dr = draw() * size;
  const Vec rate = draw();
  const double ell_z = normal(rng) * size;

  OrderCheckReport rep;
  rep.scales = scales;
  rep.lambda_at_shape = intrinsic_lambda(sys, shape, lc, Vec::Zero(dim), rate, ell_z);
  for (double s : scales) rep.lambdas.push_back(intrinsic_lambda(sys, shape, lc, s * dr, rate, ell_z));
  const double typical = size * std::sqrt(sys.total_mass()) + std::abs(ell_z);
  const double smallest = *std::min_element(scales.begin(), scales.end());
  const double lead = chart == OrderChart::Eckart
                          ? intrinsic_lambda(sys, shape, lc, smallest * dr, rate, ell_z) / smallest
                          : rep.lambda_at_shape;
  if (std::abs(lead) < 1e-8 * typical)
    throw Error(ErrorKind::DegenerateDirection, "leading term vanishes for this draw");
  rep.exponent = loglog_slope(scales, rep.lambdas);
  return rep;
}

}  // namespace rotframe
