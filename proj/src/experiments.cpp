#include "rotframe/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>

#include "rotframe/algebra.hpp"
#include "rotframe/dynamics.hpp"
#include "rotframe/error.hpp"
#include "rotframe/hilbert.hpp"
#include "rotframe/residual.hpp"
#include "rotframe/spectra.hpp"

namespace rotframe {

namespace {

// Collects checks, metrics and CSV files for one run.
class Recorder {
 public:
  explicit Recorder(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void check(const std::string& name, double value, const std::string& relation, double threshold) {
    bool ok = false;
    if (relation == "<") ok = value < threshold;
    else if (relation == "<=") ok = value <= threshold;
    else if (relation == ">=") ok = value >= threshold;
    else ok = value == threshold;
    if (!std::isfinite(value)) ok = false;
    checks.push_back({name, value, threshold, relation, ok});
  }

  void csv(const std::string& file, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    artifacts.push_back(path.string());
  }

  Json metrics = Json::object();
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;

 private:
  std::filesystem::path dir_;
};

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }

template <class T>
T param(const ExperimentConfig& c, const char* key) {
  return c.params.at(key).get<T>();
}

std::vector<int> int_list(const ExperimentConfig& c, const char* key) {
  std::vector<int> out;
  for (long v : param<std::vector<long>>(c, key)) out.push_back(static_cast<int>(v));
  return out;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ConfigInvalid, field + ": " + what);
}

std::vector<Vec> surface_points(const RandomSetup& setup, int n, std::mt19937_64& rng) {
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) pts.push_back(sample_on_surface(setup.sys, setup.gauge, rng));
  return pts;
}

std::vector<GaugeKind> gauge_list(const ExperimentConfig& c) {
  std::vector<GaugeKind> kinds;
  for (const auto& name : param<std::vector<std::string>>(c, "gauges")) {
    try {
      kinds.push_back(gauge_kind_from_string(name));
    } catch (const Error& e) {
      require(false, "params.gauges", e.what());
    }
  }
  require(!kinds.empty(), "params.gauges", "empty");
  return kinds;
}

// ---------------------------------------------------------------------------

void gauge_equivalence(const ExperimentConfig& c, Recorder& rec) {
  const ParticleSystem sys = build_system(*c.system);
  const GaugeChart gauge = build_gauge(*c.chart, sys);
  require(kind_of(gauge) != GaugeKind::PrincipalAxes, "chart.kind",
          "direct rotating-frame integration needs a linear chart");
  IntegrationOptions opt;
  opt.ode.rtol = param<double>(c, "rtol");
  opt.ode.atol = param<double>(c, "atol");
  opt.samples = param<int>(c, "samples");
  const double duration = param<double>(c, "duration");
  require(opt.samples >= 2, "params.samples", "needs at least 2");
  require(duration > 0, "params.duration", "must be positive");

  auto given = param<std::vector<double>>(c, "initial_positions");
  auto given_v = param<std::vector<double>>(c, "initial_velocities");
  const auto dim = static_cast<std::size_t>(sys.dim());
  require(given.empty() || given.size() == dim, "params.initial_positions", "needs 2N entries");
  require(given_v.empty() || given_v.size() == dim, "params.initial_velocities", "needs 2N entries");

  std::mt19937_64 rng(c.seed);
  auto draw = [&](double spread) {
    std::uniform_real_distribution<double> u(-spread, spread);
    Vec v(sys.dim());
    for (auto& x : v) x = u(rng);
    return v;
  };
  const double ps = param<double>(c, "position_spread"), vs = param<double>(c, "velocity_spread");
  // Random starts that hit a singular gauge during the run are redrawn.
  GaugeEquivalenceReport rep;
  Vec r, v;
  for (int attempt = 0;; ++attempt) {
    r = given.empty() ? draw(ps) : Eigen::Map<const Vec>(given.data(), sys.dim()).eval();
    v = given_v.empty() ? draw(vs) : Eigen::Map<const Vec>(given_v.data(), sys.dim()).eval();
    try {
      rep = gauge_equivalence_experiment(sys, gauge, r, v, duration, opt);
      break;
    } catch (const Error& e) {
      const bool redraw = e.kind() == ErrorKind::GaugeSingular && (given.empty() || given_v.empty());
      if (!redraw || attempt >= 9) throw;
    }
  }
  rec.metrics["max_body_error"] = rep.max_body_error;
  rec.metrics["max_theta_error"] = rep.max_theta_error;
  rec.metrics["lab_angular_momentum_drift"] = rep.lab_angular_momentum_drift;
  rec.metrics["body_angular_momentum_drift"] = rep.body_angular_momentum_drift;
  rec.metrics["lab_energy_drift"] = rep.lab_energy_drift;
  rec.metrics["body_energy_drift"] = rep.body_energy_drift;
  rec.metrics["max_gauge_residual"] = rep.max_gauge_residual;
  rec.metrics["initial_positions"] = std::vector<double>(r.data(), r.data() + r.size());
  rec.metrics["initial_velocities"] = std::vector<double>(v.data(), v.data() + v.size());
  rec.check("max_body_error", rep.max_body_error, "<", param<double>(c, "tol_body"));
  const double tol_l = param<double>(c, "tol_angular_momentum");
  rec.check("lab_angular_momentum_drift", rep.lab_angular_momentum_drift, "<", tol_l);
  rec.check("body_angular_momentum_drift", rep.body_angular_momentum_drift, "<", tol_l);

  std::vector<std::string> header{"t", "theta_lab_route", "theta_direct"};
  for (int a = 0; a < sys.size(); ++a) {
    header.push_back("X" + std::to_string(a + 1) + "_lab_route");
    header.push_back("Y" + std::to_string(a + 1) + "_lab_route");
  }
  for (int a = 0; a < sys.size(); ++a) {
    header.push_back("X" + std::to_string(a + 1) + "_direct");
    header.push_back("Y" + std::to_string(a + 1) + "_direct");
  }
  header.push_back("Lz_lab");
  std::vector<std::vector<std::string>> rows;
  const auto& a = rep.lab_route;
  const auto& b = rep.direct_route;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    std::vector<std::string> row{num(a.times[k]), num(a.theta_unwound[k]), num(b.theta_unwound[k])};
    for (double x : a.states[k].cfg.coords) row.push_back(num(x));
    for (double x : b.states[k].cfg.coords) row.push_back(num(x));
    row.push_back(num(a.angular_momentum[k]));
    rows.push_back(std::move(row));
  }
  rec.csv("trajectory.csv", header, rows);
}

void algebra_verify(const ExperimentConfig& c, Recorder& rec) {
  const int n = param<int>(c, "n_particles");
  require(n >= 2, "params.n_particles", "needs at least 2");
  std::vector<std::vector<std::string>> rows;
  std::uint64_t salt = 0;
  for (GaugeKind kind : gauge_list(c)) {
    const std::string g(to_string(kind));
    const RandomSetup setup = random_setup(kind, n, c.seed + 1000 * ++salt);
    auto record = [&](const AlgebraReport& r, const std::string& group, double tol) {
      double worst = 0.0;
      for (const auto& chk : r.checks) {
        worst = std::max(worst, chk.max_dev);
        rows.push_back({g, group, chk.id, num(chk.max_dev), num(chk.evaluations), chk.pass ? "1" : "0"});
      }
      rec.metrics[group + "_max_dev"][g] = worst;
      rec.check(group + "/" + g, worst, "<", tol);
    };
    if (param<bool>(c, "identities")) {
      const double tol = param<double>(c, "tol");
      record(verify_algebra(setup.sys, setup.gauge, param<int>(c, "points"), tol, c.seed + salt), "identities", tol);
    }
    if (param<bool>(c, "constraints")) {
      const double tol = param<double>(c, "constraint_tol");
      record(verify_constraints(setup.sys, setup.gauge, param<int>(c, "constraint_points"), tol, c.seed + salt),
             "constraints", tol);
    }
  }
  rec.csv("identities.csv", {"gauge", "group", "identity", "max_dev", "evaluations", "pass"}, rows);
}

void hermiticity(const ExperimentConfig& c, Recorder& rec) {
  const auto names = param<std::vector<std::string>>(c, "gauges");
  const auto counts = int_list(c, "particles");
  require(names.size() == counts.size(), "params.particles", "needs one entry per gauge");
  const int trials = param<int>(c, "trials");
  const int rep_points = param<int>(c, "representation_points");
  require(trials > 0 || rep_points > 0, "params", "trials and representation_points are both 0");
  const double ell = param<double>(c, "ell");
  const QuadratureSpec spec{param<int>(c, "quadrature_order"), 2};
  const PairTerm spring{potentials::spring(param<double>(c, "spring_k"), param<double>(c, "spring_rest")), {}};

  std::vector<std::vector<std::string>> herm_rows, rep_rows;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const GaugeKind kind = gauge_list(c)[i];
    const std::string g = names[i] + "_n" + std::to_string(counts[i]);
    const RandomSetup setup = random_setup(kind, counts[i], c.seed + 7919 * (i + 1));
    const ParticleSystem sys(setup.sys.masses(), {spring});
    if (trials > 0) {
      const auto h = hermiticity_check(sys, setup.gauge, ell, trials, param<double>(c, "tol_factor"),
                                       c.seed + i, spec);
      rec.metrics["hermiticity"][g] = {{"max_asym_h", h.max_asym_h},
                                       {"max_asym_lambda", h.max_asym_lambda},
                                       {"max_asym_potential", h.max_asym_potential},
                                       {"max_quad_error", h.max_quad_error},
                                       {"worst_ratio", h.worst_ratio}};
      rec.check("hermiticity/" + g, h.worst_ratio, "<", param<double>(c, "tol_factor"));
      herm_rows.push_back({g, num(h.trials), num(h.max_asym_h), num(h.max_asym_lambda), num(h.max_asym_potential),
                           num(h.max_quad_error), num(h.worst_ratio)});
    }
    if (rep_points > 0) {
      std::mt19937_64 rng(c.seed + 31 * (i + 1));
      const auto pts = surface_points({sys, setup.gauge}, rep_points, rng);
      BumpParams bp;
      bp.center = pts.front();
      bp.sigma = 1.3;
      bp.lin_re = Vec::LinSpaced(sys.dim(), -1.0, 1.0);
      bp.lin_im = Vec::Constant(sys.dim(), 0.4);
      const double tol = param<double>(c, "representation_tol");
      const auto r = representation_check(sys, setup.gauge, gaussian_bump(bp), ell, pts, tol);
      rec.metrics["representation"][g] = {{"max_dev", r.max_dev}, {"max_potential_dev", r.max_potential_dev}};
      rec.check("representation/" + g, r.max_dev, "<", tol);
      rec.check("quantum_potential/" + g, r.max_potential_dev, "<", tol);
      rep_rows.push_back({g, num(r.points), num(r.max_dev), num(r.max_potential_dev)});
    }
  }
  if (trials > 0)
    rec.csv("hermiticity.csv",
            {"gauge", "trials", "max_asym_h", "max_asym_lambda", "max_asym_potential", "max_quad_error", "worst_ratio"},
            herm_rows);
  if (rep_points > 0) rec.csv("representation.csv", {"gauge", "points", "max_dev", "max_potential_dev"}, rep_rows);
}

void n1_spectrum(const ExperimentConfig& c, Recorder& rec) {
  const ParticleSystem sys = build_system(*c.system);
  require(sys.size() == 1, "system.masses", "needs exactly one particle");
  require(c.system->body_term.has_value(), "system.body_term", "needs a harmonic_trap");
  require(c.system->pair_terms.empty(), "system.pair_terms", "must be empty for one particle");
  const double omega = c.system->body_term->omega, m = sys.mass(0), hbar = sys.hbar();
  const double length = OscillatorUnits{hbar, m, omega}.length();
  const int nr_max = param<int>(c, "n_r_max"), ell_max = param<int>(c, "ell_max");
  require(nr_max >= 0 && ell_max >= 0, "params", "n_r_max and ell_max must be non-negative");
  const PolarGrid grid{param<double>(c, "r_max") * length, param<int>(c, "n_cells"), 0.0};
  const double rel_tol = param<double>(c, "rel_tol");

  std::vector<std::vector<std::string>> rows;
  double worst = 0.0;
  for (int ell = -ell_max; ell <= ell_max; ++ell) {
    const auto spectrum = n1_polar_spectrum(sys, ell, nr_max + 1, grid);
    for (int nr = 0; nr <= nr_max; ++nr) {
      const double exact = (2 * nr + std::abs(ell) + 1) * hbar * omega;
      const double e = spectrum.eigenvalues[static_cast<std::size_t>(nr)];
      const double rel = std::abs(e - exact) / exact;
      worst = std::max(worst, rel);
      rows.push_back({num(ell), num(nr), num(e), num(exact), num(rel), num(spectrum.errors[static_cast<std::size_t>(nr)])});
    }
  }
  rec.csv("spectrum.csv", {"ell", "n_r", "E", "E_exact", "rel_err", "richardson_err"}, rows);
  rec.metrics["max_rel_err"] = worst;
  rec.check("spectrum_rel_err", worst, "<", rel_tol);

  // The polar chart s = m y: the surface is y = 0 and X is the radius.
  const GaugeChart polar = LinearGauge{{Vec::Zero(1), Vec::Ones(1)}};
  double qp_dev = 0.0;
  std::vector<std::vector<std::string>> qrows;
  for (double x : param<std::vector<double>>(c, "potential_points")) {
    require(x > 0, "params.potential_points", "radii must be positive");
    const double r = x * length;
    const double got = quantum_potential(sys, polar, (Vec(2) << r, 0.0).finished());
    const double want = -hbar * hbar / (8 * m * r * r);
    const double dev = std::abs(got - want) / std::abs(want);
    qp_dev = std::max(qp_dev, dev);
    qrows.push_back({num(r), num(got), num(want), num(dev)});
  }
  rec.csv("quantum_potential.csv", {"X", "value", "closed_form", "rel_dev"}, qrows);
  rec.metrics["quantum_potential_rel_dev"] = qp_dev;
  rec.check("quantum_potential_rel_dev", qp_dev, "<=", 4e-16);
}

void eckart_spring(const ExperimentConfig& c, Recorder& rec) {
  EckartSpringParams base;
  base.m1 = param<double>(c, "m1");
  base.m2 = param<double>(c, "m2");
  base.k = param<double>(c, "k");
  base.hbar = param<double>(c, "hbar");
  const EckartTolerances tol{param<double>(c, "slope_tol"), param<double>(c, "min_exponent"),
                             param<double>(c, "coeff_tol")};
  const EckartOracleGrid grid{param<double>(c, "half_width"), param<int>(c, "grid_points"),
                              param<double>(c, "oracle_tol")};
  const auto rep = eckart_experiment(base, param<std::vector<double>>(c, "eps"), int_list(c, "ells"),
                                     int_list(c, "ns"), tol, grid);

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({num(r.ell), num(r.n), num(r.eps), num(r.e_oracle), num(r.e0), num(r.e1_pred), num(r.slope_fit),
                    num(r.slope_err)});
  rec.csv("eckart_energies.csv", {"ell", "n", "eps", "E_oracle", "E0", "E1_pred", "slope_fit", "slope_err"}, rows);

  std::vector<std::vector<std::string>> cells;
  for (const auto& e : rep.cells)
    cells.push_back({num(e.ell), num(e.n), num(e.slope_fit), num(e.slope_pred), num(e.quartic_fit),
                     num(e.slope_rel_err), num(e.residual_exponent), num(e.max_oracle_error),
                     num(e.eps_wavefunction), num(e.coeff_lower), num(e.coeff_upper), num(e.coeff_lower_pred),
                     num(e.coeff_upper_pred), num(e.coeff_rel_err), num(e.coeff_rel_err_first_order),
                     e.sign_match ? "1" : "0", num(e.other_overlap_scale)});
  rec.csv("eckart_cells.csv",
          {"ell", "n", "slope_fit", "slope_pred", "quartic_fit", "slope_rel_err", "residual_exponent",
           "max_oracle_error", "eps_wavefunction", "coeff_lower", "coeff_upper", "coeff_lower_pred",
           "coeff_upper_pred", "coeff_rel_err", "coeff_rel_err_first_order", "sign_match", "other_overlap_scale"},
          cells);

  rec.metrics["rows"] = rep.rows.size();
  rec.metrics["max_slope_rel_err"] = rep.max_slope_rel_err;
  rec.metrics["min_residual_exponent"] = rep.min_residual_exponent;
  rec.metrics["max_coeff_rel_err"] = rep.max_coeff_rel_err;
  rec.metrics["max_coeff_rel_err_first_order"] = rep.max_coeff_rel_err_first_order;
  rec.metrics["max_oracle_error"] = rep.max_oracle_error;
  rec.metrics["slope_spread_over_n"] = rep.slope_spread_over_n;
  rec.check("energy_slope_rel_err", rep.max_slope_rel_err, "<", tol.slope_rel);
  rec.check("residual_exponent", rep.min_residual_exponent, ">=", tol.min_exponent);
  rec.check("mixing_coeff_rel_err", rep.max_coeff_rel_err, "<", tol.coeff_rel);
}

EquilibriumShape random_shape(const ParticleSystem& sys, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec z(sys.dim());
  for (auto& x : z) x = g(rng);
  const Vec2 cm = center_of_mass(sys, z);
  for (int i = 0; i < sys.size(); ++i) z.segment<2>(x_index(i)) -= cm;
  return {fix_principal_axes(sys, z).body.coords};
}

void eckart_order(const ExperimentConfig& c, Recorder& rec) {
  const ParticleSystem sys = build_system(*c.system);
  require(sys.size() >= 3, "system.masses", "needs at least 3 particles for a generic deformation");
  std::optional<EquilibriumShape> fixed;
  if (c.chart) {
    require(c.chart->kind == "eckart", "chart.kind", "expected eckart");
    fixed = std::get<EckartGauge>(build_gauge(*c.chart, sys)).shape;
  }
  const auto scales = param<std::vector<double>>(c, "scales");
  require(scales.size() >= 2, "params.scales", "needs at least 2 scales");
  const int draws = param<int>(c, "draws");
  require(draws >= 1, "params.draws", "needs at least 1");

  std::mt19937_64 rng(c.seed);
  std::vector<std::vector<std::string>> rows;
  double ek_min = INFINITY, pa_max = 0.0;
  for (int d = 0; d < draws; ++d) {
    for (int attempt = 0;; ++attempt) {
      const EquilibriumShape shape = fixed ? *fixed : random_shape(sys, rng);
      const std::uint64_t dseed = rng();
      try {
        const auto ek = eckart_order_check(sys, shape, OrderChart::Eckart, scales, dseed);
        const auto pa = eckart_order_check(sys, shape, OrderChart::LinearizedPrincipalAxes, scales, dseed);
        ek_min = std::min(ek_min, ek.exponent);
        pa_max = std::max(pa_max, std::abs(pa.exponent));
        for (std::size_t k = 0; k < scales.size(); ++k)
          rows.push_back({num(d), num(scales[k]), num(ek.lambdas[k]), num(pa.lambdas[k]), num(ek.exponent),
                          num(pa.exponent)});
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateDirection || attempt >= 9) throw;
      }
    }
  }
  rec.csv("order.csv", {"draw", "scale", "lambda_eckart", "lambda_principal", "exponent_eckart", "exponent_principal"},
          rows);
  rec.metrics["min_eckart_exponent"] = ek_min;
  rec.metrics["max_abs_principal_exponent"] = pa_max;
  rec.check("eckart_exponent", ek_min, ">=", param<double>(c, "eckart_min_exponent"));
  rec.check("principal_exponent", pa_max, "<", param<double>(c, "principal_max_exponent"));
}

// Shared by residual-verify and orbit-invariants.
void orbit_block(const ExperimentConfig& c, Recorder& rec, int n, int starts, int samples) {
  const double inv_tol = param<double>(c, "invariant_tol"), period_tol = param<double>(c, "period_tol");
  std::vector<std::vector<std::string>> rows;
  std::uint64_t salt = 0;
  for (GaugeKind kind : gauge_list(c)) {
    const std::string g(to_string(kind));
    const RandomSetup setup = random_setup(kind, n, c.seed + 101 * ++salt);
    std::mt19937_64 rng(c.seed + salt);
    double drift = 0.0, period = 0.0;
    for (const Vec& x : surface_points(setup, starts, rng)) {
      const auto r = orbit_invariants(setup.sys, setup.gauge, x, samples);
      const double d = std::max({r.gauge_drift, r.jacobian_drift, r.radius_drift, r.center_drift, r.group_law_dev});
      drift = std::max(drift, d);
      period = std::max(period, r.period_dev);
      rows.push_back({g, num(r.gauge_drift), num(r.jacobian_drift), num(r.radius_drift), num(r.center_drift),
                      num(r.group_law_dev), num(r.period_dev)});
    }
    rec.metrics["invariant_drift"][g] = drift;
    rec.metrics["period_dev"][g] = period;
    rec.check("invariants/" + g, drift, "<", inv_tol);
    rec.check("period/" + g, period, "<", period_tol);
  }
  rec.csv("orbits.csv", {"gauge", "gauge_drift", "jacobian_drift", "radius_drift", "center_drift", "group_law_dev",
                         "period_dev"},
          rows);
}

void residual_verify(const ExperimentConfig& c, Recorder& rec) {
  const int n = param<int>(c, "n_particles");
  require(n >= 2, "params.n_particles", "needs at least 2");
  const auto lambdas = param<std::vector<double>>(c, "lambdas");
  const auto ns = param<std::vector<double>>(c, "ns");
  const double eig_tol = param<double>(c, "eigen_tol");
  const int points = param<int>(c, "points");
  KernelFactor kernel;
  kernel.widths = Vec::LinSpaced(n, 0.05, 0.2);
  kernel.poly_linear = {1.0, -0.3, 0.04};
  kernel.poly_quadratic = Mat::Zero(2, 3);
  kernel.poly_quadratic(0, 0) = 1.0;
  kernel.poly_quadratic(1, 0) = -0.2;
  kernel.poly_quadratic(1, 2) = 0.03;

  std::vector<std::vector<std::string>> rows;
  std::uint64_t salt = 0;
  for (GaugeKind kind : gauge_list(c)) {
    const std::string g(to_string(kind));
    const RandomSetup setup = random_setup(kind, n, c.seed + 211 * ++salt);
    std::mt19937_64 rng(c.seed + 17 * salt);
    const auto pts = surface_points(setup, points, rng);
    const bool quadratic = kind == GaugeKind::PrincipalAxes;
    const auto e = verify_eigenfunction(setup.sys, setup.gauge, quadratic ? ns : lambdas, kernel, pts);
    rec.check("eigen/" + g, e.max_dev, "<", eig_tol);
    if (quadratic) rec.check("eigenvalue/" + g, e.max_eigenvalue_dev, "<", eig_tol);
    else rec.check("integer/" + g, e.max_integer_dev, "<", param<double>(c, "integer_tol"));
    const auto gen = verify_generator(setup.sys, setup.gauge, pts, param<double>(c, "generator_dalpha"));
    rec.check("generator/" + g, gen.max_dev, "<", param<double>(c, "generator_tol"));
    rec.metrics["eigen"][g] = {{"max_dev", e.max_dev},
                               {"max_integer_dev", e.max_integer_dev},
                               {"max_eigenvalue_dev", e.max_eigenvalue_dev},
                               {"generator_dev", gen.max_dev}};
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double predicted = quadratic ? eigenvalue_quadratic(setup.sys, ns, pts[k])
                                         : std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
      const double w = quadratic ? orbit_frequency(setup.sys, pts[k]) : 1.0;
      rows.push_back({g, num(static_cast<int>(k)), num(e.recovered[k]), num(predicted), num(w)});
    }
  }
  rec.csv("eigenvalues.csv", {"gauge", "point", "recovered", "predicted", "frequency"}, rows);

  // Q = 0: four equal masses on a square, frequency 1 and an integer eigenvalue.
  const ParticleSystem four({1.0, 1.0, 1.0, 1.0});
  const Vec square = (Vec(8) << 1.3, 1.3, 1.3, -1.3, -1.3, 1.3, -1.3, -1.3).finished();
  const std::vector<double> q0{1, 0, 2, 0};
  const auto sq = verify_eigenfunction(four, PrincipalAxesGauge{}, q0, {}, {square});
  rec.metrics["q0_eigenvalue"] = sq.recovered.front();
  rec.metrics["q0_frequency"] = orbit_frequency(four, square);
  rec.check("q0_integer_limit", std::abs(sq.recovered.front() - 3.0), "<", eig_tol);
  rec.check("q0_frequency", std::abs(orbit_frequency(four, square) - 1.0), "<", eig_tol);

  orbit_block(c, rec, n, param<int>(c, "orbit_starts"), param<int>(c, "orbit_samples"));
}

void orbit_invariants_experiment(const ExperimentConfig& c, Recorder& rec) {
  const int n = param<int>(c, "n_particles");
  require(n >= 2, "params.n_particles", "needs at least 2");
  orbit_block(c, rec, n, param<int>(c, "starts"), param<int>(c, "samples"));
}

using Runner = std::function<void(const ExperimentConfig&, Recorder&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"gauge-equivalence", gauge_equivalence}, {"algebra-verify", algebra_verify},
      {"hermiticity", hermiticity},             {"n1-spectrum", n1_spectrum},
      {"eckart-spring", eckart_spring},         {"eckart-order", eckart_order},
      {"residual-verify", residual_verify},     {"orbit-invariants", orbit_invariants_experiment}};
  return table;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Json RunSummary::to_json() const {
  Json j;
  j["experiment"] = experiment;
  j["name"] = name;
  j["status"] = status;
  j["reason"] = reason;
  j["wall_time"] = wall_time;
  j["metrics"] = metrics;
  Json cs = Json::array();
  for (const auto& c : checks)
    cs.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold},
                  {"pass", c.pass}});
  j["checks"] = cs;
  j["artifacts"] = artifacts;
  return j;
}

std::filesystem::path output_root(const ExperimentConfig& config) {
  if (const char* env = std::getenv("ROTFRAME_OUTPUT_DIR"); env && *env) return env;
  if (!config.output_dir.empty()) return config.output_dir;
  return "rotframe_out";
}

RunSummary run_experiment(const ExperimentConfig& config, const std::optional<std::filesystem::path>& root) {
  const auto start = std::chrono::steady_clock::now();
  const auto dir = root.value_or(output_root(config)) / config.name;
  RunSummary s;
  s.experiment = config.experiment;
  s.name = config.name;
  Recorder rec(dir);
  try {
    const auto it = runners().find(config.experiment);
    if (it == runners().end()) experiment_info(config.experiment);
    it->second(config, rec);
    std::string failed;
    for (const auto& c : rec.checks)
      if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
    s.status = failed.empty() ? "pass" : "fail";
    s.reason = failed.empty() ? "" : "failed checks: " + failed;
  } catch (const Error& e) {
    s.status = "error";
    s.reason = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    s.status = "error";
    s.reason = std::string("exception: ") + e.what();
  }
  s.metrics = rec.metrics;
  s.checks = rec.checks;
  s.artifacts = rec.artifacts;
  s.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.json");
    cfg << rotframe::to_json(config).dump(2) << '\n';
  }
  s.artifacts.push_back((dir / "config.json").string());
  s.artifacts.push_back((dir / "summary.json").string());
  std::ofstream out(dir / "summary.json");
  out << s.to_json().dump(2) << '\n';
  return s;
}

RunSummary run(const std::filesystem::path& config_path, const std::optional<std::filesystem::path>& root) {
  return run_experiment(load_config(config_path), root);
}

int exit_code(const RunSummary& summary) noexcept {
  if (summary.status == "pass") return 0;
  if (summary.status == "fail") return 1;
  return 2;
}

}  // namespace rotframe
