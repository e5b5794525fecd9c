#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rotframe/dynamics.hpp"
#include "rotframe/error.hpp"
#include "rotframe/spectra.hpp"

using namespace rotframe;
using std::numbers::pi;

namespace {

// Normalized Hermite functions by direct polynomial evaluation, a separate path from the library recurrence.
double hermite_function(int n, double x) {
  double h0 = 1.0, h1 = 2.0 * x;
  if (n == 0) return std::exp(-x * x / 2) / std::pow(pi, 0.25);
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1 * std::exp(-x * x / 2) / std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(pi));
}

EquilibriumShape random_shape(const ParticleSystem& sys, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec z(sys.dim());
  for (auto& c : z) c = g(rng);
  const Vec2 c = center_of_mass(sys, z);
  for (int i = 0; i < sys.size(); ++i) z.segment<2>(x_index(i)) -= c;
  return {fix_principal_axes(sys, z).body.coords};
}

}  // namespace

TEST_CASE("finite-difference eigensolver against closed forms") {
  RadialProblem osc;
  osc.mass = 2.0;
  osc.potential = [](double r) { return 0.5 * 2.0 * 0.25 * (r - 20.0) * (r - 20.0); };  // omega = 1/2
  osc.r_min = 0.0 + 4.0;
  osc.r_max = 36.0;
  osc.n_points = 8000;
  const auto s = radial_solve(osc, 5);
  for (int n = 0; n < 5; ++n) CHECK(std::abs(s.eigenvalues[n] - 0.5 * (n + 0.5)) < 1e-6);
  for (int n = 1; n < 5; ++n) CHECK(s.eigenvalues[n] > s.eigenvalues[n - 1]);
  CHECK(s.convergence == doctest::Approx(*std::max_element(s.errors.begin(), s.errors.end())));
  // Normalized eigenvectors on the fine grid.
  const double h = s.grid(1) - s.grid(0);
  CHECK(s.eigenvectors[2].squaredNorm() * h == doctest::Approx(1.0).epsilon(1e-12));

  RadialProblem box;
  box.potential = [](double) { return 0.0; };
  box.r_min = 1.0;
  box.r_max = 4.0;
  box.n_points = 4000;
  box.hbar = 0.7;
  const auto b = radial_solve(box, 3);
  for (int n = 1; n <= 3; ++n) CHECK(std::abs(b.eigenvalues[n - 1] - n * n * pi * pi * 0.49 / (2 * 9.0)) < 1e-6);

  box.tolerance = 1e-12;
  box.n_points = 200;
  CHECK_THROWS_AS(radial_solve(box, 3), Error);
  box.tolerance = 0.0;
  box.n_points = 100;
  CHECK_THROWS_AS(radial_solve(box, 3), Error);
  box.n_points = 400;
  box.r_min = 0.0;
  CHECK_THROWS_AS(radial_solve(box, 3), Error);
}

TEST_CASE("single particle in a harmonic trap") {
  const double m = 1.5, w = 0.8;
  const ParticleSystem trap({m}, {}, BodyTerm{potentials::harmonic(m * w * w), false});
  PolarGrid grid;
  grid.r_max = 12.0 / std::sqrt(m * w);
  for (int ell = -3; ell <= 3; ++ell) {
    const auto s = n1_polar_spectrum(trap, ell, 4, grid);
    for (int nr = 0; nr < 4; ++nr) {
      const double exact = (2 * nr + std::abs(ell) + 1) * w;
      CHECK(std::abs(s.eigenvalues[nr] - exact) < 1e-5 * exact);
    }
  }
  // Mass-weighted trap and hbar != 1: energies scale with hbar omega.
  const ParticleSystem weighted({2.0}, {}, BodyTerm{potentials::harmonic(0.25), true}, 0.5);
  const auto q = n1_polar_spectrum(weighted, 2, 2, {12.0 / std::sqrt(2.0 * 0.5 / 0.5), 2000, 0.0});
  CHECK(q.eigenvalues[0] == doctest::Approx(0.5 * 0.5 * 3).epsilon(1e-7));
  CHECK(q.eigenvalues[1] == doctest::Approx(0.5 * 0.5 * 5).epsilon(1e-7));

  const auto s0 = n1_polar_spectrum(trap, 0, 2, grid);
  CHECK(s0.eigenvalues[1] - s0.eigenvalues[0] > 1.5 * w);
  const auto sp = n1_polar_spectrum(trap, 2, 3, grid), sm = n1_polar_spectrum(trap, -2, 3, grid);
  for (int i = 0; i < 3; ++i) CHECK(sp.eigenvalues[i] == sm.eigenvalues[i]);

  // The weighted finite-volume form equals the absorbed half-line problem with the -1/4 shift.
  RadialProblem absorbed;
  absorbed.mass = m;
  absorbed.potential = [&](double x) { return n1_effective_potential(trap, 2.0, x); };
  absorbed.r_min = 1e-3;
  absorbed.r_max = grid.r_max;
  absorbed.n_points = 4000;
  const auto a = radial_solve(absorbed, 3);
  for (int i = 0; i < 3; ++i) CHECK(a.eigenvalues[i] == doctest::Approx(sp.eigenvalues[i]).epsilon(1e-8));
  CHECK(n1_effective_potential(trap, 0.0, 2.0) == doctest::Approx(0.5 * m * w * w * 4 - 1.0 / (8 * m * 4)));

  CHECK_THROWS_AS(n1_polar_spectrum(ParticleSystem({1.0, 1.0}), 0, 1), Error);
  CHECK_THROWS_AS(n1_polar_spectrum(ParticleSystem({1.0}), 0, 1), Error);
}

TEST_CASE("closed-form spring series") {
  EckartSpringParams p;
  p.m1 = 1.0;
  p.m2 = 3.0;
  p.k = 2.0;
  p.hbar = 0.9;
  p.a = 30.0;
  const double mu = 0.75, w = std::sqrt(2.0 / mu);
  CHECK(p.reduced_mass() == mu);
  CHECK(p.omega() == doctest::Approx(w));
  const double eps = std::sqrt(0.9 / (mu * w * 900.0));
  CHECK(p.epsilon() == doctest::Approx(eps));
  CHECK(p.with_epsilon(0.03).epsilon() == doctest::Approx(0.03));
  for (int n = 0; n < 4; ++n) {
    const auto r = eckart_perturbative(p, 0, n);
    CHECK(r.e0 == doctest::Approx(0.9 * w * (n + 0.5)));
    CHECK(r.e1 == doctest::Approx(-0.9 * w * eps * eps / 8));
  }
  const auto r0 = eckart_perturbative(p, 2, 0);
  CHECK(r0.coeff_lower == 0.0);
  CHECK(r0.coeff_upper == doctest::Approx(-0.5 * std::pow(eps, 3) * 3.75 * std::sqrt(0.5)));
  const auto r2 = eckart_perturbative(p, -1, 2);
  CHECK(r2.coeff_lower == doctest::Approx(0.5 * std::pow(eps, 3) * 0.75));
  CHECK_THROWS_AS(eckart_perturbative(p, 0.5, 0), Error);
  p.k = -1.0;
  CHECK_THROWS_AS(eckart_perturbative(p, 0, 0), Error);
}

TEST_CASE("spring oracle") {
  EckartSpringParams base;
  base.m2 = 2.0;
  const double hw = base.omega();
  const auto tiny = base.with_epsilon(1e-3);
  for (int n = 0; n < 3; ++n) CHECK(std::abs(eckart_oracle(tiny, 1, n) - hw * (n + 0.5)) < 1e-6 * hw);

  const auto p = base.with_epsilon(0.05);
  const double shift = eckart_oracle(p, 0, 0) - 0.5 * hw;
  CHECK(shift == doctest::Approx(-hw * 0.0025 / 8).epsilon(0.05));
  CHECK(eckart_oracle(p, 2, 1) == eckart_oracle(p, -2, 1));

  const auto s = eckart_oracle_spectrum(p, 1, 3);
  CHECK(s.convergence < 1e-7 * hw);
  EckartOracleGrid narrow;
  narrow.half_width = 3.0;
  CHECK_THROWS_AS(eckart_oracle_spectrum(p, 1, 3, narrow), Error);
}

TEST_CASE("oscillator overlaps") {
  const double center = 7.0, len = 0.6;
  Vec grid = Vec::LinSpaced(6001, center - 9.0, center + 9.0);
  Vec f(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double x = (grid(i) - center) / len;
    f(i) = (0.8 * hermite_function(3, x) - 0.6 * hermite_function(4, x)) / std::sqrt(len);
  }
  const auto c = oscillator_overlaps(grid, f, center, len, 6);
  for (int k = 0; k <= 6; ++k) {
    const double want = k == 3 ? 0.8 : (k == 4 ? -0.6 : 0.0);
    CHECK(std::abs(c[static_cast<std::size_t>(k)] - want) < 1e-10);
  }
  CHECK_THROWS_AS(oscillator_overlaps(grid, f.head(10), center, len, 2), Error);
}

TEST_CASE("spring perturbation sweep") {
  EckartSpringParams base;
  base.m2 = 2.0;
  const auto rep = eckart_experiment(base, {0.02, 0.03, 0.05}, {0, 1, 2}, {0, 1, 2});
  CHECK(rep.rows.size() == 27);
  CHECK(rep.cells.size() == 9);
  CHECK(rep.energies_pass);
  CHECK(rep.exponents_pass);
  CHECK(rep.max_slope_rel_err < 0.02);
  CHECK(rep.min_residual_exponent > 3.5);
  CHECK(rep.slope_spread_over_n < 0.02);
  CHECK(rep.max_oracle_error < 1e-7);
  // Textbook first-order mixing, perturbation -hbar w eps^3 (ell^2 - 1/4) x, is what the exact solve shows.
  CHECK(rep.max_coeff_rel_err_first_order < 0.05);
  for (const auto& cell : rep.cells) {
    CAPTURE(cell.ell);
    CAPTURE(cell.n);
    CHECK(cell.other_overlap_scale < 10.0);
    // The closed-form series carries half the magnitude and the opposite sign.
    CHECK(cell.coeff_upper / cell.coeff_upper_pred == doctest::Approx(-2.0).epsilon(0.05));
    CHECK_FALSE(cell.sign_match);
  }
  CHECK_FALSE(rep.wavefunctions_pass);
  CHECK_FALSE(rep.pass);
  CHECK_THROWS_AS(eckart_experiment(base, {0.02, 0.2, 0.05}, {0}, {0}), Error);
  CHECK_THROWS_AS(eckart_experiment(base, {0.02, 0.05}, {0}, {0}), Error);
}

TEST_CASE("intrinsic residual angular momentum") {
  const ParticleSystem tri({1.0, 1.4, 0.8});
  const auto shape = random_shape(tri, 3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);

  // In the Eckart chart only the deformation-velocity wedge survives.
  const LinearChart ec = eckart_chart(shape);
  const auto rep = eckart_order_check(tri, shape, OrderChart::Eckart, {1e-3, 1e-2, 1e-1}, 11);
  CHECK(std::abs(rep.lambda_at_shape) < 1e-14);
  CHECK(rep.exponent == doctest::Approx(1.0).epsilon(1e-9));

  // Against the exact classical value: the first-order form is off by O(s^2).
  for (OrderChart which : {OrderChart::Eckart, OrderChart::LinearizedPrincipalAxes}) {
    const LinearChart lc = which == OrderChart::Eckart ? ec : linearized_principal_axes_chart(shape);
    Mat gmat = Mat::Zero(3, tri.dim());
    for (int i = 0; i < 3; ++i) {
      gmat(0, x_index(i)) = tri.mass(i) * lc.A(i);
      gmat(0, y_index(i)) = tri.mass(i) * lc.B(i);
      gmat(1, x_index(i)) = tri.mass(i);
      gmat(2, y_index(i)) = tri.mass(i);
    }
    const Eigen::FullPivLU<Mat> lu(gmat);
    const Mat kernel = lu.kernel();
    const Vec dr = kernel * Vec::NullaryExpr(kernel.cols(), [&] { return g(rng); });
    const Vec rate = kernel * Vec::NullaryExpr(kernel.cols(), [&] { return g(rng); });
    const double ell = 0.7;
    std::vector<double> gaps;
    for (double s : {1e-2, 2e-2}) {
      const Vec cfg = shape.Z + s * dr;
      const double xi = xi_of_state(tri, cfg, rate, ell);
      const double exact = residual_angular_momentum(cfg, momenta_linear(tri, lc, cfg, rate, xi));
      gaps.push_back(std::abs(exact - intrinsic_lambda(tri, shape, lc, s * dr, rate, ell)));
    }
    CHECK(gaps[1] / gaps[0] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(std::abs(intrinsic_xi(tri, shape, Vec::Zero(6), rate, ell) - xi_of_state(tri, shape.Z, rate, ell)) < 1e-14);
  }
}

TEST_CASE("ordering of the residual angular momentum in the two charts") {
  const ParticleSystem tri({1.0, 2.0, 1.5});
  const std::vector<double> scales{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto shape = random_shape(tri, 100 + seed);
    const auto ek = eckart_order_check(tri, shape, OrderChart::Eckart, scales, seed);
    const auto pa = eckart_order_check(tri, shape, OrderChart::LinearizedPrincipalAxes, scales, seed);
    CHECK(ek.exponent >= 0.95);
    CHECK(std::abs(pa.exponent) < 0.1);
    CHECK(std::abs(pa.lambda_at_shape) > 0.0);
  }
  const auto shape = random_shape(tri, 1);
  CHECK_THROWS_AS(eckart_order_check(tri, shape, OrderChart::Eckart, {1e-3}, 0), Error);
  EquilibriumShape tilted{rotate(0.3, shape.Z)};
  CHECK_THROWS_AS(eckart_order_check(tri, tilted, OrderChart::Eckart, scales, 0), Error);
}
