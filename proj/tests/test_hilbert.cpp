#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rotframe/algebra.hpp"
#include "rotframe/error.hpp"
#include "rotframe/hilbert.hpp"

using namespace rotframe;
using std::numbers::pi;

namespace {

LinearChart polar_chart() { return {Vec::Zero(1), Vec::Ones(1)}; }

// f(X) g(Y) with f gaussian around x0 and g linear, analytic to second order.
WaveFunction separable(double x0, double width, double slope) {
  return WaveFunction(2, [=](const Vec& p, int order) {
    const double dx = p(0) - x0;
    const double f = std::exp(-dx * dx / (2 * width * width));
    const double fp = -dx / (width * width) * f;
    const double fpp = (dx * dx / std::pow(width, 4) - 1.0 / (width * width)) * f;
    const double g = 1.0 + slope * p(1);
    Jet j;
    j.value = f * g;
    if (order >= 1) {
      j.grad = CVec(2);
      j.grad << fp * g, f * slope;
    }
    if (order >= 2) {
      j.hess = CMat(2, 2);
      j.hess << fpp * g, fp * slope, fp * slope, 0.0;
    }
    return j;
  });
}

}  // namespace

TEST_CASE("single-particle chart is the polar measure") {
  const ParticleSystem one({1.0});
  const SurfaceChart chart(one, LinearGauge{polar_chart()});
  CHECK(chart.free_dim() == 1);
  CHECK(chart.free_indices() == std::vector<Eigen::Index>{0});
  const Vec x = chart.embed(Vec::Constant(1, 1.7));
  CHECK(x(1) == 0.0);
  CHECK(chart.weight(x) == doctest::Approx(1.7));
  CHECK(chart.in_domain(x));
  CHECK_FALSE(chart.in_domain(chart.embed(Vec::Constant(1, -0.3))));

  // Oscillator ground state: with the 2 pi of the group dropped, sqrt(2) exp(-X^2/2) has unit norm.
  BumpParams bp;
  bp.center = Vec::Zero(2);
  bp.sigma = 1.0;
  bp.c0 = std::sqrt(2.0);
  const WaveFunction psi = gaussian_bump(bp);
  const Box box{Vec::Constant(1, 0.0), Vec::Constant(1, 12.0)};
  const auto n = inner_product(chart, psi, psi, {}, box);
  CHECK(n.value.real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(n.value.imag()) < 1e-15);
  CHECK(n.error < 1e-8);

  // Same number from the lab-frame plane integral divided by 2 pi.
  const auto lab = integrate_box([&](const Vec& r) { return std::norm(psi.value(r)); },
                                 Box{Vec::Constant(2, -12.0), Vec::Constant(2, 12.0)}, {40, 2});
  CHECK(lab.value.real() / (2 * pi) == doctest::Approx(n.value.real()).epsilon(1e-10));
}

TEST_CASE("inner products are hermitian forms") {
  const ParticleSystem pair({1.0, 2.0}, {}, BodyTerm{potentials::harmonic(1.0), false});
  const LinearChart chart{(Vec(2) << 0.3, -0.5).finished(), (Vec(2) << 1.0, 0.4).finished()};
  const SurfaceChart sc(pair, LinearGauge{chart});
  CHECK(sc.free_dim() == 3);
  std::mt19937_64 rng(4);
  const Vec c = sample_on_surface(pair, LinearGauge{chart}, rng);
  BumpParams a, b;
  a.center = c;
  b.center = c + Vec::Constant(4, 0.05);
  a.sigma = b.sigma = 0.15;
  a.lin_im = Vec::Constant(4, 2.0);
  b.c0 = cplx(0.3, -1.0);
  const Box box = bump_box(sc, {a, b}, 7.0);
  const auto ab = inner_product(sc, gaussian_bump(a), gaussian_bump(b), {}, box);
  const auto ba = inner_product(sc, gaussian_bump(b), gaussian_bump(a), {}, box);
  CHECK(std::abs(ab.value - std::conj(ba.value)) < 1e-14 * std::abs(ab.value) + 1e-300);
  CHECK(inner_product(sc, gaussian_bump(a), gaussian_bump(a), {}, box).value.real() > 0.0);
  // A box that cuts the bump is refused.
  const Box tight{box.lo.array() + 0.9 * (box.hi - box.lo).array() / 2, box.hi};
  CHECK_THROWS_AS(inner_product(sc, gaussian_bump(a), gaussian_bump(b), {}, tight), Error);
}

TEST_CASE("chart parametrizations stay on the surface") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto kind : {GaugeKind::Linear, GaugeKind::LinearCm, GaugeKind::PrincipalAxes, GaugeKind::Eckart}) {
    const auto setup = random_setup(kind, 3, 71);
    const Vec ref = sample_on_surface(setup.sys, setup.gauge, rng);
    const SurfaceChart chart(setup.sys, setup.gauge, ref);
    CHECK(chart.free_dim() == (has_cm_condition(kind) ? 3 : 5));
    for (int i = 0; i < 100; ++i) {
      Vec u = chart.free_coords(ref);
      for (auto& v : u) v += 0.3 * g(rng);
      const Vec x = chart.embed(u);
      CHECK(chart.residual(x) < 1e-12);
      CHECK((chart.free_coords(x) - u).norm() < 1e-14);
    }
  }
}

TEST_CASE("two-body Eckart chart") {
  const double m1 = 1.0, m2 = 3.0, a = 2.0, mu = m1 * m2 / (m1 + m2);
  const ParticleSystem pair({m1, m2}, {{potentials::spring(1.0, a), {}}});
  const auto shape = two_body_equilibrium(m1, m2, a);
  const SurfaceChart chart(pair, EckartGauge{shape});
  CHECK(chart.free_dim() == 1);
  for (double u : {-0.4, 0.0, 0.7}) {
    const Vec x = chart.embed(Vec::Constant(1, u));
    CHECK(chart.residual(x) < 1e-15);
    CHECK(chart.free_coords(x)(0) == doctest::Approx(u));
    CHECK(chart.jacobian(x) == doctest::Approx(mu * a * (a + u)));
    CHECK(chart.weight(x) == doctest::Approx(a + u));
    CHECK(chart.absorbed_weight(x) == doctest::Approx(1.0 / (mu * a)));
    // Centrifugal and quantum potentials together: hbar^2 r^2 (ell^2 - 1/4) / (2 q^2).
    const double q = chart.jacobian(x);
    CHECK(quantum_potential(pair, EckartGauge{shape}, x) == doctest::Approx(-mu * a * a / (8 * q * q)));
  }
}

TEST_CASE("quantum potentials") {
  const double m = 1.7;
  const ParticleSystem one({m});
  for (double x : {0.3, 1.0, 2.5}) {
    const Vec p = (Vec(2) << x, 0.0).finished();
    CHECK(quantum_potential(one, LinearGauge{polar_chart()}, p) == -1.0 / (8 * m * x * x));
  }
  const ParticleSystem pair({1.0, 2.0});
  const Vec collinear = (Vec(4) << 1.2, 0.0, -0.6, 0.0).finished();
  const double r2 = moment_of_inertia(pair, collinear);
  CHECK(quantum_potential(pair, PrincipalAxesGauge{}, collinear) == doctest::Approx(-5.0 / (8 * r2)).epsilon(1e-14));
  const ParticleSystem heavy({1.0}, {}, std::nullopt, 0.5);
  CHECK(quantum_potential(heavy, LinearGauge{polar_chart()}, (Vec(2) << 2.0, 0.0).finished()) ==
        doctest::Approx(-0.25 / 32));
  CHECK_THROWS_AS(quantum_potential(one, LinearGauge{polar_chart()}, Vec::Zero(2)), Error);
}

TEST_CASE("single-particle Hamiltonian is the radial operator") {
  const double m = 1.3, k = 0.8;
  const ParticleSystem one({m}, {}, BodyTerm{potentials::harmonic(k), false});
  const WaveFunction psi = separable(1.4, 0.5, 0.7);
  for (double ell : {0.0, 1.0, -2.0}) {
    const auto h = apply_hamiltonian(one, LinearGauge{polar_chart()}, psi, ell);
    for (double x : {0.6, 1.1, 1.9}) {
      // Radial form evaluated by differences of the restriction f(X) = psi(X, 0).
      auto f = [&](double t) { return psi.value((Vec(2) << t, 0.0).finished()).real(); };
      const double dh = 1e-4;
      const double f1 = (f(x + dh) - f(x - dh)) / (2 * dh);
      const double f2 = (f(x + dh) - 2 * f(x) + f(x - dh)) / (dh * dh);
      const double radial = -(f2 + f1 / x) / (2 * m) + ell * ell / (2 * m * x * x) * f(x) + 0.5 * k * x * x * f(x);
      const cplx got = h((Vec(2) << x, 0.0).finished());
      CHECK(std::abs(got.real() - radial) < 1e-6 * std::max(1.0, std::abs(radial)));
      CHECK(std::abs(got.imag()) < 1e-12);
    }
  }
}

TEST_CASE("constant wave function is annihilated without potential") {
  const WaveFunction one3(6, [](const Vec&, int order) {
    Jet j;
    j.value = 1.0;
    if (order >= 1) j.grad = CVec::Zero(6);
    if (order >= 2) j.hess = CMat::Zero(6, 6);
    return j;
  });
  std::mt19937_64 rng(2);
  for (auto kind : {GaugeKind::Linear, GaugeKind::LinearCm, GaugeKind::PrincipalAxes}) {
    const auto setup = random_setup(kind, 3, 5);
    const auto h = apply_hamiltonian(setup.sys, setup.gauge, one3, 0.0);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(h(sample_on_surface(setup.sys, setup.gauge, rng))) < 1e-12);
  }
}

TEST_CASE("absorbing the Jacobian") {
  const ParticleSystem one({1.0});
  const SurfaceChart chart(one, LinearGauge{polar_chart()});
  const WaveFunction psi = separable(1.2, 0.4, 0.0);
  const WaveFunction tilde = absorb_jacobian(chart, psi);
  CHECK(tilde.jacobian_absorbed());
  const WaveFunction back = emit_jacobian(chart, tilde);
  for (double x : {0.5, 1.0, 2.0}) {
    const Vec p = (Vec(2) << x, 0.0).finished();
    CHECK(std::abs(tilde.value(p) - std::sqrt(x) * psi.value(p)) < 1e-15);
    const Jet a = back(p, 2), b = psi(p, 2);
    CHECK(std::abs(a.value - b.value) < 1e-13);
    CHECK((a.grad - b.grad).norm() < 1e-13);
    CHECK((a.hess - b.hess).norm() < 1e-12);
  }
  CHECK_THROWS_AS(absorb_jacobian(chart, tilde), Error);

  // Flat measure after absorption gives the same inner product.
  const Box box{Vec::Constant(1, 0.0), Vec::Constant(1, 6.0)};
  const auto weighted = inner_product(chart, psi, psi, {}, box);
  const auto flat = inner_product(chart, tilde, tilde, {}, box);
  CHECK(flat.value.real() == doctest::Approx(weighted.value.real()).epsilon(1e-12));

  // Same in the principal-axes gauge, where the leftover measure is not constant.
  const ParticleSystem pair({1.0, 1.5});
  std::mt19937_64 rng(8);
  const Vec c = sample_on_surface(pair, PrincipalAxesGauge{}, rng);
  const SurfaceChart pa(pair, PrincipalAxesGauge{}, c);
  BumpParams bp;
  bp.center = c;
  bp.sigma = 0.05;
  const WaveFunction bump = gaussian_bump(bp);
  const Box pbox = bump_box(pa, {bp}, 8.0);
  const auto w1 = inner_product(pa, bump, bump, {32, 2}, pbox);
  const auto w2 = inner_product(pa, absorb_jacobian(pa, bump), absorb_jacobian(pa, bump), {32, 2}, pbox);
  CHECK(w2.value.real() == doctest::Approx(w1.value.real()).epsilon(1e-10));
}

TEST_CASE("representations agree pointwise") {
  std::mt19937_64 rng(31);
  for (auto kind : {GaugeKind::Linear, GaugeKind::LinearCm, GaugeKind::PrincipalAxes, GaugeKind::Eckart}) {
    CAPTURE(to_string(kind));
    const auto setup = random_setup(kind, 3, 12);
    const ParticleSystem sys(setup.sys.masses(), {{potentials::spring(1.0, 1.0), {}}});
    std::vector<Vec> pts;
    for (int i = 0; i < 25; ++i) pts.push_back(sample_on_surface(sys, setup.gauge, rng));
    BumpParams bp;
    bp.center = pts.front();
    bp.sigma = 1.3;
    bp.lin_re = Vec::LinSpaced(6, -1.0, 1.0);
    bp.lin_im = Vec::Constant(6, 0.4);
    const auto rep = representation_check(sys, setup.gauge, gaussian_bump(bp), 1.0, pts, 1e-8);
    CHECK(rep.pass);
    CHECK(rep.max_potential_dev < 1e-8);
  }
}

TEST_CASE("hermiticity of the gauge-fixed operators") {
  const ParticleSystem trapped({1.0, 1.8}, {{potentials::spring(1.0, 1.0), {}}},
                               BodyTerm{potentials::harmonic(0.6), false});
  const LinearChart chart{(Vec(2) << 0.4, -0.2).finished(), (Vec(2) << 0.9, 0.5).finished()};
  for (const GaugeChart& gauge : {GaugeChart{LinearGauge{chart}}, GaugeChart{PrincipalAxesGauge{}}}) {
    const auto rep = hermiticity_check(trapped, gauge, 1.0, 2, 5.0, 77);
    CHECK(rep.pass);
    CHECK(rep.trials == 2);
    CHECK(rep.max_asym_potential < 1e-14);
    CHECK(rep.max_asym_h < 1e-6);
    CHECK(rep.max_asym_lambda < 1e-8);
  }
}

TEST_CASE("expectation values of real functions") {
  const ParticleSystem trapped({1.0, 1.8}, {}, BodyTerm{potentials::harmonic(0.6), false});
  const GaugeChart gauge = PrincipalAxesGauge{};
  std::mt19937_64 rng(9);
  const Vec c = sample_on_surface(trapped, gauge, rng);
  const SurfaceChart chart(trapped, gauge, c);
  BumpParams bp;
  bp.center = c;
  bp.sigma = 0.06;
  bp.lin_re = Vec::Constant(4, 3.0);
  const WaveFunction psi = gaussian_bump(bp);
  const Box box = bump_box(chart, {bp}, 8.0);
  const auto lam = matrix_element(chart, psi, apply_lambda(trapped, gauge, psi), false, {32, 2}, box);
  const auto h = matrix_element(chart, psi, apply_hamiltonian(trapped, gauge, psi, 0.0), false, {32, 2}, box);
  const auto nrm = inner_product(chart, psi, psi, {32, 2}, box);
  CHECK(std::abs(lam.value) < 1e-6 * nrm.value.real());
  CHECK(std::abs(h.value.imag()) < 1e-6 * std::abs(h.value.real()));
}
