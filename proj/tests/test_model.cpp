#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rotframe/error.hpp"
#include "rotframe/gauge.hpp"
#include "rotframe/model.hpp"

using namespace rotframe;

namespace {

Vec random_cfg(std::mt19937_64& rng, Eigen::Index dim, double spread = 2.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Vec v(dim);
  for (auto& x : v) x = u(rng);
  return v;
}

ParticleSystem three_body() {
  return ParticleSystem({1.0, 2.0, 0.5}, {{potentials::spring(1.3, 1.1), {{0, 1}, {1, 2}}}},
                        BodyTerm{potentials::harmonic(0.7), false});
}

}  // namespace

TEST_CASE("linear shape functionals by hand") {
  ParticleSystem sys({1.0});
  LinearChart chart{Vec::Zero(1), Vec::Ones(1)};
  Vec r(2);
  r << 3.0, 4.0;
  const auto sv = shape_linear(sys, r, chart);
  CHECK(sv.s == doctest::Approx(4.0));
  CHECK(sv.q == doctest::Approx(3.0));
  CHECK(sv.r2 == doctest::Approx(1.0));
  const auto zero = shape_linear(sys, Vec::Zero(2), chart);
  CHECK(zero.s == 0.0);
  CHECK(zero.q == 0.0);
}

TEST_CASE("two-body eckart chart shape values") {
  const double m1 = 1.3, m2 = 0.6, a = 2.5;
  ParticleSystem sys({m1, m2});
  const auto shape = two_body_equilibrium(m1, m2, a);
  const LinearChart chart = eckart_chart(shape);
  const double mu = m1 * m2 / (m1 + m2);
  Vec d(4);
  d << 0.11, -0.07, -0.05, 0.23;
  const auto sv = shape_linear(sys, shape.Z + d, chart);
  CHECK(sv.s == doctest::Approx(a * mu * (d(1) - d(3))).epsilon(1e-13));
  CHECK(sv.r2 == doctest::Approx(mu * a * a).epsilon(1e-13));
  CHECK(sv.q == doctest::Approx(mu * a * (a + d(0) - d(2))).epsilon(1e-13));
}

TEST_CASE("quadratic shape functionals") {
  ParticleSystem sys({1.0, 1.0});
  Vec r(4);
  r << 1.0, 1.0, -1.0, -1.0;
  auto sq = shape_quadratic(sys, r);
  CHECK(sq.S == doctest::Approx(2.0));
  CHECK(sq.Q == doctest::Approx(0.0));
  CHECK(sq.R2 == doctest::Approx(4.0));
  r << 1.0, 0.0, -3.0, 0.0;
  sq = shape_quadratic(sys, r);
  CHECK(sq.S == 0.0);
  CHECK(sq.Q == doctest::Approx(sq.R2 / 2));
  ParticleSystem one({2.0});
  const auto origin = shape_quadratic(one, Vec::Zero(2));
  CHECK(origin.S == 0.0);
  CHECK(origin.Q == 0.0);
  CHECK(origin.R2 == 0.0);
}

TEST_CASE("center of mass") {
  ParticleSystem pair({1.5, 1.5});
  Vec r(4);
  r << 0.3, -0.2, -0.3, 0.2;
  CHECK(center_of_mass(pair, r).norm() == doctest::Approx(0.0));
  ParticleSystem one({3.0});
  Vec p(2);
  p << 0.4, 0.9;
  CHECK((center_of_mass(one, p) - Vec2(0.4, 0.9)).norm() < 1e-15);
  ParticleSystem sys({1.0, 2.0});
  const auto shape = two_body_equilibrium(1.0, 2.0, 1.7);
  CHECK(center_of_mass(sys, shape.Z).norm() < 1e-15);
  CHECK_NOTHROW(validate_equilibrium(sys, shape));
}

TEST_CASE("spring at rest length has zero energy and force") {
  ParticleSystem sys({1.0, 1.0}, {{potentials::spring(2.0, 1.5), {}}});
  Vec r(4);
  r << 0.2, 0.1, 0.2 + 1.5 * std::cos(0.4), 0.1 + 1.5 * std::sin(0.4);
  CHECK(potential_energy(sys, r) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(potential_gradient(sys, r).norm() < 1e-14);
}

TEST_CASE("translation leaves a pair potential unchanged") {
  ParticleSystem sys({1.0, 2.0, 3.0}, {{potentials::spring(1.0, 0.5), {}}});
  std::mt19937_64 rng(3);
  const Vec r = random_cfg(rng, 6);
  Vec shifted = r;
  for (int a = 0; a < 3; ++a) shifted.segment<2>(2 * a) += Vec2(0.7, -1.9);
  CHECK(potential_energy(sys, shifted) == doctest::Approx(potential_energy(sys, r)).epsilon(1e-13));
}

TEST_CASE("potential gradient matches central differences") {
  const ParticleSystem sys = three_body();
  const ParticleSystem coul({1.0, 2.0}, {{potentials::log_interaction(0.8), {}}},
                      BodyTerm{potentials::harmonic(1.1), true});
  std::mt19937_64 rng(11);
  for (const ParticleSystem* s : {&sys, &coul}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Vec r = random_cfg(rng, s->dim());
      const Vec g = potential_gradient(*s, r);
      Vec fd(s->dim());
      const double h = 1e-5;
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        Vec p = r, m = r;
        p(i) += h;
        m(i) -= h;
        fd(i) = (potential_energy(*s, p) - potential_energy(*s, m)) / (2 * h);
      }
      CHECK((g - fd).norm() <= 1e-8 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("coincident particles with a singular potential throw") {
  ParticleSystem sys({1.0, 1.0}, {{potentials::log_interaction(1.0), {}}});
  Vec r(4);
  r << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(potential_energy(sys, r), Error);
  try {
    potential_gradient(sys, r);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CoincidentParticles);
  }
  ParticleSystem soft({1.0, 1.0}, {{potentials::harmonic(1.0), {}}});
  CHECK(potential_gradient(soft, r).norm() == 0.0);
}

TEST_CASE("gradient exerts no torque for central potentials") {
  const ParticleSystem sys = three_body();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec r = random_cfg(rng, 6);
    const Vec g = potential_gradient(sys, r);
    double torque = 0.0;
    for (int a = 0; a < 3; ++a) torque += r(2 * a) * g(2 * a + 1) - r(2 * a + 1) * g(2 * a);
    CHECK(std::abs(torque) < 1e-10);
  }
}

TEST_CASE("angular and linear momentum") {
  ParticleSystem one({1.0});
  const double t = 0.8;
  Vec r(2), v(2);
  r << std::cos(t), std::sin(t);
  v << -std::sin(t), std::cos(t);
  CHECK(angular_momentum_lab(one, r, v) == doctest::Approx(1.0));
  const ParticleSystem sys = three_body();
  std::mt19937_64 rng(9);
  const Vec cfg = random_cfg(rng, 6);
  CHECK(angular_momentum_lab(sys, cfg, Vec::Zero(6)) == 0.0);
  CHECK(total_momentum_lab(sys, Vec::Zero(6)).norm() == 0.0);
  const double w = 0.37;
  CHECK(angular_momentum_lab(sys, cfg, w * cross_z(cfg)) ==
        doctest::Approx(w * moment_of_inertia(sys, cfg)).epsilon(1e-13));
}

TEST_CASE("scaling and rotation covariance of shape functionals") {
  const ParticleSystem sys = three_body();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  LinearChart chart{random_cfg(rng, 3), random_cfg(rng, 3)};
  for (int trial = 0; trial < 50; ++trial) {
    const Vec r = random_cfg(rng, 6);
    const double c = u(rng), th = u(rng);
    const auto l0 = shape_linear(sys, r, chart);
    const auto q0 = shape_quadratic(sys, r);
    const auto ls = shape_linear(sys, c * r, chart);
    const auto qs = shape_quadratic(sys, c * r);
    CHECK(std::abs(ls.s - c * l0.s) < 1e-12 * (1 + std::abs(c * l0.s)));
    CHECK(std::abs(qs.Q - c * c * q0.Q) < 1e-12 * (1 + std::abs(c * c * q0.Q)));
    const Vec rr = rotate(th, r);
    const auto l1 = shape_linear(sys, rr, chart);
    const auto q1 = shape_quadratic(sys, rr);
    CHECK(std::abs(l1.s - (std::cos(th) * l0.s - std::sin(th) * l0.q)) < 1e-12 * (1 + std::abs(l0.s)));
    CHECK(std::abs(l1.q - (std::cos(th) * l0.q + std::sin(th) * l0.s)) < 1e-12 * (1 + std::abs(l0.q)));
    CHECK(std::abs(q1.Q - (std::cos(2 * th) * q0.Q + std::sin(2 * th) * q0.S)) < 1e-12 * (1 + q0.R2));
    CHECK(std::abs(q1.S - (std::cos(2 * th) * q0.S - std::sin(2 * th) * q0.Q)) < 1e-12 * (1 + q0.R2));
    CHECK(std::abs(q1.R2 - q0.R2) < 1e-12 * q0.R2);
    CHECK(std::abs(center_of_mass(sys, rr).norm() - center_of_mass(sys, r).norm()) < 1e-12);
  }
}

TEST_CASE("charts validate") {
  ParticleSystem sys({1.0, 3.0});
  LinearChart bad{Vec::Zero(2), Vec::Zero(2)};
  CHECK_THROWS_AS(validate_chart(sys, bad), Error);
  LinearChart not_inv{Vec::Zero(2), Vec::Ones(2)};
  CHECK_NOTHROW(validate_chart(sys, not_inv));
  try {
    validate_chart(sys, not_inv, true);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ChartNotTranslationInvariant);
  }
  CHECK_THROWS_AS(ParticleSystem({1.0, -1.0}), Error);
}

TEST_CASE("oscillator units round trip") {
  OscillatorUnits u{1.2, 0.7, 3.0};
  CHECK(u.length() == doctest::Approx(std::sqrt(1.2 / (0.7 * 3.0))));
  CHECK(u.from_internal_length(u.to_internal_length(2.5)) == doctest::Approx(2.5));
  CHECK(u.to_internal_energy(u.energy()) == doctest::Approx(1.0));
}
