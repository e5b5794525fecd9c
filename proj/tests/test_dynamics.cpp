#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rotframe/dynamics.hpp"
#include "rotframe/error.hpp"

using namespace rotframe;
using std::numbers::pi;

namespace {

Vec random_vec(std::mt19937_64& rng, Eigen::Index dim, double spread = 1.5) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Vec v(dim);
  for (auto& x : v) x = u(rng);
  return v;
}

ParticleSystem trapped_three() {
  return ParticleSystem({1.0, 2.0, 0.5}, {{potentials::spring(1.3, 1.1), {{0, 1}, {1, 2}}}},
                        BodyTerm{potentials::harmonic(0.7), false});
}

// Project a lab state onto a linear body frame of the given chart.
FrameState body_state(const ParticleSystem& sys, const LinearChart& chart, std::mt19937_64& rng) {
  return lab_to_body(sys, LinearGauge{chart}, random_vec(rng, sys.dim()), random_vec(rng, sys.dim()));
}

}  // namespace

TEST_CASE("lab equations of motion") {
  ParticleSystem pair({1.0, 2.0}, {{potentials::spring(3.0, 1.2), {}}});
  const auto shape = two_body_equilibrium(1.0, 2.0, 1.2);
  CHECK(eom_lab(pair, shape.Z, Vec::Zero(4)).norm() < 1e-15);
  const double w = 1.7, m = 2.5;
  ParticleSystem one({m}, {}, BodyTerm{potentials::harmonic(w * w), true});
  Vec r(2);
  r << 0.3, -0.8;
  CHECK((eom_lab(one, r, Vec::Zero(2)) + w * w * r).norm() < 1e-14);
}

TEST_CASE("energy drift under fixed-step RK4 stays small") {
  const ParticleSystem sys = trapped_three();
  std::mt19937_64 rng(2);
  Vec y(12);
  y << random_vec(rng, 6), random_vec(rng, 6, 0.5);
  auto f = [&](const Vec& s) {
    Vec d(12);
    d << s.tail(6), eom_lab(sys, s.head(6), s.tail(6));
    return d;
  };
  auto energy = [&](const Vec& s) { return kinetic_energy(sys, s.tail(6)) + potential_energy(sys, s.head(6)); };
  const double e0 = energy(y), h = 1e-3;
  for (int k = 0; k < 10000; ++k) {
    const Vec k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(std::abs(energy(y) - e0) < 1e-8 * std::abs(e0));
}

TEST_CASE("xi of state") {
  const ParticleSystem sys = trapped_three();
  std::mt19937_64 rng(3);
  const Vec r = random_vec(rng, 6);
  const double inertia = moment_of_inertia(sys, r);
  CHECK(xi_of_state(sys, r, Vec::Zero(6), 2.0) == doctest::Approx(-2.0 / inertia));
  CHECK(xi_of_state(sys, r, 0.4 * cross_z(r), 0.4 * inertia) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(xi_of_state(sys, r, Vec::Zero(6), 0.0) == 0.0);
  CHECK_THROWS_AS(xi_of_state(sys, Vec::Zero(6), Vec::Zero(6), 1.0), Error);
}

TEST_CASE("rotating equations reduce to the lab form when the frame is inertial") {
  ParticleSystem free3({1.0, 2.0, 0.5});
  std::mt19937_64 rng(4);
  const LinearChart chart{random_vec(rng, 3), random_vec(rng, 3)};
  const FrameState st = body_state(free3, chart, rng);
  const double lz = angular_momentum_lab(free3, st.cfg.coords, st.vel);
  const auto acc = eom_rotating(free3, chart, st.cfg.coords, st.vel, lz);
  CHECK(acc.xi == doctest::Approx(0.0));
  CHECK((acc.acc - eom_lab(free3, st.cfg.coords, st.vel)).norm() < 1e-12);
  // With forces present the inertial frame only differs by an angular acceleration.
  const ParticleSystem sys = trapped_three();
  const auto acc2 = eom_rotating(sys, chart, st.cfg.coords, st.vel, lz);
  CHECK((acc2.acc - eom_lab(sys, st.cfg.coords, st.vel) - acc2.xi_dot * cross_z(st.cfg.coords)).norm() <
        1e-12);
  CHECK(std::abs(linear_s(sys, chart, acc2.acc)) < 1e-12);
}

TEST_CASE("circular orbit is a rest point of the co-rotating frame") {
  const double m = 1.4, w = 0.9, x = 1.3;
  ParticleSystem one({m}, {}, BodyTerm{potentials::harmonic(w * w), true});
  LinearChart chart{Vec::Zero(1), Vec::Ones(1)};
  Vec r(2);
  r << x, 0.0;
  const double ell = m * w * x * x;
  const auto acc = eom_rotating(one, chart, r, Vec::Zero(2), ell);
  CHECK(acc.xi * acc.xi * m * x == doctest::Approx(m * w * w * x));
  CHECK(acc.acc.norm() < 1e-14);
}

TEST_CASE("momenta and hamiltonian in a linear gauge") {
  const ParticleSystem sys = trapped_three();
  std::mt19937_64 rng(5);
  const LinearChart chart{random_vec(rng, 3), random_vec(rng, 3)};
  for (int trial = 0; trial < 20; ++trial) {
    const Vec cfg_lab = random_vec(rng, 6), vel_lab = random_vec(rng, 6);
    const FrameState st = lab_to_body(sys, LinearGauge{chart}, cfg_lab, vel_lab);
    CHECK(std::abs(linear_s(sys, chart, st.vel)) < 1e-12);
    CHECK(st.ell_z == doctest::Approx(angular_momentum_lab(sys, cfg_lab, vel_lab)).epsilon(1e-12));
    const Vec p = momenta_linear(sys, chart, st.cfg.coords, st.vel, st.xi);
    CHECK(std::abs(linear_s(sys, chart, (p.array() / sys.coord_masses().array()).matrix())) < 1e-12);
    const double h = hamiltonian_classical(sys, chart, st.cfg.coords, p, st.ell_z);
    const double e = kinetic_energy(sys, vel_lab) + potential_energy(sys, cfg_lab);
    CHECK(h == doctest::Approx(e).epsilon(1e-10));
    const Vec p0 = momenta_linear(sys, chart, st.cfg.coords, st.vel, 0.0);
    CHECK((p0 - st.vel.cwiseProduct(sys.coord_masses())).norm() < 1e-14);
    CHECK(hamiltonian_classical(sys, chart, st.cfg.coords, Vec::Zero(6), 0.0) ==
          doctest::Approx(potential_energy(sys, st.cfg.coords)));
  }
  CHECK_THROWS_AS(momenta_linear(sys, chart, random_vec(rng, 6), random_vec(rng, 6), 0.3), Error);
}

TEST_CASE("single particle hamiltonian is the polar one") {
  const double m = 1.6, w = 0.8;
  ParticleSystem one({m}, {}, BodyTerm{potentials::harmonic(w * w), true});
  LinearChart chart{Vec::Zero(1), Vec::Ones(1)};
  Vec r(2), v(2);
  r << 0.9, 0.0;
  v << 0.35, 0.0;
  const double ell = 1.7;
  const double xi = xi_of_state(one, r, v, ell);
  const Vec p = momenta_linear(one, chart, r, v, xi);
  CHECK(p(1) == doctest::Approx(0.0));
  CHECK(residual_angular_momentum(r, p) == doctest::Approx(0.0));
  const double expect = p(0) * p(0) / (2 * m) + ell * ell / (2 * m * r(0) * r(0)) + 0.5 * m * w * w * r(0) * r(0);
  CHECK(hamiltonian_classical(one, chart, r, p, ell) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("principal axes momenta and hamiltonian") {
  const ParticleSystem sys = trapped_three();
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec cfg_lab = random_vec(rng, 6), vel_lab = random_vec(rng, 6);
    const FrameState st = lab_to_body(sys, PrincipalAxesGauge{}, cfg_lab, vel_lab);
    double ds = 0.0, ds_star = 0.0;
    const Vec p = momenta_quadratic(sys, st.cfg.coords, st.vel, st.xi);
    for (int a = 0; a < 3; ++a) {
      const double x = st.cfg.coords(2 * a), y = st.cfg.coords(2 * a + 1);
      ds += sys.mass(a) * (x * st.vel(2 * a + 1) + y * st.vel(2 * a));
      ds_star += x * p(2 * a + 1) + y * p(2 * a);
    }
    CHECK(std::abs(ds) < 1e-12);
    CHECK(std::abs(ds_star) < 1e-12);
    const double e = kinetic_energy(sys, vel_lab) + potential_energy(sys, cfg_lab);
    CHECK(hamiltonian_classical_quadratic(sys, st.cfg.coords, p, st.ell_z) == doctest::Approx(e).epsilon(1e-10));
  }
}

TEST_CASE("free particle moves on a straight line") {
  ParticleSystem one({1.0});
  Vec r(2), v(2);
  r << 0.1, 0.2;
  v << 0.3, -0.4;
  IntegrationOptions opt;
  opt.samples = 11;
  const auto traj = integrate_lab(one, r, v, 5.0, opt);
  CHECK((traj.states.back().cfg.coords - (r + 5.0 * v)).norm() < 1e-10);
}

TEST_CASE("spring pair oscillates at the normal-mode frequency") {
  const double m1 = 1.0, m2 = 3.0, k = 2.0, a = 1.0, mu = m1 * m2 / (m1 + m2);
  ParticleSystem pair({m1, m2}, {{potentials::spring(k, a), {}}});
  const double w = std::sqrt(k / mu), period = 2 * pi / w;
  Vec r(4), v = Vec::Zero(4);
  r << 1.05 * a * m2 / (m1 + m2), 0.0, -1.05 * a * m1 / (m1 + m2), 0.0;
  IntegrationOptions opt;
  opt.samples = 4001;
  opt.ode.rtol = 1e-11;
  opt.ode.atol = 1e-13;
  const auto traj = integrate_lab(pair, r, v, 5 * period, opt);
  // Count downward zero crossings of d - a and interpolate their times.
  std::vector<double> crossings;
  double prev = 0.05 * a;
  for (std::size_t k2 = 1; k2 < traj.states.size(); ++k2) {
    const Vec& c = traj.states[k2].cfg.coords;
    const double cur = (c.segment<2>(0) - c.segment<2>(2)).norm() - a;
    if (prev > 0.0 && cur <= 0.0)
      crossings.push_back(traj.times[k2 - 1] + (traj.times[k2] - traj.times[k2 - 1]) * prev / (prev - cur));
    prev = cur;
  }
  REQUIRE(crossings.size() >= 5);
  const double measured = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  CHECK(std::abs(measured / period - 1.0) < 1e-3);
}

TEST_CASE("lab angular momentum drift over T=10") {
  const ParticleSystem sys = trapped_three();
  std::mt19937_64 rng(7);
  IntegrationOptions opt;
  opt.ode.rtol = 1e-11;
  opt.ode.atol = 1e-13;
  const auto traj = integrate_lab(sys, random_vec(rng, 6), random_vec(rng, 6), 10.0, opt);
  double drift = 0.0;
  for (double l : traj.angular_momentum) drift = std::max(drift, std::abs(l - traj.angular_momentum[0]));
  CHECK(drift < 1e-9);
}

TEST_CASE("direct body-frame integration agrees with the mapped lab route") {
  const ParticleSystem sys = trapped_three();
  std::mt19937_64 rng(8);
  const LinearChart chart{random_vec(rng, 3), random_vec(rng, 3)};
  IntegrationOptions opt;
  opt.ode.rtol = 1e-11;
  opt.ode.atol = 1e-13;
  const Vec r = random_vec(rng, 6), v = random_vec(rng, 6, 0.5);
  const auto rep = gauge_equivalence_experiment(sys, LinearGauge{chart}, r, v, 10.0, opt);
  CHECK(rep.max_body_error < 1e-6);
  CHECK(rep.max_theta_error < 1e-6);
  CHECK(rep.body_angular_momentum_drift < 1e-9);
  CHECK(rep.body_energy_drift < 1e-7);
  CHECK(rep.max_gauge_residual < 1e-10);

  // Rotating the chart by phi shifts the angle by -phi and turns the body frame by -phi.
  const double phi = 0.6;
  LinearChart turned{Vec(3), Vec(3)};
  for (int a = 0; a < 3; ++a) {
    Vec ab(2);
    ab << chart.A(a), chart.B(a);
    const Vec t = rotate(-phi, ab);
    turned.A(a) = t(0);
    turned.B(a) = t(1);
  }
  const auto rep2 = gauge_equivalence_experiment(sys, LinearGauge{turned}, r, v, 10.0, opt);
  double dtheta = 0.0, dbody = 0.0;
  for (std::size_t k = 0; k < rep.lab_route.states.size(); ++k) {
    dtheta = std::max(dtheta, std::abs(wrap_angle(rep2.lab_route.theta_unwound[k] -
                                                  rep.lab_route.theta_unwound[k] + phi, 2 * pi)));
    dbody = std::max(dbody, (rep2.lab_route.states[k].cfg.coords -
                             rotate(-phi, rep.lab_route.states[k].cfg.coords)).norm());
  }
  CHECK(dtheta < 1e-10);
  CHECK(dbody < 1e-10);
}

TEST_CASE("rigidly rotating spring pair is a fixed point of the eckart frame") {
  const double m1 = 1.0, m2 = 2.0, k = 4.0, a = 1.0, d = 1.2, mu = m1 * m2 / (m1 + m2);
  ParticleSystem pair({m1, m2}, {{potentials::spring(k, a), {}}});
  const double w = std::sqrt(k * (d - a) / (mu * d));
  const auto shape = two_body_equilibrium(m1, m2, a);
  const auto stretched = two_body_equilibrium(m1, m2, d);
  const Vec r = rotate(-0.3, stretched.Z);
  const Vec v = w * cross_z(r);
  IntegrationOptions opt;
  opt.ode.rtol = 1e-11;
  opt.ode.atol = 1e-13;
  const auto rep = gauge_equivalence_experiment(pair, EckartGauge{shape}, r, v, 10.0, opt);
  for (const auto& st : rep.direct_route.states) CHECK((st.cfg.coords - stretched.Z).norm() < 1e-8);
  CHECK(rep.max_body_error < 1e-8);
  CHECK(std::abs(rep.direct_route.theta_unwound.back() - rep.direct_route.theta_unwound.front() - 10.0 * w) < 1e-7);
}

TEST_CASE("integrate dispatches on the frame") {
  const ParticleSystem sys = trapped_three();
  std::mt19937_64 rng(9);
  FrameState init;
  init.cfg = {random_vec(rng, 6), Frame::Lab};
  init.vel = random_vec(rng, 6, 0.3);
  IntegrationOptions opt;
  opt.samples = 51;
  const auto pa = integrate(sys, GaugeChart{PrincipalAxesGauge{}}, init, 2.0, opt);
  for (std::size_t k = 0; k < pa.states.size(); ++k) {
    CHECK(pa.gauge_residual[k] < 1e-10);
    CHECK(std::abs(pa.angular_momentum[k] - pa.angular_momentum[0]) < 1e-7);
  }
  const auto lab = integrate(sys, std::nullopt, init, 2.0, opt);
  CHECK(lab.frame == Frame::Lab);
}
