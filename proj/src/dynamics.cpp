#include "rotframe/dynamics.hpp"

#include <cmath>

#include "rotframe/error.hpp"

namespace rotframe {

namespace {

constexpr double kDegenerateRel = 1e-10;

void require_linear(GaugeKind kind) {
  if (!is_linear(kind))
    throw Error(ErrorKind::InvalidChart, "direct body-frame integration needs a linear gauge");
}

void check_on_linear_surface(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg,
                             double tol) {
  const auto sv = shape_linear(sys, cfg, chart);
  const double scale = std::sqrt(sv.r2 * std::max(moment_of_inertia(sys, cfg), 1e-300));
  if (std::abs(sv.s) > tol * scale)
    throw Error(ErrorKind::OffSurface, "configuration violates the linear gauge condition (s=" +
                                           std::to_string(sv.s) + ")");
}

void check_on_quadratic_surface(const ParticleSystem& sys, const Vec& cfg, double tol) {
  const auto sq = shape_quadratic(sys, cfg);
  if (std::abs(sq.S) > tol * std::max(sq.R2, 1e-300))
    throw Error(ErrorKind::OffSurface, "configuration violates the principal axes condition (S=" +
                                           std::to_string(sq.S) + ")");
}

// Columns span the gauge-constraint normals in coordinate space.
Mat constraint_normals(const ParticleSystem& sys, const LinearChart& chart, bool with_cm) {
  Mat g = Mat::Zero(sys.dim(), with_cm ? 3 : 1);
  for (int a = 0; a < sys.size(); ++a) {
    g(x_index(a), 0) = sys.mass(a) * chart.A(a);
    g(y_index(a), 0) = sys.mass(a) * chart.B(a);
    if (with_cm) {
      g(x_index(a), 1) = sys.mass(a);
      g(y_index(a), 2) = sys.mass(a);
    }
  }
  return g;
}

Vec2 cm_velocity(const ParticleSystem& sys, const Vec& vel) {
  return total_momentum_lab(sys, vel) / sys.total_mass();
}

}  // namespace

Vec eom_lab(const ParticleSystem& sys, const Vec& cfg, const Vec& vel) {
  if (vel.size() != cfg.size()) throw Error(ErrorKind::DimensionMismatch, "velocity size mismatch");
  return (-potential_gradient(sys, cfg).array() / sys.coord_masses().array()).matrix();
}

double xi_of_state(const ParticleSystem& sys, const Vec& cfg_body, const Vec& vel_body, double ell_z) {
  const double inertia = moment_of_inertia(sys, cfg_body);
  if (!(inertia > kDegenerateRel * sys.total_mass()))
    throw Error(ErrorKind::DegenerateInertia, "moment of inertia vanishes");
  return (angular_momentum_lab(sys, cfg_body, vel_body) - ell_z) / inertia;
}

RotatingAcceleration eom_rotating(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg,
                                  const Vec& vel, double ell_z) {
  RotatingAcceleration out;
  out.xi = xi_of_state(sys, cfg, vel, ell_z);
  const double q = linear_q(sys, chart, cfg);
  const double scale = std::sqrt(chart_norm2(sys, chart) * moment_of_inertia(sys, cfg));
  if (!(std::abs(q) > kDegenerateRel * scale))
    throw Error(ErrorKind::GaugeSingular, "q vanishes on the gauge surface");
  const Vec force = (-potential_gradient(sys, cfg).array() / sys.coord_masses().array()).matrix();
  const Vec rest = 2.0 * out.xi * cross_z(vel) + out.xi * out.xi * cfg + force;
  // s(z^R) = q(R), so s(Rddot) = 0 fixes xi_dot.
  out.xi_dot = -linear_s(sys, chart, rest) / q;
  out.acc = rest + out.xi_dot * cross_z(cfg);
  return out;
}

Vec momenta_linear(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg, const Vec& vel,
                   double xi, double tol) {
  validate_chart(sys, chart);
  check_on_linear_surface(sys, chart, cfg, tol);
  const auto sv = shape_linear(sys, cfg, chart);
  const double ratio = sv.q / sv.r2;
  Vec p(sys.dim());
  for (int a = 0; a < sys.size(); ++a) {
    const double m = sys.mass(a), x = cfg(x_index(a)), y = cfg(y_index(a));
    p(x_index(a)) = m * vel(x_index(a)) + m * xi * (y + chart.A(a) * ratio);
    p(y_index(a)) = m * vel(y_index(a)) - m * xi * (x - chart.B(a) * ratio);
  }
  return p;
}

Vec momenta_quadratic(const ParticleSystem& sys, const Vec& cfg, const Vec& vel, double xi, double tol) {
  check_on_quadratic_surface(sys, cfg, tol);
  const auto sq = shape_quadratic(sys, cfg);
  if (!(sq.R2 > 0.0)) throw Error(ErrorKind::DegenerateInertia, "moment of inertia vanishes");
  const double k = 2.0 * sq.Q / sq.R2;
  Vec p(sys.dim());
  for (int a = 0; a < sys.size(); ++a) {
    const double m = sys.mass(a), x = cfg(x_index(a)), y = cfg(y_index(a));
    p(x_index(a)) = m * vel(x_index(a)) + xi * m * y * (1.0 + k);
    p(y_index(a)) = m * vel(y_index(a)) - xi * m * x * (1.0 - k);
  }
  return p;
}

double residual_angular_momentum(const Vec& cfg, const Vec& momenta) {
  double l = 0.0;
  for (Eigen::Index i = 0; i + 1 < cfg.size(); i += 2) l += cfg(i) * momenta(i + 1) - cfg(i + 1) * momenta(i);
  return l;
}

double hamiltonian_classical(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg,
                             const Vec& momenta, double ell_z, double tol) {
  validate_chart(sys, chart);
  check_on_linear_surface(sys, chart, cfg, tol);
  const auto sv = shape_linear(sys, cfg, chart);
  if (!(std::abs(sv.q) > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "q vanishes");
  const double lam = residual_angular_momentum(cfg, momenta);
  const double kin = 0.5 * (momenta.array().square() / sys.coord_masses().array()).sum();
  return kin + sv.r2 / (2.0 * sv.q * sv.q) * (ell_z - lam) * (ell_z - lam) + potential_energy(sys, cfg);
}

double hamiltonian_classical_quadratic(const ParticleSystem& sys, const Vec& cfg, const Vec& momenta,
                                       double ell_z, double tol) {
  check_on_quadratic_surface(sys, cfg, tol);
  const auto sq = shape_quadratic(sys, cfg);
  if (!(std::abs(sq.Q) > 0.0)) throw Error(ErrorKind::DegenerateJacobian, "Q vanishes");
  const double lam = residual_angular_momentum(cfg, momenta);
  const double kin = 0.5 * (momenta.array().square() / sys.coord_masses().array()).sum();
  return kin + sq.R2 / (8.0 * sq.Q * sq.Q) * (ell_z - lam) * (ell_z - lam) + potential_energy(sys, cfg);
}

double rotating_energy(const ParticleSystem& sys, const Vec& cfg, const Vec& vel, double xi) {
  return kinetic_energy(sys, vel - xi * cross_z(cfg)) + potential_energy(sys, cfg);
}

FrameState lab_to_body(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg_lab,
                       const Vec& vel_lab) {
  const GaugeKind kind = kind_of(gauge);
  Vec cfg = cfg_lab, vel = vel_lab;
  if (has_cm_condition(kind)) {
    const Vec2 c = center_of_mass(sys, cfg_lab), cdot = cm_velocity(sys, vel_lab);
    for (int a = 0; a < sys.size(); ++a) {
      cfg.segment<2>(x_index(a)) -= c;
      vel.segment<2>(x_index(a)) -= cdot;
    }
  }
  const GaugeFixResult fixed = fix_gauge(sys, gauge, cfg);
  double theta_dot = 0.0;
  if (kind == GaugeKind::PrincipalAxes) {
    const auto sq = shape_quadratic(sys, cfg);
    double s_dot = 0.0, q_dot = 0.0;
    for (int a = 0; a < sys.size(); ++a) {
      const double m = sys.mass(a), x = cfg(x_index(a)), y = cfg(y_index(a));
      const double vx = vel(x_index(a)), vy = vel(y_index(a));
      s_dot += m * (vx * y + x * vy);
      q_dot += m * (x * vx - y * vy);
    }
    theta_dot = 0.5 * (sq.Q * s_dot - sq.S * q_dot) / (sq.S * sq.S + sq.Q * sq.Q);
  } else {
    const LinearChart chart = linear_chart_of(gauge);
    const double s = linear_s(sys, chart, cfg), q = linear_q(sys, chart, cfg);
    const double s_dot = linear_s(sys, chart, vel), q_dot = linear_q(sys, chart, vel);
    theta_dot = (q * s_dot - s * q_dot) / (s * s + q * q);
  }
  FrameState out;
  out.cfg = fixed.body;
  out.xi = -theta_dot;
  out.vel = rotate(fixed.theta, vel) + out.xi * cross_z(out.cfg.coords);
  out.theta = fixed.theta;
  out.ell_z = angular_momentum_lab(sys, out.cfg.coords, out.vel) -
              out.xi * moment_of_inertia(sys, out.cfg.coords);
  return out;
}

namespace {

std::vector<double> time_grid(double duration, int samples) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two output samples");
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidArgument, "duration must be positive");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) t[k] = duration * k / (samples - 1);
  t.back() = duration;
  return t;
}

}  // namespace

Trajectory integrate_lab(const ParticleSystem& sys, const Vec& cfg0, const Vec& vel0, double duration,
                         const IntegrationOptions& options) {
  const Eigen::Index n = sys.dim();
  if (cfg0.size() != n || vel0.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "initial state size mismatch");
  Dopri5 solver(
      [&sys, n](double, const Vec& y, Vec& dy) {
        dy.resize(2 * n);
        dy.head(n) = y.segment(n, n);
        dy.tail(n) = eom_lab(sys, y.head(n), y.segment(n, n));
      },
      options.ode);
  Trajectory traj;
  traj.frame = Frame::Lab;
  Vec y(2 * n);
  y << cfg0, vel0;
  double t = 0.0;
  for (double target : time_grid(duration, options.samples)) {
    solver.advance(t, y, target);
    FrameState st;
    st.cfg = {y.head(n), Frame::Lab};
    st.vel = y.tail(n);
    st.ell_z = angular_momentum_lab(sys, st.cfg.coords, st.vel);
    traj.times.push_back(t);
    traj.angular_momentum.push_back(st.ell_z);
    traj.energy.push_back(kinetic_energy(sys, st.vel) + potential_energy(sys, st.cfg.coords));
    traj.gauge_residual.push_back(0.0);
    traj.theta_unwound.push_back(0.0);
    traj.states.push_back(std::move(st));
  }
  return traj;
}

Trajectory integrate_rotating(const ParticleSystem& sys, const GaugeChart& gauge,
                              const FrameState& initial, double duration,
                              const IntegrationOptions& options) {
  const GaugeKind kind = kind_of(gauge);
  require_linear(kind);
  validate_gauge(sys, gauge);
  const LinearChart chart = linear_chart_of(gauge);
  const bool with_cm = has_cm_condition(kind);
  const Eigen::Index n = sys.dim();
  if (initial.cfg.coords.size() != n || initial.vel.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "initial state size mismatch");
  if (with_cm && !sys.translation_invariant())
    throw Error(ErrorKind::InvalidArgument, "center-of-mass gauges need a translation invariant system");

  const Mat g = constraint_normals(sys, chart, with_cm);
  const Mat projector = Mat::Identity(n, n) - g * (g.transpose() * g).ldlt().solve(g.transpose());
  const double ell = initial.ell_z;
  const double scale = std::sqrt(chart_norm2(sys, chart));

  auto residual = [&](const Vec& cfg, const Vec& vel) {
    double r = std::abs(linear_s(sys, chart, cfg)) + std::abs(linear_s(sys, chart, vel));
    if (with_cm) r += center_of_mass(sys, cfg).norm() + cm_velocity(sys, vel).norm();
    return r;
  };
  {
    const double inertia = moment_of_inertia(sys, initial.cfg.coords);
    const double tol = 1e3 * options.ode.atol;
    if (residual(initial.cfg.coords, initial.vel) > tol * scale * std::sqrt(std::max(inertia, 1.0)))
      throw Error(ErrorKind::OffSurface, "initial body state violates the gauge conditions");
  }

  Dopri5 solver(
      [&sys, &chart, n, ell](double, const Vec& y, Vec& dy) {
        const auto acc = eom_rotating(sys, chart, y.head(n), y.segment(n, n), ell);
        dy.resize(2 * n + 1);
        dy.head(n) = y.segment(n, n);
        dy.segment(n, n) = acc.acc;
        dy(2 * n) = -acc.xi;
      },
      options.ode);
  auto project = [&projector, n](double, Vec& y) {
    y.head(n) = projector * y.head(n);
    y.segment(n, n) = projector * y.segment(n, n);
  };

  Trajectory traj;
  traj.frame = Frame::Body;
  Vec y(2 * n + 1);
  y << initial.cfg.coords, initial.vel, initial.theta;
  project(0.0, y);
  double t = 0.0;
  for (double target : time_grid(duration, options.samples)) {
    solver.advance(t, y, target, project);
    FrameState st;
    st.cfg = {y.head(n), Frame::Body};
    st.vel = y.segment(n, n);
    st.ell_z = ell;
    st.xi = xi_of_state(sys, st.cfg.coords, st.vel, ell);
    st.theta = y(2 * n);
    traj.times.push_back(t);
    traj.theta_unwound.push_back(st.theta);
    traj.angular_momentum.push_back(angular_momentum_lab(sys, st.cfg.coords, st.vel) -
                                    st.xi * moment_of_inertia(sys, st.cfg.coords));
    traj.energy.push_back(rotating_energy(sys, st.cfg.coords, st.vel, st.xi));
    traj.gauge_residual.push_back(residual(st.cfg.coords, st.vel));
    traj.states.push_back(std::move(st));
  }
  return traj;
}

Trajectory map_to_body(const ParticleSystem& sys, const GaugeChart& gauge, const Trajectory& lab,
                       double unwind_guard) {
  const GaugeKind kind = kind_of(gauge);
  BranchTracker tracker(gauge_period(kind), unwind_guard);
  Trajectory out;
  out.frame = Frame::Body;
  for (std::size_t k = 0; k < lab.states.size(); ++k) {
    FrameState st = lab_to_body(sys, gauge, lab.states[k].cfg.coords, lab.states[k].vel);
    st.theta = tracker.unwind(st.theta);
    out.times.push_back(lab.times[k]);
    out.theta_unwound.push_back(st.theta);
    out.angular_momentum.push_back(st.ell_z);
    out.energy.push_back(rotating_energy(sys, st.cfg.coords, st.vel, st.xi));
    double r = 0.0;
    if (kind == GaugeKind::PrincipalAxes) {
      r = std::abs(shape_quadratic(sys, st.cfg.coords).S);
    } else {
      const LinearChart chart = linear_chart_of(gauge);
      r = std::abs(linear_s(sys, chart, st.cfg.coords)) + std::abs(linear_s(sys, chart, st.vel));
    }
    out.gauge_residual.push_back(r);
    out.states.push_back(std::move(st));
  }
  return out;
}

Trajectory integrate(const ParticleSystem& sys, const std::optional<GaugeChart>& frame,
                     const FrameState& initial, double duration, const IntegrationOptions& options) {
  if (!frame) return integrate_lab(sys, initial.cfg.coords, initial.vel, duration, options);
  if (kind_of(*frame) == GaugeKind::PrincipalAxes || initial.cfg.frame == Frame::Lab) {
    if (initial.cfg.frame != Frame::Lab)
      throw Error(ErrorKind::InvalidArgument, "principal axes runs start from a lab-frame state");
    if (kind_of(*frame) == GaugeKind::PrincipalAxes)
      return map_to_body(sys, *frame, integrate_lab(sys, initial.cfg.coords, initial.vel, duration, options),
                         options.unwind_guard);
    return integrate_rotating(sys, *frame, lab_to_body(sys, *frame, initial.cfg.coords, initial.vel),
                              duration, options);
  }
  return integrate_rotating(sys, *frame, initial, duration, options);
}

GaugeEquivalenceReport gauge_equivalence_experiment(const ParticleSystem& sys, const GaugeChart& gauge,
                                                    const Vec& cfg_lab, const Vec& vel_lab,
                                                    double duration, const IntegrationOptions& options) {
  require_linear(kind_of(gauge));
  GaugeEquivalenceReport rep;
  const Trajectory lab = integrate_lab(sys, cfg_lab, vel_lab, duration, options);
  rep.lab_route = map_to_body(sys, gauge, lab, options.unwind_guard);
  const FrameState start = lab_to_body(sys, gauge, cfg_lab, vel_lab);
  rep.direct_route = integrate_rotating(sys, gauge, start, duration, options);

  for (std::size_t k = 0; k < lab.states.size(); ++k) {
    rep.lab_angular_momentum_drift =
        std::max(rep.lab_angular_momentum_drift, std::abs(lab.angular_momentum[k] - lab.angular_momentum[0]));
    rep.lab_energy_drift = std::max(rep.lab_energy_drift, std::abs(lab.energy[k] - lab.energy[0]));
    const FrameState& a = rep.lab_route.states[k];
    const FrameState& b = rep.direct_route.states[k];
    rep.max_body_error =
        std::max(rep.max_body_error, (a.cfg.coords - b.cfg.coords).cwiseAbs().maxCoeff());
    rep.max_theta_error = std::max(rep.max_theta_error, std::abs(a.theta - b.theta));
    rep.body_angular_momentum_drift = std::max(
        rep.body_angular_momentum_drift, std::abs(rep.direct_route.angular_momentum[k] - start.ell_z));
    rep.body_energy_drift = std::max(rep.body_energy_drift,
                                     std::abs(rep.direct_route.energy[k] - rep.direct_route.energy[0]));
    rep.max_gauge_residual = std::max(rep.max_gauge_residual, rep.direct_route.gauge_residual[k]);
  }
  return rep;
}

}  // namespace rotframe
