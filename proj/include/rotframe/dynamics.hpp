#pragma once

#include <optional>
#include <vector>

#include "rotframe/gauge.hpp"
#include "rotframe/ode.hpp"

namespace rotframe {

// Positions and velocities in one frame. In a rotating frame xi is the frame
// angular velocity (minus the gauge-angle rate) and ell_z the total angular momentum.
struct FrameState {
  Configuration cfg;
  Vec vel;
  double xi = 0.0;
  double ell_z = 0.0;
  double theta = 0.0;
};

Vec eom_lab(const ParticleSystem& sys, const Vec& cfg, const Vec& vel);

// xi = (sum m R^Rdot - ell_z) / sum m R^2.
double xi_of_state(const ParticleSystem& sys, const Vec& cfg_body, const Vec& vel_body, double ell_z);

struct RotatingAcceleration {
  Vec acc;
  double xi = 0.0;
  double xi_dot = 0.0;
};

// Accelerations in a linear body frame. xi comes from the state, xi_dot from keeping
// the second derivative of the gauge functional at zero.
RotatingAcceleration eom_rotating(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg,
                                  const Vec& vel, double ell_z);

// Conjugate momenta; OffSurface if the configuration violates the gauge beyond tol.
Vec momenta_linear(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg, const Vec& vel,
                   double xi, double tol = 1e-9);
Vec momenta_quadratic(const ParticleSystem& sys, const Vec& cfg, const Vec& vel, double xi,
                      double tol = 1e-9);

// Residual angular momentum sum (X Pi_Y - Y Pi_X).
double residual_angular_momentum(const Vec& cfg, const Vec& momenta);

double hamiltonian_classical(const ParticleSystem& sys, const LinearChart& chart, const Vec& cfg,
                             const Vec& momenta, double ell_z, double tol = 1e-9);
double hamiltonian_classical_quadratic(const ParticleSystem& sys, const Vec& cfg, const Vec& momenta,
                                       double ell_z, double tol = 1e-9);

// Energy from covariant velocities: 1/2 sum m |Rdot - xi z^R|^2 + V.
double rotating_energy(const ParticleSystem& sys, const Vec& cfg, const Vec& vel, double xi);

// Maps a lab state through the gauge: R = U(theta) (r - c), Rdot = U (rdot - cdot) + xi z^R with
// xi = -theta_dot; the center is removed only for gauges that fix it.
FrameState lab_to_body(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg_lab,
                       const Vec& vel_lab);

struct Trajectory {
  std::vector<double> times;
  std::vector<FrameState> states;
  std::vector<double> theta_unwound;
  std::vector<double> angular_momentum;
  std::vector<double> energy;
  std::vector<double> gauge_residual;
  Frame frame = Frame::Lab;
};

struct IntegrationOptions {
  OdeOptions ode;
  int samples = 201;  // output grid including both end points
  double unwind_guard = 0.1;
};

Trajectory integrate_lab(const ParticleSystem& sys, const Vec& cfg0, const Vec& vel0, double duration,
                         const IntegrationOptions& options);

// Direct integration in a linear body frame, with per-step projection onto the gauge surface.
Trajectory integrate_rotating(const ParticleSystem& sys, const GaugeChart& gauge,
                              const FrameState& initial, double duration,
                              const IntegrationOptions& options);

// Body-frame samples of a lab trajectory, with the gauge angle unwound.
Trajectory map_to_body(const ParticleSystem& sys, const GaugeChart& gauge, const Trajectory& lab,
                       double unwind_guard = 0.1);

// frame = nullopt integrates in the lab. Principal axes runs go through the lab route.
Trajectory integrate(const ParticleSystem& sys, const std::optional<GaugeChart>& frame,
                     const FrameState& initial, double duration, const IntegrationOptions& options);

struct GaugeEquivalenceReport {
  double max_body_error = 0.0;
  double max_theta_error = 0.0;
  double lab_angular_momentum_drift = 0.0;
  double body_angular_momentum_drift = 0.0;  // |sum m R^Rdot - xi I - ell_z|
  double lab_energy_drift = 0.0;
  double body_energy_drift = 0.0;
  double max_gauge_residual = 0.0;
  Trajectory lab_route;
  Trajectory direct_route;
};

GaugeEquivalenceReport gauge_equivalence_experiment(const ParticleSystem& sys, const GaugeChart& gauge,
                                                    const Vec& cfg_lab, const Vec& vel_lab,
                                                    double duration, const IntegrationOptions& options);

}  // namespace rotframe
