#include "rotframe/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rotframe/error.hpp"

namespace rotframe {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

Dopri5::Dopri5(OdeRhs rhs, OdeOptions options) : rhs_(std::move(rhs)), opt_(options) {
  if (!(opt_.rtol > 0.0) || !(opt_.atol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "integrator tolerances must be positive");
}

double Dopri5::error_norm(const Vec& y0, const Vec& y1, const Vec& err) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    acc += (err(i) / sc) * (err(i) / sc);
  }
  return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(err.size(), 1)));
}

double Dopri5::initial_step(double t, const Vec& y, const Vec& f0) const {
  if (opt_.initial_step > 0.0) return opt_.initial_step;
  Vec scale = (opt_.atol + opt_.rtol * y.array().abs()).matrix();
  const double d0 = std::sqrt((y.array() / scale.array()).square().mean());
  const double d1 = std::sqrt((f0.array() / scale.array()).square().mean());
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  Vec y1 = y + h0 * f0, f1(y.size());
  rhs_(t + h0, y1, f1);
  const double d2 = std::sqrt(((f1 - f0).array() / scale.array()).square().mean()) / h0;
  const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                               : std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min({100.0 * h0, h1, opt_.max_step});
}

void Dopri5::advance(double& t, Vec& y, double t_end, const StepHook& hook) {
  if (t_end < t) throw Error(ErrorKind::InvalidArgument, "integration runs forward in time only");
  const Eigen::Index n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);
  long steps = 0;
  while (t < t_end) {
    rhs_(t, y, k1);
    if (h_ <= 0.0) h_ = initial_step(t, y, k1);
    bool last = false;
    double h = std::min(h_, opt_.max_step);
    if (t + h >= t_end || t_end - (t + h) < 1e-12 * std::abs(t_end)) {
      h = t_end - t;
      last = true;
    }
    while (true) {
      if (++steps > opt_.max_steps) throw Error(ErrorKind::StepFailure, "step budget exhausted");
      tmp = y + h * a21 * k1;
      rhs_(t + c2 * h, tmp, k2);
      tmp = y + h * (a31 * k1 + a32 * k2);
      rhs_(t + c3 * h, tmp, k3);
      tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs_(t + c4 * h, tmp, k4);
      tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs_(t + c5 * h, tmp, k5);
      tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs_(t + h, tmp, k6);
      y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs_(t + h, y_new, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = error_norm(y, y_new, err);
      if (!std::isfinite(en)) {
        h *= 0.25;
        last = false;
        ++rejected_;
      } else if (en <= 1.0) {
        const double grow = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        t = last ? t_end : t + h;
        y = y_new;
        ++accepted_;
        // Keep the controller's step even when the final step was clipped.
        h_ = last ? std::max(h_, h * grow) : h * grow;
        if (hook) hook(t, y);
        break;
      } else {
        h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
        last = false;
        ++rejected_;
      }
      if (h < opt_.min_step)
        throw Error(ErrorKind::StepFailure, "step size fell below " + std::to_string(opt_.min_step) +
                                                " at t=" + std::to_string(t));
    }
  }
}

}  // namespace rotframe
