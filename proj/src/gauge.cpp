#include "rotframe/gauge.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rotframe/error.hpp"

namespace rotframe {

namespace {

constexpr double kSingularRel = 1e-10;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

GaugeKind kind_of(const GaugeChart& gauge) noexcept {
  return std::visit(overloaded{[](const LinearGauge&) { return GaugeKind::Linear; },
                               [](const LinearCmGauge&) { return GaugeKind::LinearCm; },
                               [](const PrincipalAxesGauge&) { return GaugeKind::PrincipalAxes; },
                               [](const EckartGauge&) { return GaugeKind::Eckart; }},
                    gauge);
}

std::string_view to_string(GaugeKind kind) noexcept {
  switch (kind) {
    case GaugeKind::Linear: return "linear";
    case GaugeKind::LinearCm: return "linear_cm";
    case GaugeKind::PrincipalAxes: return "principal_axes";
    case GaugeKind::Eckart: return "eckart";
  }
  return "unknown";
}

GaugeKind gauge_kind_from_string(std::string_view name) {
  if (name == "linear") return GaugeKind::Linear;
  if (name == "linear_cm") return GaugeKind::LinearCm;
  if (name == "principal_axes") return GaugeKind::PrincipalAxes;
  if (name == "eckart") return GaugeKind::Eckart;
  throw Error(ErrorKind::InvalidChart, "unknown gauge '" + std::string(name) +
                                           "' (expected linear, linear_cm, principal_axes, eckart)");
}

bool is_linear(GaugeKind kind) noexcept { return kind != GaugeKind::PrincipalAxes; }

bool has_cm_condition(GaugeKind kind) noexcept {
  return kind == GaugeKind::LinearCm || kind == GaugeKind::Eckart;
}

LinearChart linear_chart_of(const GaugeChart& gauge) {
  return std::visit(
      overloaded{[](const LinearGauge& g) { return g.chart; },
                 [](const LinearCmGauge& g) { return g.chart; },
                 [](const PrincipalAxesGauge&) -> LinearChart {
                   throw Error(ErrorKind::InvalidChart, "principal axes gauge has no linear chart");
                 },
                 [](const EckartGauge& g) { return eckart_chart(g.shape); }},
      gauge);
}

double gauge_period(GaugeKind kind) noexcept {
  return kind == GaugeKind::PrincipalAxes ? std::numbers::pi : 2.0 * std::numbers::pi;
}

void validate_gauge(const ParticleSystem& sys, const GaugeChart& gauge) {
  switch (kind_of(gauge)) {
    case GaugeKind::Linear: validate_chart(sys, linear_chart_of(gauge), false); break;
    case GaugeKind::LinearCm: validate_chart(sys, linear_chart_of(gauge), true); break;
    case GaugeKind::Eckart:
      validate_equilibrium(sys, std::get<EckartGauge>(gauge).shape);
      validate_chart(sys, linear_chart_of(gauge), true);
      break;
    case GaugeKind::PrincipalAxes: break;
  }
}

Vec rotate(double theta, const Vec& cfg) {
  const double c = std::cos(theta), s = std::sin(theta);
  Vec out(cfg.size());
  for (Eigen::Index i = 0; i + 1 < cfg.size(); i += 2) {
    out(i) = c * cfg(i) + s * cfg(i + 1);
    out(i + 1) = -s * cfg(i) + c * cfg(i + 1);
  }
  return out;
}

GaugeFixResult fix_linear(const ParticleSystem& sys, const Vec& cfg_lab, const LinearChart& chart) {
  validate_chart(sys, chart);
  const auto lab = shape_linear(sys, cfg_lab, chart);
  const double inertia = moment_of_inertia(sys, cfg_lab);
  const double size = std::hypot(lab.s, lab.q);
  if (!(size > kSingularRel * std::sqrt(lab.r2 * inertia)))
    throw Error(ErrorKind::GaugeSingular, "s and q vanish together; the gauge angle is undefined");
  double theta = std::atan2(lab.s, lab.q);
  if (theta <= -std::numbers::pi) theta = std::numbers::pi;
  GaugeFixResult out;
  out.theta = theta;
  out.body = {rotate(theta, cfg_lab), Frame::Body};
  const auto body = shape_linear(sys, out.body.coords, chart);
  out.residual = body.s;
  out.jacobian = body.q;
  return out;
}

GaugeFixResult fix_principal_axes(const ParticleSystem& sys, const Vec& cfg_lab) {
  const auto lab = shape_quadratic(sys, cfg_lab);
  if (!(std::hypot(lab.S, lab.Q) > kSingularRel * lab.R2))
    throw Error(ErrorKind::GaugeSingular, "S and Q vanish together; the principal axes are undefined");
  double theta = 0.5 * std::atan2(lab.S, lab.Q);
  if (theta < 0.0) {
    // Roundoff-level negatives belong to the already-fixed branch.
    theta = theta > -4.0 * std::numeric_limits<double>::epsilon() ? 0.0 : theta + std::numbers::pi;
  }
  GaugeFixResult out;
  out.theta = theta;
  out.body = {rotate(theta, cfg_lab), Frame::Body};
  const auto body = shape_quadratic(sys, out.body.coords);
  out.residual = body.S;
  out.jacobian = body.Q;
  return out;
}

GaugeFixResult fix_with_cm(const ParticleSystem& sys, const Vec& cfg_lab, const LinearChart& chart) {
  validate_chart(sys, chart, true);
  const Vec2 c = center_of_mass(sys, cfg_lab);
  Vec shifted = cfg_lab;
  for (int a = 0; a < sys.size(); ++a) shifted.segment<2>(x_index(a)) -= c;
  GaugeFixResult out = fix_linear(sys, shifted, chart);
  out.cm_residual = center_of_mass(sys, out.body.coords).norm();
  return out;
}

GaugeFixResult fix_gauge(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg_lab) {
  switch (kind_of(gauge)) {
    case GaugeKind::Linear: return fix_linear(sys, cfg_lab, linear_chart_of(gauge));
    case GaugeKind::PrincipalAxes: return fix_principal_axes(sys, cfg_lab);
    case GaugeKind::LinearCm:
    case GaugeKind::Eckart: return fix_with_cm(sys, cfg_lab, linear_chart_of(gauge));
  }
  throw Error(ErrorKind::InvalidChart, "unhandled gauge kind");
}

double wrap_angle(double angle, double period) {
  double w = std::remainder(angle, period);  // [-P/2, P/2]
  if (w <= -0.5 * period) w += period;
  return w;
}

BranchTracker::BranchTracker(double period, double guard) : period_(period), guard_(guard) {
  if (!(period > 0.0) || !(guard >= 0.0) || guard >= 0.5 * period)
    throw Error(ErrorKind::InvalidArgument, "branch tracker needs period > 0 and 0 <= guard < period/2");
}

double BranchTracker::unwind(double theta_principal) {
  if (!started_) {
    started_ = true;
    last_principal_ = last_theta_ = theta_principal;
    winding_ = 0;
    return last_theta_;
  }
  const double step = wrap_angle(theta_principal - last_principal_, period_);
  if (std::abs(step) > 0.5 * period_ - guard_)
    throw Error(ErrorKind::StepTooLarge, "gauge angle jumped by " + std::to_string(step) +
                                             ", too close to half a period to resolve the branch");
  last_theta_ += step;
  last_principal_ = theta_principal;
  winding_ = std::lround((last_theta_ - theta_principal) / period_);
  return last_theta_;
}

}  // namespace rotframe
