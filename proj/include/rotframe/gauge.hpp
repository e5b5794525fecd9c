#pragma once

#include <string_view>
#include <variant>

#include "rotframe/model.hpp"

namespace rotframe {

struct LinearGauge {
  LinearChart chart;
};
struct LinearCmGauge {
  LinearChart chart;
};
struct PrincipalAxesGauge {};
struct EckartGauge {
  EquilibriumShape shape;
};

using GaugeChart = std::variant<LinearGauge, LinearCmGauge, PrincipalAxesGauge, EckartGauge>;

enum class GaugeKind { Linear, LinearCm, PrincipalAxes, Eckart };

GaugeKind kind_of(const GaugeChart& gauge) noexcept;
std::string_view to_string(GaugeKind kind) noexcept;
GaugeKind gauge_kind_from_string(std::string_view name);
bool is_linear(GaugeKind kind) noexcept;
bool has_cm_condition(GaugeKind kind) noexcept;
// Chart coefficients behind a linear, CM or Eckart gauge; InvalidChart for principal axes.
LinearChart linear_chart_of(const GaugeChart& gauge);
// Period of the gauge angle: 2 pi for linear gauges, pi for principal axes.
double gauge_period(GaugeKind kind) noexcept;
void validate_gauge(const ParticleSystem& sys, const GaugeChart& gauge);

struct GaugeFixResult {
  double theta = 0.0;
  Configuration body;
  double residual = 0.0;      // s or S at the body configuration
  double jacobian = 0.0;      // q or Q at the body configuration
  double cm_residual = 0.0;   // |C| when the gauge fixes the center of mass
};

// Passive rotation, per particle (X, Y) = (c x + s y, -s x + c y).
Vec rotate(double theta, const Vec& cfg);

GaugeFixResult fix_linear(const ParticleSystem& sys, const Vec& cfg_lab, const LinearChart& chart);
GaugeFixResult fix_principal_axes(const ParticleSystem& sys, const Vec& cfg_lab);
GaugeFixResult fix_with_cm(const ParticleSystem& sys, const Vec& cfg_lab, const LinearChart& chart);
GaugeFixResult fix_gauge(const ParticleSystem& sys, const GaugeChart& gauge, const Vec& cfg_lab);

// Wrap into (-period/2, period/2].
double wrap_angle(double angle, double period);

// Continuous gauge angle along a trajectory.
class BranchTracker {
 public:
  explicit BranchTracker(double period, double guard = 0.1);

  double unwind(double theta_principal);
  double last_theta() const noexcept { return last_theta_; }
  long winding() const noexcept { return winding_; }
  double period() const noexcept { return period_; }
  bool started() const noexcept { return started_; }

 private:
  double period_;
  double guard_;
  double last_principal_ = 0.0;
  double last_theta_ = 0.0;
  long winding_ = 0;
  bool started_ = false;
};

}  // namespace rotframe
