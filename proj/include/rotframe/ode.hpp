#pragma once

#include <functional>
#include <limits>

#include "rotframe/model.hpp"

namespace rotframe {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-11;
  double initial_step = 0.0;  // 0 selects a step from the local derivative scale
  double min_step = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 10'000'000;
};

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
// Called after every accepted step; may modify y in place (constraint projection).
using StepHook = std::function<void(double t, Vec& y)>;

// Dormand-Prince 5(4) embedded pair with standard step-size control.
class Dopri5 {
 public:
  Dopri5(OdeRhs rhs, OdeOptions options);

  // Advance (t, y) to t_end exactly; the last step is shortened to land on t_end.
  void advance(double& t, Vec& y, double t_end, const StepHook& hook = {});

  long accepted_steps() const noexcept { return accepted_; }
  long rejected_steps() const noexcept { return rejected_; }

 private:
  double error_norm(const Vec& y0, const Vec& y1, const Vec& err) const;
  double initial_step(double t, const Vec& y, const Vec& f0) const;

  OdeRhs rhs_;
  OdeOptions opt_;
  double h_ = 0.0;
  long accepted_ = 0;
  long rejected_ = 0;
};

}  // namespace rotframe
