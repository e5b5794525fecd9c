#pragma once

#include <complex>
#include <functional>

#include "rotframe/model.hpp"

namespace rotframe {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Value with derivatives up to the requested order (gradient, Hessian).
struct Jet {
  cplx value{0.0, 0.0};
  CVec grad;
  CMat hess;
};

// Function of the full 2N body coordinates. Chart restrictions happen at the call site.
class WaveFunction {
 public:
  using Evaluator = std::function<Jet(const Vec& cfg, int order)>;

  WaveFunction() = default;
  WaveFunction(Eigen::Index dim, Evaluator eval, bool jacobian_absorbed = false)
      : dim_(dim), eval_(std::move(eval)), absorbed_(jacobian_absorbed) {}

  Eigen::Index dim() const noexcept { return dim_; }
  bool jacobian_absorbed() const noexcept { return absorbed_; }
  Jet operator()(const Vec& cfg, int order = 1) const { return eval_(cfg, order); }
  cplx value(const Vec& cfg) const { return eval_(cfg, 0).value; }

 private:
  Eigen::Index dim_ = 0;
  Evaluator eval_;
  bool absorbed_ = false;
};

// (c0 + (a + i b).y + y.K y / 2) exp(-|y|^2 / (2 sigma^2)), y = x - center.
struct BumpParams {
  Vec center;
  double sigma = 1.0;
  cplx c0{1.0, 0.0};
  Vec lin_re;
  Vec lin_im;
  Mat quad;
};

WaveFunction gaussian_bump(const BumpParams& params);

// Product and scalar helpers on jets.
Jet jet_product(const Jet& f, const Jet& g, int order);
// Jet of exp(i phase) given the real phase jet.
Jet jet_phase(double phase, const Vec& grad, const Mat& hess, int order);

}  // namespace rotframe
