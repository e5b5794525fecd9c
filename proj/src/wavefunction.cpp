#include "rotframe/wavefunction.hpp"

#include <cmath>

#include "rotframe/error.hpp"

namespace rotframe {

WaveFunction gaussian_bump(const BumpParams& p) {
  const Eigen::Index n = p.center.size();
  if (!(p.sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "bump width must be positive");
  const Vec lin_re = p.lin_re.size() ? p.lin_re : Vec::Zero(n);
  const Vec lin_im = p.lin_im.size() ? p.lin_im : Vec::Zero(n);
  const Mat quad = p.quad.size() ? p.quad : Mat::Zero(n, n);
  if (lin_re.size() != n || lin_im.size() != n || quad.rows() != n || quad.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "bump polynomial sizes differ from the center");
  const CVec lin = lin_re.cast<cplx>() + cplx(0.0, 1.0) * lin_im.cast<cplx>();
  const Mat sym = 0.5 * (quad + quad.transpose());
  return WaveFunction(n, [center = p.center, s2 = p.sigma * p.sigma, c0 = p.c0, lin, sym](const Vec& x, int order) {
    const Vec y = x - center;
    const double g = std::exp(-0.5 * y.squaredNorm() / s2);
    Jet j;
    // Plain bilinear product; Eigen's dot() would conjugate lin.
    const cplx lin_y = (lin.transpose() * y.cast<cplx>())(0);
    const cplx pval = c0 + lin_y + 0.5 * y.dot(sym * y);
    j.value = pval * g;
    if (order >= 1) {
      const CVec dp = lin + (sym * y).cast<cplx>();
      const Vec dg = -y / s2 * g;
      j.grad = dp * g + pval * dg.cast<cplx>();
      if (order >= 2) {
        const Eigen::Index n2 = x.size();
        const Mat d2g = (y * y.transpose() / (s2 * s2) - Mat::Identity(n2, n2) / s2) * g;
        j.hess = sym.cast<cplx>() * g + dp * dg.cast<cplx>().transpose() +
                 dg.cast<cplx>() * dp.transpose() + pval * d2g.cast<cplx>();
      }
    }
    return j;
  });
}

Jet jet_product(const Jet& f, const Jet& g, int order) {
  Jet out;
  out.value = f.value * g.value;
  if (order >= 1) out.grad = f.grad * g.value + f.value * g.grad;
  if (order >= 2)
    out.hess = f.hess * g.value + f.grad * g.grad.transpose() + g.grad * f.grad.transpose() + f.value * g.hess;
  return out;
}

Jet jet_phase(double phase, const Vec& grad, const Mat& hess, int order) {
  const cplx i(0.0, 1.0);
  Jet out;
  out.value = std::exp(i * phase);
  if (order >= 1) out.grad = i * out.value * grad.cast<cplx>();
  if (order >= 2)
    out.hess = out.value * (i * hess.cast<cplx>() - (grad * grad.transpose()).cast<cplx>());
  return out;
}

}  // namespace rotframe
