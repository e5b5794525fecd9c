#pragma once

#include <functional>
#include <vector>

#include "rotframe/wavefunction.hpp"

namespace rotframe {

struct QuadratureSpec {
  int order = 24;          // Gauss-Legendre nodes per dimension on the coarse level
  int levels = 2;          // each level doubles the node count
  double tol = 0.0;        // QuadratureNotConverged when the estimate exceeds tol*max(1,|I|); 0 disables
  int sobol_points = 1 << 15;  // coarse level above four dimensions
};

struct Box {
  Vec lo;
  Vec hi;
};

struct QuadratureResult {
  cplx value{0.0, 0.0};
  double error = 0.0;        // level difference plus a roundoff floor
  double abs_integral = 0.0; // integral of |f|, for relative statements
  long evaluations = 0;
};

using Integrand = std::function<cplx(const Vec&)>;
using VectorIntegrand = std::function<CVec(const Vec&)>;

// Tensor Gauss-Legendre up to four dimensions, Sobol points above.
QuadratureResult integrate_box(const Integrand& f, const Box& box, const QuadratureSpec& spec);
// Several integrals sharing the same nodes; one result per component of f.
std::vector<QuadratureResult> integrate_box(const VectorIntegrand& f, Eigen::Index components, const Box& box,
                                            const QuadratureSpec& spec);

// Largest |f| over a coarse grid on the faces of the box, relative to the largest |f| seen inside.
double boundary_fraction(const Integrand& f, const Box& box, int per_dim = 7);

}  // namespace rotframe
