#include "rotframe/quadrature.hpp"

#include <gsl/gsl_integration.h>
#include <gsl/gsl_qrng.h>

#include <cmath>
#include <memory>
#include <string>

#include "rotframe/error.hpp"

namespace rotframe {

namespace {

struct GlTable {
  std::vector<double> x;
  std::vector<double> w;
};

GlTable gauss_legendre(int n, double a, double b) {
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(static_cast<size_t>(n)), gsl_integration_glfixed_table_free);
  if (!table) throw Error(ErrorKind::InvalidArgument, "cannot build Gauss-Legendre table");
  GlTable t;
  for (int i = 0; i < n; ++i) {
    double xi = 0.0, wi = 0.0;
    gsl_integration_glfixed_point(a, b, static_cast<size_t>(i), &xi, &wi, table.get());
    t.x.push_back(xi);
    t.w.push_back(wi);
  }
  return t;
}

struct Sums {
  CVec value;
  Vec abs;
  long evaluations = 0;
};

Sums tensor_rule(const VectorIntegrand& f, Eigen::Index m, const Box& box, int n) {
  const Eigen::Index dim = box.lo.size();
  std::vector<GlTable> tables;
  for (Eigen::Index d = 0; d < dim; ++d) tables.push_back(gauss_legendre(n, box.lo(d), box.hi(d)));
  Sums r{CVec::Zero(m), Vec::Zero(m), 0};
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Vec x(dim);
  while (true) {
    double w = 1.0;
    for (Eigen::Index d = 0; d < dim; ++d) {
      x(d) = tables[d].x[idx[d]];
      w *= tables[d].w[idx[d]];
    }
    const CVec v = f(x);
    r.value += w * v;
    r.abs += w * v.cwiseAbs();
    ++r.evaluations;
    Eigen::Index d = 0;
    for (; d < dim; ++d) {
      if (++idx[d] < n) break;
      idx[d] = 0;
    }
    if (d == dim) break;
  }
  return r;
}

Sums sobol_rule(const VectorIntegrand& f, Eigen::Index m, const Box& box, int points) {
  const Eigen::Index dim = box.lo.size();
  std::unique_ptr<gsl_qrng, decltype(&gsl_qrng_free)> gen(gsl_qrng_alloc(gsl_qrng_sobol, static_cast<unsigned>(dim)),
                                                          gsl_qrng_free);
  if (!gen) throw Error(ErrorKind::InvalidArgument, "Sobol sequence unavailable in this dimension");
  const Vec span = box.hi - box.lo;
  const double volume = span.prod();
  std::vector<double> u(static_cast<std::size_t>(dim));
  Sums r{CVec::Zero(m), Vec::Zero(m), 0};
  Vec x(dim);
  // Skip the corner point, which sits on the boundary.
  gsl_qrng_get(gen.get(), u.data());
  for (int k = 0; k < points; ++k) {
    gsl_qrng_get(gen.get(), u.data());
    for (Eigen::Index d = 0; d < dim; ++d) x(d) = box.lo(d) + span(d) * u[d];
    const CVec v = f(x);
    r.value += v;
    r.abs += v.cwiseAbs();
    ++r.evaluations;
  }
  r.value *= volume / points;
  r.abs *= volume / points;
  return r;
}

}  // namespace

std::vector<QuadratureResult> integrate_box(const VectorIntegrand& f, Eigen::Index components, const Box& box,
                                            const QuadratureSpec& spec) {
  const Eigen::Index dim = box.lo.size();
  if (dim < 1 || box.hi.size() != dim) throw Error(ErrorKind::DimensionMismatch, "box bounds differ in size");
  if ((box.hi - box.lo).minCoeff() <= 0.0) throw Error(ErrorKind::InvalidArgument, "empty integration box");
  if (spec.levels < 2) throw Error(ErrorKind::InvalidArgument, "error estimates need two levels");
  Sums prev, cur;
  long evals = 0;
  for (int level = 0; level < spec.levels; ++level) {
    prev = cur;
    cur = dim <= 4 ? tensor_rule(f, components, box, spec.order << level)
                   : sobol_rule(f, components, box, spec.sobol_points << level);
    evals += cur.evaluations;
  }
  std::vector<QuadratureResult> out;
  for (Eigen::Index c = 0; c < components; ++c) {
    QuadratureResult r;
    r.value = cur.value(c);
    r.abs_integral = cur.abs(c);
    r.evaluations = evals;
    // Summation roundoff bounds the attainable agreement between levels.
    const double floor = 1e-15 * std::sqrt(static_cast<double>(cur.evaluations)) * r.abs_integral;
    r.error = std::abs(cur.value(c) - prev.value(c)) + floor;
    if (spec.tol > 0.0 && r.error > spec.tol * std::max(1.0, std::abs(r.value)))
      throw Error(ErrorKind::QuadratureNotConverged,
                  "level difference " + std::to_string(r.error) + " exceeds tolerance");
    out.push_back(r);
  }
  return out;
}

QuadratureResult integrate_box(const Integrand& f, const Box& box, const QuadratureSpec& spec) {
  return integrate_box([&f](const Vec& x) { return CVec::Constant(1, f(x)); }, 1, box, spec).front();
}

double boundary_fraction(const Integrand& f, const Box& box, int per_dim) {
  const Eigen::Index dim = box.lo.size();
  double inside = 0.0, face = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Vec x(dim);
  while (true) {
    bool on_face = false;
    for (Eigen::Index d = 0; d < dim; ++d) {
      x(d) = box.lo(d) + (box.hi(d) - box.lo(d)) * idx[d] / (per_dim - 1);
      on_face = on_face || idx[d] == 0 || idx[d] == per_dim - 1;
    }
    const double v = std::abs(f(x));
    if (on_face)
      face = std::max(face, v);
    else
      inside = std::max(inside, v);
    Eigen::Index d = 0;
    for (; d < dim; ++d) {
      if (++idx[d] < per_dim) break;
      idx[d] = 0;
    }
    if (d == dim) break;
  }
  return inside > 0.0 ? face / inside : (face > 0.0 ? 1.0 : 0.0);
}

}  // namespace rotframe
