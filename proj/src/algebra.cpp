#include "rotframe/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rotframe/error.hpp"

namespace rotframe {

namespace {

const cplx kI(0.0, 1.0);
const cplx kOne(1.0, 0.0);
const cplx kMinusI(0.0, -1.0);  // 1/i

struct PhysOp {
  cplx phase;
  FirstOrderOperator op;
};

// Complex operator value at a point: coefficients of grad plus multiplier.
struct PointValue {
  CVec coeff;
  cplx mult;
};

using Rhs = std::function<PointValue(const Vec&)>;

struct Identity {
  std::string id;
  PhysOp lhs_a;
  PhysOp lhs_b;
  Rhs rhs;
};

// Plain operator equation: value of an operator that must vanish.
struct Vanishing {
  std::string id;
  std::function<PointValue(const Vec&)> value;
};

PointValue value_of(const cplx& phase, const FirstOrderOperator& op, const Vec& x) {
  return {phase * op.coeff(x).cast<cplx>(), phase * op.mult(x)};
}

double deviation(const PointValue& a, const PointValue& b) {
  double d = std::abs(a.mult - b.mult);
  if (a.coeff.size() && b.coeff.size()) d = std::max(d, (a.coeff - b.coeff).cwiseAbs().maxCoeff());
  return d;
}

PointValue scalar_value(Eigen::Index n, cplx f) { return {CVec::Zero(n), f}; }
PointValue field_value(const Vec& c) { return {c.cast<cplx>(), cplx(0.0, 0.0)}; }

PhysOp position(Eigen::Index n, Eigen::Index k) { return {kOne, position_operator(n, k)}; }
PhysOp momentum(const FirstOrderOperator& v) { return {kMinusI, v}; }

FirstOrderOperator scalar_op(Eigen::Index n, std::function<double(const Vec&)> f, Vec grad, std::string name) {
  return FirstOrderOperator::multiplier(n, std::move(f), [grad](const Vec&) { return grad; }, std::move(name));
}

void run_identities(const std::vector<Identity>& ids, const std::vector<Vanishing>& zeros,
                    const std::vector<Vec>& points, double tol, AlgebraReport& rep) {
  for (const auto& id : ids) {
    const FirstOrderOperator comm = commutator(id.lhs_a.op, id.lhs_b.op);
    const cplx phase = id.lhs_a.phase * id.lhs_b.phase;
    IdentityCheck chk;
    chk.id = id.id;
    for (const Vec& x : points) {
      const double d = deviation(value_of(phase, comm, x), id.rhs(x));
      if (chk.evaluations == 0 || d > chk.max_dev) {
        chk.max_dev = d;
        chk.point_of_max = x;
      }
      ++chk.evaluations;
    }
    chk.pass = chk.max_dev < tol;
    rep.checks.push_back(std::move(chk));
  }
  for (const auto& z : zeros) {
    IdentityCheck chk;
    chk.id = z.id;
    for (const Vec& x : points) {
      const PointValue v = z.value(x);
      const double d = deviation(v, {CVec::Zero(v.coeff.size()), cplx(0.0, 0.0)});
      if (chk.evaluations == 0 || d > chk.max_dev) {
        chk.max_dev = d;
        chk.point_of_max = x;
      }
      ++chk.evaluations;
    }
    chk.pass = chk.max_dev < tol;
    rep.checks.push_back(std::move(chk));
  }
}

std::string pname(const char* base, Eigen::Index k) {
  return std::string(base) + (k % 2 ? "Y" : "X") + std::to_string(k / 2 + 1);
}

// Weighted sum of momentum fields, sum_k w_k V_k, evaluated at x.
Vec field_sum(const std::vector<FirstOrderOperator>& pis, const Vec& w, const Vec& x) {
  Vec c = Vec::Zero(x.size());
  for (std::size_t k = 0; k < pis.size(); ++k)
    if (w(static_cast<Eigen::Index>(k)) != 0.0) c += w(static_cast<Eigen::Index>(k)) * pis[k].coeff(x);
  return c;
}

// Vanishing forms of the gauge conditions on the momenta.
std::vector<Vanishing> constraint_forms(const ParticleSystem& sys, const GaugeChart& gauge,
                                        const std::vector<FirstOrderOperator>& pis) {
  const Eigen::Index n = sys.dim();
  std::vector<Vanishing> out;
  const GaugeKind kind = kind_of(gauge);
  if (is_linear(kind)) {
    const LinearChart chart = linear_chart_of(gauge);
    Vec w(n);
    for (int a = 0; a < sys.size(); ++a) {
      w(x_index(a)) = chart.A(a);
      w(y_index(a)) = chart.B(a);
    }
    // S({Pi/m}) = sum m (A Pi_X/m + B Pi_Y/m).
    out.push_back({"S(Pi/m)=0", [pis, w](const Vec& x) { return field_value(field_sum(pis, w, x)); }});
  }
  if (has_cm_condition(kind)) {
    for (int comp = 0; comp < 2; ++comp) {
      Vec w = Vec::Zero(n);
      for (Eigen::Index k = comp; k < n; k += 2) w(k) = 1.0;
      out.push_back({comp ? "sum Pi_Y=0" : "sum Pi_X=0",
                     [pis, w](const Vec& x) { return field_value(field_sum(pis, w, x)); }});
    }
  }
  if (kind == GaugeKind::PrincipalAxes) {
    // sum (X Pi_Y + Y Pi_X): positions to the left, so this is a plain field.
    out.push_back({"sum(X Pi_Y + Y Pi_X)=0", [pis, n](const Vec& x) {
                     Vec w(n);
                     for (Eigen::Index i = 0; i < n; i += 2) {
                       w(i) = x(i + 1);
                       w(i + 1) = x(i);
                     }
                     return field_value(field_sum(pis, w, x));
                   }});
  }
  return out;
}

// Lambda written through the momenta, sum (X Pi_Y - Y Pi_X), compared with the direct field.
Vanishing lambda_consistency(const std::vector<FirstOrderOperator>& pis, const FirstOrderOperator& lam,
                             Eigen::Index n) {
  return {"Lambda=sum(X Pi_Y - Y Pi_X)", [pis, lam, n](const Vec& x) {
            Vec w(n);
            for (Eigen::Index i = 0; i < n; i += 2) {
              w(i) = -x(i + 1);
              w(i + 1) = x(i);
            }
            return field_value(field_sum(pis, w, x) - lam.coeff(x));
          }};
}

void linear_identities(const ParticleSystem& sys, const LinearChart& chart, bool cm, std::vector<Identity>& ids,
                       std::vector<Vanishing>& zeros) {
  const Eigen::Index n = sys.dim();
  const int np = sys.size();
  const double r2 = chart_norm2(sys, chart);
  const double total = sys.total_mass();
  const auto pis = cm ? pi_linear_cm(sys, chart) : pi_linear(sys, chart);
  const Vec masses = sys.coord_masses();
  // Chart coefficient attached to each coordinate slot: A at X, B at Y.
  Vec dir(n);
  for (int a = 0; a < np; ++a) {
    dir(x_index(a)) = chart.A(a);
    dir(y_index(a)) = chart.B(a);
  }

  // Positions against momenta.
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index g = 0; g < n; ++g) {
      double val = (b == g ? 1.0 : 0.0) - dir(b) * dir(g) * masses(g) / r2;
      if (cm && (b % 2) == (g % 2)) val -= masses(g) / total;
      ids.push_back({"[" + pname("", b) + "," + pname("Pi", g) + "]", position(n, b), momentum(pis[g]),
                     [n, val](const Vec&) { return scalar_value(n, kI * val); }});
    }
  // Positions commute among themselves, momenta too.
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index g = b + 1; g < n; ++g) {
      ids.push_back({"[" + pname("", b) + "," + pname("", g) + "]", position(n, b), position(n, g),
                     [n](const Vec&) { return scalar_value(n, 0.0); }});
      ids.push_back({"[" + pname("Pi", b) + "," + pname("Pi", g) + "]", momentum(pis[b]), momentum(pis[g]),
                     [n](const Vec&) { return scalar_value(n, 0.0); }});
    }

  const Vec gq = [&] {
    Vec g(n);
    for (int a = 0; a < np; ++a) {
      g(x_index(a)) = sys.mass(a) * chart.B(a);
      g(y_index(a)) = -sys.mass(a) * chart.A(a);
    }
    return g;
  }();
  const Vec gs = masses.cwiseProduct(dir);
  const PhysOp s_op{kOne, scalar_op(n, [gs](const Vec& x) { return gs.dot(x); }, gs, "S")};
  const PhysOp q_op{kOne, scalar_op(n, [gq](const Vec& x) { return gq.dot(x); }, gq, "Q")};
  Vec w_spi = dir;  // S({Pi/m}) as a combination of the momenta
  const PhysOp s_pi{kMinusI, linear_combination(pis, w_spi, "S(Pi/m)")};

  for (const auto& z : constraint_forms(sys, cm ? GaugeChart{LinearCmGauge{chart}} : GaugeChart{LinearGauge{chart}}, pis))
    zeros.push_back(z);

  // S and Q against the momenta.
  for (Eigen::Index a = 0; a < n; ++a) {
    ids.push_back({"[S," + pname("Pi", a) + "]", s_op, momentum(pis[a]),
                   [n](const Vec&) { return scalar_value(n, 0.0); }});
    if (!cm) {
      // [Q, Pi_X] = i m B, [Q, Pi_Y] = -i m A.
      const double val = a % 2 ? -masses(a) * chart.A(a / 2) : masses(a) * chart.B(a / 2);
      ids.push_back({"[Q," + pname("Pi", a) + "]", q_op, momentum(pis[a]),
                     [n, val](const Vec&) { return scalar_value(n, kI * val); }});
    }
  }
  if (!cm) {
    ids.push_back({"[Q,S(Pi/m)]", q_op, s_pi, [n](const Vec&) { return scalar_value(n, 0.0); }});

    const PhysOp lam{kMinusI, lambda_linear(sys, chart)};
    zeros.push_back(lambda_consistency(pis, lam.op, n));
    // [X, Lambda] = -iY - iA Q/r2, [Y, Lambda] = iX - iB Q/r2.
    for (Eigen::Index a = 0; a < n; ++a) {
      const bool is_y = a % 2;
      ids.push_back({"[" + pname("", a) + ",Lambda]", position(n, a), lam,
                     [=](const Vec& x) {
                       const double qv = gq.dot(x);
                       const double v = is_y ? x(a - 1) - dir(a) * qv / r2 : -x(a + 1) - dir(a) * qv / r2;
                       return scalar_value(n, kI * v);
                     }});
    }
    // [Lambda, Pi_X] = i Pi_Y + i (A m / r2) Q(Pi/m); [Lambda, Pi_Y] = -i Pi_X + i (B m / r2) Q(Pi/m),
    // with i Pi = V these are real fields.
    Vec w_qpi(n);
    for (int a = 0; a < np; ++a) {
      w_qpi(x_index(a)) = chart.B(a);
      w_qpi(y_index(a)) = -chart.A(a);
    }
    for (Eigen::Index g = 0; g < n; ++g) {
      const bool is_y = g % 2;
      const Eigen::Index partner = is_y ? g - 1 : g + 1;
      const double sign = is_y ? -1.0 : 1.0;
      const double pref = dir(g) * masses(g) / r2;
      ids.push_back({"[Lambda," + pname("Pi", g) + "]", lam, momentum(pis[g]),
                     [=](const Vec& x) {
                       return field_value(sign * pis[partner].coeff(x) + pref * field_sum(pis, w_qpi, x));
                     }});
    }
    ids.push_back({"[S,Lambda]", s_op, lam, [n](const Vec&) { return scalar_value(n, 0.0); }});
    ids.push_back({"[S(Pi/m),Lambda]", s_pi, lam, [n](const Vec&) { return scalar_value(n, 0.0); }});
    ids.push_back({"[Q,Lambda]", q_op, lam,
                   [n, gs](const Vec& x) { return scalar_value(n, kMinusI * gs.dot(x)); }});
  } else {
    zeros.push_back(lambda_consistency(pis, lambda_linear_cm(sys, chart), n));
  }
}

void quadratic_identities(const ParticleSystem& sys, std::vector<Identity>& ids, std::vector<Vanishing>& zeros) {
  const Eigen::Index n = sys.dim();
  const auto pis = pi_quadratic(sys);
  const Vec masses = sys.coord_masses();
  auto r2_of = [masses](const Vec& x) { return x.cwiseProduct(masses).dot(x); };
  auto partner = [](Eigen::Index k) { return k % 2 ? k - 1 : k + 1; };

  // [X_b, Pi_Xg] = i(d - Y_b Y_g m_g/R2), [Y_b, Pi_Yg] = i(d - X_b X_g m_g/R2),
  // [X_b, Pi_Yg] = -i Y_b X_g m_g/R2,     [Y_b, Pi_Xg] = -i X_b Y_g m_g/R2.
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index g = 0; g < n; ++g) {
      ids.push_back({"[" + pname("", b) + "," + pname("Pi", g) + "]", position(n, b), momentum(pis[g]),
                     [=](const Vec& x) {
                       const double v =
                           (b == g ? 1.0 : 0.0) - x(partner(b)) * x(partner(g)) * masses(g) / r2_of(x);
                       return scalar_value(n, kI * v);
                     }});
    }
  // Momentum brackets with i Pi = V:
  //   [Pi_Xb, Pi_Xg] = (m_g Y_g V_Yb - m_b Y_b V_Yg)/R2
  //   [Pi_Xb, Pi_Yg] = (m_g X_g V_Yb - m_b Y_b V_Xg)/R2
  //   [Pi_Yb, Pi_Yg] = (m_g X_g V_Xb - m_b X_b V_Xg)/R2
  // In every case the weight of V_{partner(b)} is m_g times the coordinate partner to g,
  // and the weight of V_{partner(g)} is -m_b times the coordinate partner to b.
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index g = b + 1; g < n; ++g) {
      ids.push_back({"[" + pname("Pi", b) + "," + pname("Pi", g) + "]", momentum(pis[b]), momentum(pis[g]),
                     [=](const Vec& x) {
                       const double r2 = r2_of(x);
                       return field_value((masses(g) * x(partner(g)) * pis[partner(b)].coeff(x) -
                                           masses(b) * x(partner(b)) * pis[partner(g)].coeff(x)) /
                                          r2);
                     }});
    }
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index g = b + 1; g < n; ++g)
      ids.push_back({"[" + pname("", b) + "," + pname("", g) + "]", position(n, b), position(n, g),
                     [n](const Vec&) { return scalar_value(n, 0.0); }});

  // S = sum m X Y commutes with every momentum.
  const PhysOp s_op{kOne, FirstOrderOperator::multiplier(
                              n,
                              [masses, n](const Vec& x) {
                                double s = 0.0;
                                for (Eigen::Index i = 0; i < n; i += 2) s += masses(i) * x(i) * x(i + 1);
                                return s;
                              },
                              [masses, n](const Vec& x) {
                                Vec g(n);
                                for (Eigen::Index i = 0; i < n; i += 2) {
                                  g(i) = masses(i) * x(i + 1);
                                  g(i + 1) = masses(i) * x(i);
                                }
                                return g;
                              },
                              "S")};
  for (Eigen::Index a = 0; a < n; ++a)
    ids.push_back({"[S," + pname("Pi", a) + "]", s_op, momentum(pis[a]),
                   [n](const Vec&) { return scalar_value(n, 0.0); }});
  zeros.push_back(lambda_consistency(pis, lambda_quadratic(sys), n));
  for (const auto& z : constraint_forms(sys, PrincipalAxesGauge{}, pis)) zeros.push_back(z);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

Vec sample_on_surface(const ParticleSystem& sys, const GaugeChart& gauge, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec lab(sys.dim());
    for (Eigen::Index k = 0; k < lab.size(); ++k) lab(k) = normal(rng);
    try {
      const GaugeFixResult fixed = fix_gauge(sys, gauge, lab);
      const Vec& body = fixed.body.coords;
      const double inertia = moment_of_inertia(sys, body);
      const double scale = kind_of(gauge) == GaugeKind::PrincipalAxes
                               ? inertia
                               : std::sqrt(chart_norm2(sys, linear_chart_of(gauge)) * inertia);
      // Stay away from the Gribov boundary and, for principal axes, from collinear shapes.
      if (fixed.jacobian < 0.1 * scale) continue;
      if (kind_of(gauge) == GaugeKind::PrincipalAxes && 2.0 * fixed.jacobian > 0.9 * inertia) continue;
      if (sys.size() > 1) {
        bool separated = true;
        for (int a = 0; a < sys.size() && separated; ++a)
          for (int b = a + 1; b < sys.size(); ++b)
            if (std::hypot(body(x_index(a)) - body(x_index(b)), body(y_index(a)) - body(y_index(b))) < 0.05)
              separated = false;
        if (!separated) continue;
      }
      return body;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "could not sample a regular point of the gauge surface");
}

RandomSetup random_setup(GaugeKind kind, int n_particles, std::uint64_t seed) {
  if (n_particles < 1) throw Error(ErrorKind::InvalidArgument, "need at least one particle");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> masses(static_cast<std::size_t>(n_particles));
  for (auto& m : masses) m = uniform(rng, 0.5, 2.0);
  ParticleSystem sys(masses);
  const Eigen::Index np = n_particles;
  auto random_chart = [&](bool centered) {
    LinearChart chart{Vec(np), Vec(np)};
    for (Eigen::Index a = 0; a < np; ++a) {
      chart.A(a) = normal(rng);
      chart.B(a) = normal(rng);
    }
    if (centered) {
      double ma = 0.0, mb = 0.0;
      for (Eigen::Index a = 0; a < np; ++a) {
        ma += masses[a] * chart.A(a);
        mb += masses[a] * chart.B(a);
      }
      chart.A.array() -= ma / sys.total_mass();
      chart.B.array() -= mb / sys.total_mass();
    }
    return chart;
  };
  switch (kind) {
    case GaugeKind::Linear: return {sys, LinearGauge{random_chart(false)}};
    case GaugeKind::LinearCm:
      if (n_particles < 2) throw Error(ErrorKind::InvalidArgument, "center-of-mass gauge needs two particles");
      return {sys, LinearCmGauge{random_chart(true)}};
    case GaugeKind::PrincipalAxes: return {sys, PrincipalAxesGauge{}};
    case GaugeKind::Eckart: {
      if (n_particles < 2) throw Error(ErrorKind::InvalidArgument, "Eckart gauge needs two particles");
      // Random shape, centered and turned onto its principal axes.
      Vec z(sys.dim());
      for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
      const Vec2 c = center_of_mass(sys, z);
      for (int a = 0; a < n_particles; ++a) {
        z(x_index(a)) -= c(0);
        z(y_index(a)) -= c(1);
      }
      z = fix_principal_axes(sys, z).body.coords;
      return {sys, EckartGauge{EquilibriumShape{z}}};
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown gauge kind");
}

AlgebraReport verify_algebra(const ParticleSystem& sys, const GaugeChart& gauge, int n_points, double tol,
                             std::uint64_t seed) {
  if (n_points < 1) throw Error(ErrorKind::InvalidArgument, "need at least one point");
  validate_gauge(sys, gauge);
  std::mt19937_64 rng(seed);
  std::vector<Vec> points;
  for (int i = 0; i < n_points; ++i) points.push_back(sample_on_surface(sys, gauge, rng));

  std::vector<Identity> ids;
  std::vector<Vanishing> zeros;
  switch (kind_of(gauge)) {
    case GaugeKind::Linear: linear_identities(sys, linear_chart_of(gauge), false, ids, zeros); break;
    case GaugeKind::LinearCm:
    case GaugeKind::Eckart: linear_identities(sys, linear_chart_of(gauge), true, ids, zeros); break;
    case GaugeKind::PrincipalAxes: quadratic_identities(sys, ids, zeros); break;
  }
  AlgebraReport rep;
  rep.n_points = n_points;
  rep.tol = tol;
  run_identities(ids, zeros, points, tol, rep);
  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.pass; });
  return rep;
}

AlgebraReport verify_algebra(GaugeKind kind, int n_points, double tol, std::uint64_t seed) {
  const RandomSetup setup = random_setup(kind, 3, seed);
  return verify_algebra(setup.sys, setup.gauge, n_points, tol, seed + 1);
}

AlgebraReport verify_constraints(const ParticleSystem& sys, const GaugeChart& gauge, int n_points, double tol,
                                 std::uint64_t seed) {
  if (n_points < 1) throw Error(ErrorKind::InvalidArgument, "need at least one point");
  validate_gauge(sys, gauge);
  std::mt19937_64 rng(seed);
  std::vector<Vec> points;
  for (int i = 0; i < n_points; ++i) points.push_back(sample_on_surface(sys, gauge, rng));
  AlgebraReport rep;
  rep.n_points = n_points;
  rep.tol = tol;
  run_identities({}, constraint_forms(sys, gauge, momentum_fields(sys, gauge)), points, tol, rep);
  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.pass; });
  return rep;
}

}  // namespace rotframe
