#include "rotframe/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "rotframe/error.hpp"

namespace rotframe {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, field + ": " + what);
}

ParamSpec num(std::string name, double def, std::string desc) {
  return {std::move(name), ParamType::Number, def, std::move(desc)};
}
ParamSpec integer(std::string name, long def, std::string desc) {
  return {std::move(name), ParamType::Integer, def, std::move(desc)};
}
ParamSpec boolean(std::string name, bool def, std::string desc) {
  return {std::move(name), ParamType::Boolean, def, std::move(desc)};
}
ParamSpec nums(std::string name, std::vector<double> def, std::string desc) {
  return {std::move(name), ParamType::NumberArray, Json(def), std::move(desc)};
}
ParamSpec ints(std::string name, std::vector<long> def, std::string desc) {
  return {std::move(name), ParamType::IntegerArray, Json(def), std::move(desc)};
}
ParamSpec strings(std::string name, std::vector<std::string> def, std::string desc) {
  return {std::move(name), ParamType::StringArray, Json(def), std::move(desc)};
}

const std::vector<std::string> all_gauges{"linear", "linear_cm", "principal_axes", "eckart"};

std::vector<ExperimentInfo> make_catalog() {
  std::vector<ExperimentInfo> c;
  c.push_back({"gauge-equivalence",
               "Lab-frame integration mapped into a linear body frame against direct rotating-frame integration",
               true,
               true,
               {num("duration", 10.0, "integration time"),
                integer("samples", 201, "output grid points including both ends"),
                num("rtol", 1e-11, "relative tolerance of the integrator"),
                num("atol", 1e-13, "absolute tolerance of the integrator"),
                nums("initial_positions", {}, "lab positions; empty draws them from the seed"),
                nums("initial_velocities", {}, "lab velocities; empty draws them from the seed"),
                num("position_spread", 1.5, "half width of the uniform position draw"),
                num("velocity_spread", 0.5, "half width of the uniform velocity draw"),
                num("tol_body", 1e-6, "max pointwise body-coordinate difference"),
                num("tol_angular_momentum", 1e-9, "max drift of the lab angular momentum")}});
  c.push_back({"algebra-verify",
               "Commutator identities and operator constraints at random on-surface points",
               false,
               false,
               {integer("n_particles", 3, "particles in each random system"),
                strings("gauges", all_gauges, "gauge kinds to check"),
                boolean("identities", true, "check the commutator tables"),
                integer("points", 100, "points for the identities"),
                num("tol", 1e-10, "max deviation for the identities"),
                boolean("constraints", true, "check the momentum constraints"),
                integer("constraint_points", 200, "points for the constraints"),
                num("constraint_tol", 1e-12, "max deviation for the constraints")}});
  c.push_back({"hermiticity",
               "Hermiticity of H and Lambda under the gauge-fixed inner products, and the representation check",
               false,
               false,
               {strings("gauges", {"linear", "linear_cm", "principal_axes"}, "gauge kinds"),
                ints("particles", {2, 3, 2}, "particle count per gauge entry"),
                integer("trials", 20, "random localized pairs per gauge; 0 skips"),
                num("tol_factor", 5.0, "allowed asymmetry in units of the quadrature error"),
                num("ell", 1.0, "total angular momentum in units of hbar"),
                integer("quadrature_order", 24, "Gauss-Legendre nodes per axis on the coarse level"),
                num("spring_k", 1.0, "spring constant between every pair"),
                num("spring_rest", 1.0, "spring rest length"),
                integer("representation_points", 0, "points per gauge for the representation check; 0 skips"),
                num("representation_tol", 1e-8, "max deviation in the representation check")}});
  c.push_back({"n1-spectrum",
               "Single particle in a central harmonic trap: polar spectrum and quantum potential",
               true,
               false,
               {integer("n_r_max", 3, "largest radial quantum number"),
                integer("ell_max", 3, "largest |ell|"),
                num("r_max", 12.0, "outer radius in oscillator lengths"),
                integer("n_cells", 2000, "finite-volume cells on the coarse grid"),
                num("rel_tol", 1e-5, "relative tolerance against the closed form"),
                nums("potential_points", {0.3, 1.0, 2.5}, "radii for the quantum potential check")}});
  c.push_back({"eckart-spring",
               "Two-body spring in the Eckart frame against the exact radial oracle",
               false,
               false,
               {num("m1", 1.0, "first mass"),
                num("m2", 2.0, "second mass"),
                num("k", 1.0, "spring constant"),
                num("hbar", 1.0, "Planck constant"),
                nums("eps", {0.02, 0.03, 0.05}, "expansion parameters; the rest length follows"),
                ints("ells", {0, 1, 2}, "angular momenta"),
                ints("ns", {0, 1, 2}, "oscillator levels"),
                num("slope_tol", 0.02, "relative tolerance on the eps^2 coefficient"),
                num("min_exponent", 2.5, "least allowed exponent of the residual"),
                num("coeff_tol", 0.05, "relative tolerance on the n+-1 mixing coefficients"),
                num("half_width", 10.0, "oracle domain half width in oscillator lengths"),
                integer("grid_points", 24000, "interior nodes of the coarse oracle grid"),
                num("oracle_tol", 1e-7, "Richardson error bound in units of hbar omega")}});
  c.push_back({"eckart-order",
               "Order of the classical residual angular momentum near the reference shape in two charts",
               true,
               false,
               {integer("draws", 10, "random shapes and directions per chart"),
                nums("scales", {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, "deformation scales"),
                num("eckart_min_exponent", 0.95, "least fitted exponent in the Eckart chart"),
                num("principal_max_exponent", 0.1, "largest |exponent| in the linearized principal-axes chart")}});
  c.push_back({"residual-verify",
               "Orbits, kernel invariants and eigenfunctions of the residual angular momentum",
               false,
               false,
               {integer("n_particles", 3, "particles in each random system"),
                strings("gauges", all_gauges, "gauge kinds"),
                integer("points", 100, "on-surface points"),
                nums("lambdas", {1.0, -2.0, 3.0}, "per-particle integers for the linear gauges"),
                nums("ns", {1.0, 2.0, -1.0}, "per-particle integers for principal axes"),
                num("eigen_tol", 1e-9, "max |Lambda psi - lambda psi| / |psi|"),
                num("integer_tol", 1e-10, "distance of linear-gauge eigenvalues to integers"),
                num("generator_dalpha", 1e-4, "central-difference step for the generator check"),
                num("generator_tol", 1e-8, "max deviation of the orbit tangent from the field"),
                integer("orbit_starts", 3, "starting points per gauge for orbit invariants"),
                integer("orbit_samples", 64, "samples along one period"),
                num("invariant_tol", 1e-12, "max relative drift of conserved quantities"),
                num("period_tol", 1e-10, "max return distance after one period")}});
  c.push_back({"orbit-invariants",
               "Conservation along orbits, group law and period of the residual flow",
               false,
               false,
               {integer("n_particles", 4, "particles in each random system"),
                strings("gauges", all_gauges, "gauge kinds"),
                integer("starts", 5, "starting points per gauge"),
                integer("samples", 64, "samples along one period"),
                num("invariant_tol", 1e-12, "max relative drift of conserved quantities"),
                num("period_tol", 1e-10, "max return distance after one period")}});
  return c;
}

std::string type_name(ParamType t) {
  switch (t) {
    case ParamType::Number: return "number";
    case ParamType::Integer: return "integer";
    case ParamType::Boolean: return "boolean";
    case ParamType::String: return "string";
    default: return "array";
  }
}

bool matches(const Json& v, ParamType t) {
  auto all = [&](auto pred) { return v.is_array() && std::all_of(v.begin(), v.end(), pred); };
  switch (t) {
    case ParamType::Number: return v.is_number();
    case ParamType::Integer: return v.is_number_integer();
    case ParamType::Boolean: return v.is_boolean();
    case ParamType::String: return v.is_string();
    case ParamType::NumberArray: return all([](const Json& e) { return e.is_number(); });
    case ParamType::IntegerArray: return all([](const Json& e) { return e.is_number_integer(); });
    case ParamType::StringArray: return all([](const Json& e) { return e.is_string(); });
  }
  return false;
}

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) invalid(path, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) invalid(path + "." + key, "unknown field");
  }
}

double get_number(const Json& obj, const std::string& path, const std::string& key, std::optional<double> def = {}) {
  if (!obj.contains(key)) {
    if (def) return *def;
    invalid(path + "." + key, "required");
  }
  if (!obj[key].is_number()) invalid(path + "." + key, "must be a number");
  return obj[key].get<double>();
}

std::vector<double> get_numbers(const Json& obj, const std::string& path, const std::string& key, bool required) {
  if (!obj.contains(key)) {
    if (required) invalid(path + "." + key, "required");
    return {};
  }
  if (!matches(obj[key], ParamType::NumberArray)) invalid(path + "." + key, "must be an array of numbers");
  return obj[key].get<std::vector<double>>();
}

SystemConfig parse_system(const Json& j) {
  const std::string path = "system";
  check_keys(j, path, {"masses", "hbar", "pair_terms", "body_term"});
  SystemConfig s;
  s.masses = get_numbers(j, path, "masses", true);
  if (s.masses.empty()) invalid(path + ".masses", "needs at least one mass");
  for (double m : s.masses)
    if (!(m > 0)) invalid(path + ".masses", "masses must be positive");
  s.hbar = get_number(j, path, "hbar", 1.0);
  if (!(s.hbar > 0)) invalid(path + ".hbar", "must be positive");
  if (j.contains("pair_terms")) {
    if (!j["pair_terms"].is_array()) invalid(path + ".pair_terms", "must be an array");
    int idx = 0;
    for (const auto& t : j["pair_terms"]) {
      const std::string p = path + ".pair_terms[" + std::to_string(idx++) + "]";
      check_keys(t, p, {"kind", "k", "rest_length", "strength", "pairs"});
      PairTermConfig pc;
      if (!t.contains("kind") || !t["kind"].is_string()) invalid(p + ".kind", "required string");
      pc.kind = t["kind"].get<std::string>();
      if (pc.kind == "spring") {
        pc.k = get_number(t, p, "k");
        pc.rest_length = get_number(t, p, "rest_length");
      } else if (pc.kind == "coulomb2d") {
        pc.strength = get_number(t, p, "strength");
      } else {
        invalid(p + ".kind", "expected spring or coulomb2d");
      }
      if (t.contains("pairs")) {
        if (!t["pairs"].is_array()) invalid(p + ".pairs", "must be an array of index pairs");
        for (const auto& pr : t["pairs"]) {
          if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_integer() || !pr[1].is_number_integer())
            invalid(p + ".pairs", "each entry must be [i, j]");
          const int a = pr[0].get<int>(), b = pr[1].get<int>();
          const int n = static_cast<int>(s.masses.size());
          if (a < 0 || b < 0 || a >= n || b >= n || a == b) invalid(p + ".pairs", "index out of range or repeated");
          pc.pairs.emplace_back(a, b);
        }
      }
      s.pair_terms.push_back(pc);
    }
  }
  if (j.contains("body_term")) {
    const std::string p = path + ".body_term";
    const Json& b = j["body_term"];
    check_keys(b, p, {"kind", "omega"});
    BodyTermConfig bc;
    if (!b.contains("kind") || b["kind"] != "harmonic_trap") invalid(p + ".kind", "expected harmonic_trap");
    bc.kind = "harmonic_trap";
    bc.omega = get_number(b, p, "omega");
    if (!(bc.omega > 0)) invalid(p + ".omega", "must be positive");
    s.body_term = bc;
  }
  return s;
}

ChartConfig parse_chart(const Json& j) {
  const std::string path = "chart";
  check_keys(j, path, {"kind", "A", "B", "Z"});
  ChartConfig c;
  if (!j.contains("kind") || !j["kind"].is_string()) invalid(path + ".kind", "required string");
  c.kind = j["kind"].get<std::string>();
  if (std::find(all_gauges.begin(), all_gauges.end(), c.kind) == all_gauges.end())
    invalid(path + ".kind", "expected one of linear, linear_cm, principal_axes, eckart");
  const bool linear = c.kind == "linear" || c.kind == "linear_cm";
  c.A = get_numbers(j, path, "A", linear);
  c.B = get_numbers(j, path, "B", linear);
  c.Z = get_numbers(j, path, "Z", c.kind == "eckart");
  return c;
}

Json system_json(const SystemConfig& s) {
  Json j;
  j["masses"] = s.masses;
  j["hbar"] = s.hbar;
  Json terms = Json::array();
  for (const auto& t : s.pair_terms) {
    Json e;
    e["kind"] = t.kind;
    if (t.kind == "spring") {
      e["k"] = t.k;
      e["rest_length"] = t.rest_length;
    } else {
      e["strength"] = t.strength;
    }
    Json pairs = Json::array();
    for (const auto& [a, b] : t.pairs) pairs.push_back({a, b});
    e["pairs"] = pairs;
    terms.push_back(e);
  }
  j["pair_terms"] = terms;
  if (s.body_term) j["body_term"] = {{"kind", s.body_term->kind}, {"omega", s.body_term->omega}};
  return j;
}

Json chart_json(const ChartConfig& c) {
  Json j;
  j["kind"] = c.kind;
  if (!c.A.empty()) j["A"] = c.A;
  if (!c.B.empty()) j["B"] = c.B;
  if (!c.Z.empty()) j["Z"] = c.Z;
  return j;
}

Json param_schema(const ParamSpec& p) {
  Json s;
  switch (p.type) {
    case ParamType::NumberArray: s = {{"type", "array"}, {"items", {{"type", "number"}}}}; break;
    case ParamType::IntegerArray: s = {{"type", "array"}, {"items", {{"type", "integer"}}}}; break;
    case ParamType::StringArray: s = {{"type", "array"}, {"items", {{"type", "string"}}}}; break;
    default: s = {{"type", type_name(p.type)}};
  }
  s["default"] = p.default_value;
  s["description"] = p.description;
  return s;
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = make_catalog();
  return catalog;
}

const ExperimentInfo& experiment_info(std::string_view name) {
  for (const auto& e : experiment_catalog())
    if (e.name == name) return e;
  std::string valid;
  for (const auto& e : experiment_catalog()) valid += (valid.empty() ? "" : ", ") + e.name;
  invalid("experiment", "unknown experiment '" + std::string(name) + "'; valid names: " + valid);
}

ParticleSystem build_system(const SystemConfig& config) {
  std::vector<PairTerm> pairs;
  for (const auto& t : config.pair_terms) {
    const RadialFunction f =
        t.kind == "spring" ? potentials::spring(t.k, t.rest_length) : potentials::log_interaction(t.strength);
    pairs.push_back({f, t.pairs});
  }
  std::optional<BodyTerm> body;
  if (config.body_term) body = BodyTerm{potentials::harmonic(config.body_term->omega * config.body_term->omega), true};
  return ParticleSystem(config.masses, pairs, body, config.hbar);
}

GaugeChart build_gauge(const ChartConfig& config, const ParticleSystem& sys) {
  auto vec = [](const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())).eval(); };
  GaugeChart gauge = PrincipalAxesGauge{};
  if (config.kind == "linear") gauge = LinearGauge{{vec(config.A), vec(config.B)}};
  else if (config.kind == "linear_cm") gauge = LinearCmGauge{{vec(config.A), vec(config.B)}};
  else if (config.kind == "eckart") gauge = EckartGauge{{vec(config.Z)}};
  validate_gauge(sys, gauge);
  return gauge;
}

ExperimentConfig parse_config(const Json& doc) {
  check_keys(doc, "config", {"experiment", "seed", "name", "output_dir", "system", "chart", "params"});
  ExperimentConfig c;
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) invalid("experiment", "required string");
  c.experiment = doc["experiment"].get<std::string>();
  const ExperimentInfo& info = experiment_info(c.experiment);
  if (!doc.contains("seed") || !doc["seed"].is_number_unsigned()) invalid("seed", "required non-negative integer");
  c.seed = doc["seed"].get<std::uint64_t>();
  c.name = c.experiment;
  if (doc.contains("name")) {
    if (!doc["name"].is_string() || doc["name"].get<std::string>().empty()) invalid("name", "must be a non-empty string");
    c.name = doc["name"].get<std::string>();
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) invalid("output_dir", "must be a string");
    c.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("system")) c.system = parse_system(doc["system"]);
  else if (info.needs_system) invalid("system", "required for " + info.name);
  if (doc.contains("chart")) c.chart = parse_chart(doc["chart"]);
  else if (info.needs_chart) invalid("chart", "required for " + info.name);
  if (c.chart && !c.system) invalid("chart", "needs a system block");

  const Json params = doc.contains("params") ? doc["params"] : Json::object();
  std::set<std::string> names;
  for (const auto& p : info.params) names.insert(p.name);
  check_keys(params, "params", names);
  for (const auto& p : info.params) {
    if (params.contains(p.name)) {
      if (!matches(params[p.name], p.type)) invalid("params." + p.name, "must be of type " + type_name(p.type));
      c.params[p.name] = params[p.name];
    } else {
      c.params[p.name] = p.default_value;
    }
  }

  if (c.system) {
    try {
      const ParticleSystem sys = build_system(*c.system);
      if (c.chart) build_gauge(*c.chart, sys);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigInvalid) throw;
      invalid(c.chart ? "chart" : "system", e.what());
    }
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(ErrorKind::ConfigInvalid, "line " + std::to_string(line) + ": " + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["name"] = c.name;
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
  if (c.system) j["system"] = system_json(*c.system);
  if (c.chart) j["chart"] = chart_json(*c.chart);
  j["params"] = c.params;
  return j;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

Json emit_schema() {
  Json number_array = {{"type", "array"}, {"items", {{"type", "number"}}}};
  Json pair_term = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"kind"}},
      {"properties",
       {{"kind", {{"enum", {"spring", "coulomb2d"}}}},
        {"k", {{"type", "number"}, {"description", "spring constant"}}},
        {"rest_length", {{"type", "number"}}},
        {"strength", {{"type", "number"}, {"description", "coefficient of -ln d"}}},
        {"pairs",
         {{"type", "array"},
          {"items", {{"type", "array"}, {"items", {{"type", "integer"}}}, {"minItems", 2}, {"maxItems", 2}}}}}}}};
  Json system = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"masses"}},
      {"properties",
       {{"masses", number_array},
        {"hbar", {{"type", "number"}, {"default", 1.0}}},
        {"pair_terms", {{"type", "array"}, {"items", pair_term}}},
        {"body_term",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"kind", "omega"}},
          {"properties", {{"kind", {{"const", "harmonic_trap"}}}, {"omega", {{"type", "number"}}}}}}}}}};
  Json chart = {{"type", "object"},
                {"additionalProperties", false},
                {"required", {"kind"}},
                {"properties",
                 {{"kind", {{"enum", all_gauges}}}, {"A", number_array}, {"B", number_array}, {"Z", number_array}}}};
  Json names = Json::array();
  Json cases = Json::array();
  for (const auto& e : experiment_catalog()) {
    names.push_back(e.name);
    Json props = Json::object();
    for (const auto& p : e.params) props[p.name] = param_schema(p);
    Json required = Json::array({"experiment", "seed"});
    if (e.needs_system) required.push_back("system");
    if (e.needs_chart) required.push_back("chart");
    cases.push_back({{"if", {{"properties", {{"experiment", {{"const", e.name}}}}}}},
                     {"then",
                      {{"required", required},
                       {"properties",
                        {{"params", {{"type", "object"}, {"additionalProperties", false}, {"properties", props}}}}}}}});
  }
  return {{"$schema", "http://json-schema.org/draft-07/schema#"},
          {"title", "rotframe experiment config"},
          {"type", "object"},
          {"additionalProperties", false},
          {"required", {"experiment", "seed"}},
          {"properties",
           {{"experiment", {{"enum", names}}},
            {"seed", {{"type", "integer"}, {"minimum", 0}}},
            {"name", {{"type", "string"}, {"description", "artifact sub-directory"}}},
            {"output_dir", {{"type", "string"}}},
            {"system", system},
            {"chart", chart},
            {"params", {{"type", "object"}}}}},
          {"allOf", cases}};
}

}  // namespace rotframe
