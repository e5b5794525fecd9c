#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "rotframe/config.hpp"
#include "rotframe/error.hpp"
#include "rotframe/experiments.hpp"

using namespace rotframe;
namespace fs = std::filesystem;

namespace {

const fs::path configs = fs::path(ROTFRAME_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("rotframe_cli_test_" + tag);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ErrorKind kind_of_failure(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error for " << text);
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const char* one_body = R"({"masses": [1.0], "body_term": {"kind": "harmonic_trap", "omega": 1.0}})";

}  // namespace

TEST_CASE("catalog lists the eight experiments") {
  const std::set<std::string> want{"gauge-equivalence", "algebra-verify", "hermiticity",     "n1-spectrum",
                                   "eckart-spring",     "eckart-order",   "residual-verify", "orbit-invariants"};
  std::set<std::string> got;
  for (const auto& e : experiment_catalog()) {
    got.insert(e.name);
    CHECK(!e.description.empty());
    std::set<std::string> params;
    for (const auto& p : e.params) CHECK(params.insert(p.name).second);
  }
  CHECK(got == want);
  CHECK(experiment_catalog().size() == 8);
}

TEST_CASE("unknown experiment names the valid ones") {
  const std::string msg = message_of(R"({"experiment": "spin-chain", "seed": 1})");
  for (const auto& e : experiment_catalog()) CHECK(msg.find(e.name) != std::string::npos);
  CHECK(kind_of_failure(R"({"experiment": "spin-chain", "seed": 1})") == ErrorKind::ConfigInvalid);
}

TEST_CASE("malformed configs are rejected with the field") {
  // Chart with zero norm.
  const std::string zero_chart = R"({"experiment": "gauge-equivalence", "seed": 1,
    "system": {"masses": [1, 2]}, "chart": {"kind": "linear", "A": [0, 0], "B": [0, 0]}})";
  CHECK(kind_of_failure(zero_chart) == ErrorKind::ConfigInvalid);
  CHECK(message_of(zero_chart).find("chart") != std::string::npos);

  // Chart of the wrong length.
  CHECK(kind_of_failure(R"({"experiment": "gauge-equivalence", "seed": 1,
    "system": {"masses": [1, 2]}, "chart": {"kind": "linear", "A": [1], "B": [0, 1]}})") == ErrorKind::ConfigInvalid);

  const std::string unknown = R"({"experiment": "orbit-invariants", "seed": 1, "params": {"sampels": 3}})";
  CHECK(message_of(unknown).find("params.sampels") != std::string::npos);
  CHECK(message_of(R"({"experiment": "orbit-invariants", "seed": 1, "colour": 3})").find("colour") !=
        std::string::npos);
  CHECK(message_of(R"({"experiment": "orbit-invariants", "seed": 1, "params": {"samples": 2.5}})")
            .find("params.samples") != std::string::npos);
  CHECK(message_of(R"({"experiment": "orbit-invariants"})").find("seed") != std::string::npos);
  CHECK(message_of(R"({"experiment": "orbit-invariants", "seed": -3})").find("seed") != std::string::npos);
  CHECK(message_of(R"({"experiment": "n1-spectrum", "seed": 1})").find("system") != std::string::npos);
  CHECK(message_of(R"({"experiment": "n1-spectrum", "seed": 1, "system": {"masses": [1, -1]}})")
            .find("system.masses") != std::string::npos);
  CHECK(message_of(R"({"experiment": "n1-spectrum", "seed": 1,
    "system": {"masses": [1, 1], "pair_terms": [{"kind": "spring", "k": 1, "rest_length": 1, "pairs": [[0, 2]]}]}})")
            .find("pair_terms[0].pairs") != std::string::npos);
  CHECK(message_of(R"({"experiment": "n1-spectrum", "seed": 1,
    "system": {"masses": [1], "body_term": {"kind": "quartic", "omega": 1}}})")
            .find("body_term.kind") != std::string::npos);

  // Syntax errors carry the line.
  const std::string broken = "{\n  \"experiment\": \"orbit-invariants\",\n  \"seed\": 1,,\n}";
  CHECK(kind_of_failure(broken) == ErrorKind::ConfigInvalid);
  CHECK(message_of(broken).find("line 3") != std::string::npos);

  CHECK_THROWS_AS(load_config(configs / "does_not_exist.json"), Error);
}

TEST_CASE("defaults are filled and the canonical form round-trips") {
  const auto c = parse_config_text(R"({"experiment": "eckart-spring", "seed": 4})");
  CHECK(c.name == "eckart-spring");
  CHECK(c.params.at("eps") == Json({0.02, 0.03, 0.05}));
  CHECK(c.params.at("grid_points") == 24000);

  int bundled = 0;
  for (const auto& entry : fs::directory_iterator(configs)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const auto a = load_config(entry.path());
    const auto b = parse_config(to_json(a));
    CHECK(a == b);
    CHECK(to_json(b).dump() == to_json(a).dump());
    ++bundled;
  }
  CHECK(bundled >= 10);

  const auto sys = parse_config_text(std::string(R"({"experiment": "n1-spectrum", "seed": 1, "system": )") +
                                     one_body + "}");
  CHECK(parse_config(to_json(sys)) == sys);
  const ParticleSystem built = build_system(*sys.system);
  CHECK(built.size() == 1);
  CHECK(built.body_term()->mass_weighted);
}

TEST_CASE("schema covers every parameter") {
  const Json schema = emit_schema();
  CHECK(schema.at("$schema") == "http://json-schema.org/draft-07/schema#");
  CHECK(schema.at("properties").at("experiment").at("enum").size() == 8);
  const Json& cases = schema.at("allOf");
  REQUIRE(cases.size() == experiment_catalog().size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& info = experiment_catalog()[i];
    CHECK(cases[i].at("if").at("properties").at("experiment").at("const") == info.name);
    const Json& props = cases[i].at("then").at("properties").at("params").at("properties");
    CHECK(props.size() == info.params.size());
    for (const auto& p : info.params) CHECK(props.at(p.name).at("default") == p.default_value);
  }
}

TEST_CASE("numbers print with 17 significant digits") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  for (double x : {1.0 / 3.0, 6.02214076e23, -1e-17, -2.5e-300, 0.0}) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    CHECK(format_number(x) == buf);
    CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("output directory precedence") {
  auto c = parse_config_text(R"({"experiment": "orbit-invariants", "seed": 1})");
  unsetenv("ROTFRAME_OUTPUT_DIR");
  CHECK(output_root(c) == fs::path("rotframe_out"));
  c.output_dir = "from_config";
  CHECK(output_root(c) == fs::path("from_config"));
  setenv("ROTFRAME_OUTPUT_DIR", "from_env", 1);
  CHECK(output_root(c) == fs::path("from_env"));
  unsetenv("ROTFRAME_OUTPUT_DIR");
}

TEST_CASE("eckart_default writes 27 rows") {
  const fs::path root = scratch("eckart");
  const RunSummary s = run(configs / "eckart_default.json", root);
  const auto csv = lines(root / "eckart_default" / "eckart_energies.csv");
  REQUIRE(csv.size() == 28);
  CHECK(csv.front() == "ell,n,eps,E_oracle,E0,E1_pred,slope_fit,slope_err");
  CHECK(fs::exists(root / "eckart_default" / "summary.json"));
  // Energies and exponents pass; the n+-1 mixing check is the one that fails.
  for (const auto& c : s.checks) CHECK(c.pass == (c.name != "mixing_coeff_rel_err"));
  CHECK(s.status == "fail");
  CHECK(exit_code(s) == 1);
  const Json summary = Json::parse(slurp(root / "eckart_default" / "summary.json"));
  CHECK(summary.at("status") == "fail");
  CHECK(summary.at("metrics").at("rows") == 27);
}

TEST_CASE("identical config and seed give byte-identical CSV") {
  for (const char* file : {"c1_gauge_equivalence.json", "c5_n1_spectrum.json", "c8_residual.json"}) {
    CAPTURE(file);
    const auto cfg = load_config(configs / file);
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunSummary ra = run_experiment(cfg, a), rb = run_experiment(cfg, b);
    REQUIRE(ra.artifacts.size() == rb.artifacts.size());
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(a / cfg.name)) {
      if (entry.path().extension() != ".csv") continue;
      CHECK(slurp(entry.path()) == slurp(b / cfg.name / entry.path().filename()));
      ++compared;
    }
    CHECK(compared >= 1);
  }
}

TEST_CASE("seed changes the samples but not the status") {
  for (const char* file : {"c1_gauge_equivalence.json", "c8_residual.json", "c7_eckart_order.json"}) {
    CAPTURE(file);
    auto cfg = load_config(configs / file);
    const fs::path root = scratch("seed");
    std::set<std::string> outputs;
    for (std::uint64_t seed : {cfg.seed, cfg.seed + 1, cfg.seed + 1234}) {
      cfg.seed = seed;
      const RunSummary s = run_experiment(cfg, root);
      CHECK(s.status == "pass");
      std::string all;
      for (const auto& entry : fs::directory_iterator(root / cfg.name))
        if (entry.path().extension() == ".csv") all += slurp(entry.path());
      outputs.insert(all);
    }
    CHECK(outputs.size() == 3);
  }
}

TEST_CASE("experiment errors land in the summary") {
  const auto cfg = parse_config_text(R"({"experiment": "n1-spectrum", "seed": 1,
    "system": {"masses": [1, 2], "body_term": {"kind": "harmonic_trap", "omega": 1}}})");
  const RunSummary s = run_experiment(cfg, scratch("error"));
  CHECK(s.status == "error");
  CHECK(s.reason.find("ConfigInvalid") != std::string::npos);
  CHECK(exit_code(s) == 2);

  // A gauge-equivalence run needs a linear chart.
  const auto pa = parse_config_text(R"({"experiment": "gauge-equivalence", "seed": 1,
    "system": {"masses": [1, 2, 3]}, "chart": {"kind": "principal_axes"}})");
  CHECK(run_experiment(pa, scratch("error")).status == "error");
}

TEST_CASE("orbit-invariants summary") {
  const auto cfg = parse_config_text(R"({"experiment": "orbit-invariants", "seed": 3, "name": "orbits",
    "params": {"gauges": ["linear", "principal_axes"], "starts": 2}})");
  const fs::path root = scratch("orbits");
  const RunSummary s = run_experiment(cfg, root);
  CHECK(s.status == "pass");
  CHECK(s.checks.size() == 4);
  CHECK(lines(root / "orbits" / "orbits.csv").size() == 5);
  const Json j = s.to_json();
  CHECK(j.at("checks").size() == 4);
  CHECK(j.at("wall_time").get<double>() >= 0.0);
  CHECK(parse_config(Json::parse(slurp(root / "orbits" / "config.json"))) == cfg);
}
