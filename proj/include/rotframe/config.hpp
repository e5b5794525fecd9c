#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rotframe/gauge.hpp"

namespace rotframe {

using Json = nlohmann::ordered_json;

struct PairTermConfig {
  std::string kind;  // spring | coulomb2d
  double k = 0.0;
  double rest_length = 0.0;
  double strength = 0.0;  // coulomb2d: -strength ln d
  std::vector<std::pair<int, int>> pairs;  // empty: every pair
};

// harmonic_trap: m omega^2 r^2 / 2 on every particle.
struct BodyTermConfig {
  std::string kind;
  double omega = 0.0;
};

struct SystemConfig {
  std::vector<double> masses;
  double hbar = 1.0;
  std::vector<PairTermConfig> pair_terms;
  std::optional<BodyTermConfig> body_term;
};

struct ChartConfig {
  std::string kind;  // linear | linear_cm | principal_axes | eckart
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> Z;  // eckart reference shape, interleaved
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string name;  // artifact sub-directory; defaults to the experiment name
  std::string output_dir;
  std::optional<SystemConfig> system;
  std::optional<ChartConfig> chart;
  Json params = Json::object();  // defaults filled in by the parser
};

enum class ParamType { Number, Integer, Boolean, String, NumberArray, IntegerArray, StringArray };

struct ParamSpec {
  std::string name;
  ParamType type;
  Json default_value;
  std::string description;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  bool needs_system = false;
  bool needs_chart = false;
  std::vector<ParamSpec> params;
};

// The eight experiments with their parameter tables. The parser and the schema both read these.
const std::vector<ExperimentInfo>& experiment_catalog();
const ExperimentInfo& experiment_info(std::string_view name);

// ConfigInvalid with the offending field path (or line for syntax errors).
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical form with every default spelled out; parse_config(to_json(c)) reproduces c.
Json to_json(const ExperimentConfig& config);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// JSON Schema (draft-07) for the config format.
Json emit_schema();

ParticleSystem build_system(const SystemConfig& config);
GaugeChart build_gauge(const ChartConfig& config, const ParticleSystem& sys);

}  // namespace rotframe
