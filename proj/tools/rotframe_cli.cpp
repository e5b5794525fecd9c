#include <CLI11.hpp>

#include <iostream>

#include "rotframe/config.hpp"
#include "rotframe/error.hpp"
#include "rotframe/experiments.hpp"

using namespace rotframe;

int main(int argc, char** argv) {
  CLI::App app{"Rotating-frame N-body experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* run_cmd = app.add_subcommand("run", "run one experiment config");
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  run_cmd->add_option("-o,--output", out_dir, "output root (overrides ROTFRAME_OUTPUT_DIR and the config)");

  auto* list_cmd = app.add_subcommand("list", "list experiments and their parameters");
  bool verbose = false;
  list_cmd->add_flag("-v,--verbose", verbose, "show parameters with defaults");

  app.add_subcommand("schema", "print the JSON schema of the config format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand("list")) {
    for (const auto& e : experiment_catalog()) {
      std::cout << e.name << "  " << e.description << '\n';
      if (!verbose) continue;
      for (const auto& p : e.params)
        std::cout << "    " << p.name << " = " << p.default_value.dump() << "  " << p.description << '\n';
    }
    return 0;
  }
  if (app.got_subcommand("schema")) {
    std::cout << emit_schema().dump(2) << '\n';
    return 0;
  }

  try {
    std::optional<std::filesystem::path> root;
    if (!out_dir.empty()) root = out_dir;
    const RunSummary s = run(config_path, root);
    std::cout << s.experiment << " [" << s.name << "]: " << s.status;
    if (!s.reason.empty()) std::cout << " (" << s.reason << ")";
    std::cout << "  " << format_number(s.wall_time) << " s\n";
    for (const auto& c : s.checks)
      std::cout << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << format_number(c.value) << ' '
                << c.relation << ' ' << format_number(c.threshold) << '\n';
    for (const auto& a : s.artifacts) std::cout << "  wrote " << a << '\n';
    return exit_code(s);
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
