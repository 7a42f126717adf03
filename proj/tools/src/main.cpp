#include "lab/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace pimsner;
using namespace pimsner::lab;

namespace {

struct Overrides {
  std::string preset;
  std::string config;
  std::string N;
  std::optional<int> M;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::string created;
};

RunConfig apply(RunConfig cfg, const Overrides& o) {
  if (!o.N.empty()) {
    const auto [lo, hi] = parse_range(o.N);
    cfg.N_lo = lo;
    cfg.N_hi = hi;
  }
  if (o.M) cfg.M = *o.M;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.format.empty()) {
    cfg.format = o.format;
  } else if (o.out.size() > 4 && o.out.compare(o.out.size() - 4, 4, ".csv") == 0) {
    cfg.format = "csv";
  }
  if (!o.created.empty()) cfg.created = o.created;
  cfg.resolve();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pimsner-lab: truncated Fock-module computations for Cuntz-Pimsner algebras"};
  std::string command;
  Overrides o;
  app.add_option("command", command, "validate | schur | lift-check | expectation | certificate | report")
      ->required();
  auto* preset = app.add_option("--preset", o.preset, "cuntz2 | crossed-z3 | twisted2 | rotation-m2");
  auto* config = app.add_option("--config", o.config, "JSON configuration file");
  preset->excludes(config);
  app.add_option("--N", o.N, "Fejer index range a..b");
  app.add_option("--M", o.M, "Fock window size");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--out", o.out, "output path (stdout if omitted)");
  app.add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--created", o.created, "timestamp recorded in outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const Command cmd = parse_command(command);
    std::vector<RunConfig> configs;
    if (!o.config.empty()) {
      configs.push_back(apply(load_config_file(o.config), o));
    } else if (!o.preset.empty()) {
      configs.push_back(apply(make_preset(o.preset), o));
    } else {
      for (const auto& name : preset_names()) configs.push_back(apply(make_preset(name), o));
    }

    ReportBundle bundle;
    bundle.command = command_name(cmd);
    bundle.created = configs.front().created;
    for (const auto& cfg : configs) bundle.runs.push_back(run(cmd, cfg));

    const RunConfig& first = configs.front();
    write_output(serialize(bundle, first.format), first.out);
    const int rc = exit_code(bundle);
    if (!first.out.empty()) {
      std::cerr << command << ": " << (rc == 0 ? "pass" : "FAIL") << " -> " << first.out << "\n";
    }
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid correspondence: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
