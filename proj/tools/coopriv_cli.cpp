// coopriv: experiment runner.
//   coopriv run <config.json> [--set key=value ...] [--out DIR] [--seed N] [--jobs N]
//   coopriv validate <config.json>
// COOPRIV_OUT_DIR supplies the output directory when neither --out nor the config sets one.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coopriv/experiment.hpp"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kFailure = 1, kConfigParse = 2, kConstraint = 3, kIo = 4 };

int report(const std::string& code, const std::string& message, int exit_code, json extra = json::object()) {
  json err = {{"error", code}, {"message", message}};
  err.update(extra);
  std::cerr << err.dump() << "\n";
  return exit_code;
}

int exit_for(const coopriv::Error& e) {
  const std::string& code = e.code();
  if (code == "config-parse") return kConfigParse;
  if (code == "io-error") return kIo;
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative-perception privacy experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;

  auto* run = app.add_subcommand("run", "Run an experiment and write results.csv, summary.json, plot.svg");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->add_option("--set", overrides, "Override a config value, dotted path: key.sub=value")->take_all();
  run->add_option("--out", out_dir, "Output directory");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed");
  run->add_option("--jobs", jobs, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Check every config constraint without running");
  validate->add_option("config", config_path, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("usage", e.what(), kFailure);
  }

  try {
    json config = coopriv::load_config_json(config_path);

    if (validate->parsed()) {
      json list = json::array();
      for (const auto& v : coopriv::validate_config(config)) list.push_back({{"field", v.field}, {"message", v.message}});
      std::cout << json{{"valid", list.empty()}, {"violations", list}}.dump(2) << "\n";
      return list.empty() ? kOk : kConstraint;
    }

    for (const auto& o : overrides) coopriv::apply_override(config, o);
    if (seed_opt->count() > 0) config["seed"] = seed;

    coopriv::RunOptions options;
    options.jobs = jobs;
    if (!out_dir.empty()) {
      options.output_dir = out_dir;
    } else if (!(config.is_object() && config.contains("output_dir"))) {
      if (const char* env = std::getenv("COOPRIV_OUT_DIR"); env && *env) options.output_dir = env;
    }

    const auto outcome = coopriv::run_experiment(config, options);
    json files = json::array();
    for (const auto& f : outcome.files) files.push_back(f.string());
    std::cout << json{{"status", "ok"}, {"output_dir", outcome.output_dir.string()}, {"files", files}}.dump(2) << "\n";
    return kOk;
  } catch (const coopriv::ConstraintViolation& e) {
    json list = json::array();
    for (const auto& v : e.violations()) list.push_back({{"field", v.field}, {"message", v.message}});
    return report("constraint-violation", e.what(), kConstraint, {{"violations", list}});
  } catch (const coopriv::ConfigParseError& e) {
    return report("config-parse", e.what(), kConfigParse, {{"field", e.field()}});
  } catch (const coopriv::Error& e) {
    return report(e.code(), e.what(), exit_for(e));
  } catch (const std::exception& e) {
    return report("internal", e.what(), kFailure);
  }
}
