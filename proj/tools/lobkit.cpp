// Command-line front end: one subcommand per experiment kind plus `report`.
// Errors go to stderr as one JSON object; the exit status is nonzero.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lobkit/io/config.hpp"
#include "lobkit/io/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

enum Exit : int { Ok = 0, RunFailed = 1, BadInput = 2 };

int fail(const std::string& command, const std::vector<std::string>& errors, int code) {
  ordered_json j;
  j["status"] = "error";
  j["command"] = command;
  j["errors"] = errors;
  std::cerr << j.dump() << "\n";
  return code;
}

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::int64_t> replicas;
};

int run(const std::string& kind, const GlobalFlags& flags) {
  lobkit::io::ExperimentConfig cfg;
  try {
    const std::string text = flags.config.empty() ? std::string{} : lobkit::io::read_file(flags.config);
    cfg = lobkit::io::parse_config(text, kind);
  } catch (const lobkit::io::ConfigError& e) {
    return fail(kind, e.problems(), BadInput);
  } catch (const std::exception& e) {
    return fail(kind, {e.what()}, BadInput);
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out) cfg.output = *flags.out;
  if (flags.replicas) {
    if (*flags.replicas < 1) return fail(kind, {"--replicas must be >= 1"}, BadInput);
    cfg.replicas = *flags.replicas;
  }
  try {
    const lobkit::io::RunManifest m = lobkit::io::run_experiment(cfg);
    if (!m.ok()) {
      std::vector<std::string> errors;
      for (const auto& r : m.replicas)
        if (!r.ok) errors.push_back("replica " + std::to_string(r.index) + ": " + r.error);
      return fail(kind, errors, RunFailed);
    }
    std::cout << (fs::path(cfg.output) / "manifest.json").string() << "\n";
    return Ok;
  } catch (const std::exception& e) {
    return fail(kind, {e.what()}, RunFailed);
  }
}

int report(const std::string& kind, const std::vector<std::string>& inputs, const std::string& out) {
  try {
    const std::vector<fs::path> paths(inputs.begin(), inputs.end());
    for (const auto& p : lobkit::io::emit_report(paths, lobkit::io::parse_report_kind(kind), out))
      std::cout << p.string() << "\n";
    return Ok;
  } catch (const std::exception& e) {
    return fail("report", {e.what()}, BadInput);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limit order book and market impact experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lobkit::version_string));

  GlobalFlags flags;
  std::uint64_t seed = 0;
  std::string out;
  std::int64_t replicas = 0;
  app.add_option("--config", flags.config, "Experiment configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the configuration)");
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides the configuration)");
  auto* replicas_opt = app.add_option("--replicas", replicas, "Replica count (overrides the configuration)");

  std::string selected;
  for (const auto& kind : lobkit::io::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "Run a " + kind + " experiment");
    sub->fallthrough();
    sub->callback([&selected, kind] { selected = kind; });
  }

  std::string report_kind;
  std::vector<std::string> report_inputs;
  auto* rep = app.add_subcommand("report", "Tidy CSV and gnuplot data from experiment outputs");
  rep->fallthrough();
  rep->add_option("--kind", report_kind, "impact-curve, surface, response, decay or coimpact")->required();
  rep->add_option("inputs", report_inputs, "Input CSV files");
  rep->callback([&selected] { selected = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(selected.empty() ? "lobkit" : selected, {e.what()}, BadInput);
  }

  if (*seed_opt) flags.seed = seed;
  if (*out_opt) flags.out = out;
  if (*replicas_opt) flags.replicas = replicas;
  if (selected == "report") return report(report_kind, report_inputs, flags.out.value_or("report"));
  return run(selected, flags);
}
