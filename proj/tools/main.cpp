#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fdodmd/cli.hpp"
#include "fdodmd/io.hpp"

namespace {

using fdodmd::cli::json;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> trajectory;
};

// Each flag replaces exactly one JSON path of the config document.
fdodmd::cli::ExperimentConfig load(const Overrides& o) {
  json doc = json::parse(fdodmd::read_file(o.config));
  if (o.seed) doc["/seed"_json_pointer] = *o.seed;
  if (o.out) doc["/output_dir"_json_pointer] = *o.out;
  if (o.trajectory) doc["/estimate/trajectory"_json_pointer] = *o.trajectory;
  return fdodmd::cli::resolve(fdodmd::cli::parse_config(doc));
}

void add_shared(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Overrides /seed");
  cmd->add_option("--out", o.out, "Overrides /output_dir");
}

void summarize(const json& report) {
  const std::string cmd = report["command"];
  if (cmd == "estimate") {
    const auto& r = report["result"];
    std::cout << r["method"].get<std::string>() << " K=" << r["k_len"] << " energy=" << r["energy"];
    if (r.contains("energy_unscaled")) std::cout << " energy_unscaled=" << r["energy_unscaled"];
    std::cout << "\n";
  } else if (cmd == "sweep") {
    std::cout << report["method"].get<std::string>() << " steps_to_stable_accuracy="
              << report["steps_to_stable_accuracy"] << "\n";
  } else if (cmd == "bound") {
    std::cout << report["rows"] << " rows, " << report["rows_above_bound"] << " above the bound\n";
  } else if (cmd == "simulate") {
    std::cout << report["samples"] << " samples written to "
              << report["config"]["output_dir"].get<std::string>() << "\n";
  } else {
    for (const auto& run : report["runs"]) {
      std::cout << "N=" << run["total_shots"] << " max deviation from uniform "
                << run["max_deviation_from_uniform"] << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground-state energy estimation from noisy observable trajectories"};
  app.require_subcommand(1);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "Write noiseless and noisy trajectories");
  auto* estimate = app.add_subcommand("estimate", "Estimate the ground-state energy from a trajectory");
  auto* sweep = app.add_subcommand("sweep", "Convergence curve over the data length K");
  auto* bound = app.add_subcommand("bound", "Denoising-error bound versus Monte-Carlo error");
  auto* allocate = app.add_subcommand("allocate", "Optimal shot allocation over time steps");
  for (auto* cmd : {simulate, estimate, sweep, bound, allocate}) add_shared(cmd, o);
  estimate->add_option("--trajectory", o.trajectory, "Overrides /estimate/trajectory");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = load(o);
    json report;
    if (simulate->parsed()) report = fdodmd::cli::cmd_simulate(cfg);
    if (estimate->parsed()) report = fdodmd::cli::cmd_estimate(cfg);
    if (sweep->parsed()) report = fdodmd::cli::cmd_sweep(cfg);
    if (bound->parsed()) report = fdodmd::cli::cmd_bound(cfg);
    if (allocate->parsed()) report = fdodmd::cli::cmd_allocate(cfg);
    summarize(report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
