#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fdodmd/analysis.hpp"
#include "fdodmd/spectral_model.hpp"

namespace fdodmd::cli {

using json = nlohmann::ordered_json;

struct SpectrumConfig {
  std::string source = "ladder";  // file | ladder | random | list
  std::string path;               // file
  int levels = 10;                // ladder, random
  double gap = 0.2;
  double width = 1.0;
  std::uint64_t seed = 1;         // random
  std::vector<double> eigenvalues;  // list
  bool rescale = true;
  double alpha = kDefaultAlpha;
};

struct MethodConfig {
  std::string name = "odmd";  // odmd | fdodmd | dft | zeropad
  std::vector<double> gammas;
  bool include_raw = true;
  int pad_factor = 0;
};

struct ExperimentConfig {
  SpectrumConfig spectrum;
  std::optional<double> p0 = 0.2;  // absent for file spectra, which carry overlaps
  double dt = 1.0;
  int k_max = 1500;
  double theta = 0.0;
  bool real_only = true;

  std::string noise_kind = "gaussian";  // gaussian | shot
  double epsilon = 0.1;
  std::int64_t shots = 1000;
  std::uint64_t seed = 0;

  MethodConfig method;
  std::optional<double> delta;  // resolved to epsilon for Gaussian noise when unset
  double magnitude_floor = kDefaultMagnitudeFloor;
  std::optional<int> delay;

  std::string output_dir = "out";

  std::string trajectory;         // estimate input; defaults to <output_dir>/noisy.csv
  std::optional<int> k_len;       // estimate; defaults to the largest K that fits

  int k_step = 5;
  double tolerance = 1e-3;
  int window = 10;

  std::vector<int> bound_k{100, 200, 400};
  int trials = 100;
  int n_tau = 40;
  std::vector<double> taus;

  std::vector<std::int64_t> total_shots{100000};
};

/// Strict parse: unknown keys and fields of an unselected method are errors.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fills every default (delta, trajectory path) and checks cross-field
/// constraints and that referenced files exist.
ExperimentConfig resolve(ExperimentConfig cfg);

/// Fully populated document; parse_config(to_json(c)) == c.
json to_json(const ExperimentConfig& cfg);

struct Problem {
  std::vector<double> raw_eigenvalues;
  Spectrum spectrum;  // the one driving the signal (rescaled when enabled)
  std::optional<RescaleParams> rescale;
  double target_energy = 0.0;  // raw-unit ground energy
};

Problem build_problem(const ExperimentConfig& cfg);
Trajectory noiseless_signal(const ExperimentConfig& cfg, const Problem& problem);
Trajectory noisy_signal(const ExperimentConfig& cfg, const Trajectory& clean);
EstimatorSpec estimator_spec(const ExperimentConfig& cfg);

/// Largest K with K + floor((K+1)/2) + 1 <= n_samples (or with the fixed
/// delay when one is configured).
int largest_k(std::size_t n_samples, std::optional<int> delay);

/// Each command writes its outputs under cfg.output_dir, re-reads them for
/// validation and returns the report that was written.
json cmd_simulate(const ExperimentConfig& cfg);
json cmd_estimate(const ExperimentConfig& cfg);
json cmd_sweep(const ExperimentConfig& cfg);
json cmd_bound(const ExperimentConfig& cfg);
json cmd_allocate(const ExperimentConfig& cfg);

}  // namespace fdodmd::cli
