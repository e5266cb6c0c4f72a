#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fdodmd/spectral_model.hpp"

namespace fdodmd {

struct GaussianNoise {
  double epsilon = 0.0;  // standard deviation
};

struct ShotNoise {
  std::int64_t shots_per_step = 1;
};

struct NoiseSpec {
  std::variant<GaussianNoise, ShotNoise> kind;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adds i.i.d. N(0, epsilon^2) draws to every real part, and to every
/// imaginary part as well unless the trajectory is real_only.
Trajectory gaussian_corrupt(const Trajectory& traj, double epsilon, std::uint64_t seed);

/// Hadamard-test model: each real (and, for complex trajectories, imaginary)
/// part becomes the mean of `shots_per_step` +/-1 outcomes with
/// P(+1) = (1 + x) / 2. Real and imaginary parts draw from independent
/// streams with their own budget.
Trajectory shot_sample(const Trajectory& traj, std::int64_t shots_per_step,
                       std::uint64_t seed);

Trajectory apply_noise(const Trajectory& traj, const NoiseSpec& spec);

/// Var of the shot mean: 4 pi (1 - pi) / n = (1 - s^2) / n.
double variance_of_mean(double s_re, std::int64_t n);

struct ShotAllocation {
  std::vector<std::int64_t> counts;
  std::int64_t total_budget = 0;

  std::int64_t assigned() const;
};

/// Oracle shot allocation minimizing sum_k (1 - s_k^2) / n_k under a total
/// budget: n_k = floor(N sqrt(1 - s_k^2) / sum_j sqrt(1 - s_j^2)).
/// Leftover shots from flooring stay unassigned.
ShotAllocation optimal_shot_allocation(std::span<const double> signal_re,
                                       std::int64_t total);

/// sum_k (1 - s_k^2) / n_k; zero-variance steps cost nothing even with no
/// shots, other steps with n_k = 0 make the objective infinite.
double allocation_objective(std::span<const double> signal_re,
                            std::span<const std::int64_t> counts);

}  // namespace fdodmd
