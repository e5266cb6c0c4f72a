#include "fdodmd/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fdodmd/rng.hpp"

namespace fdodmd {

namespace {

enum Stream : std::uint64_t {
  kGaussianReal = 0,
  kGaussianImag = 1,
  kShotReal = 2,
  kShotImag = 3,
};

// Exact signals may overshoot |x| = 1 by rounding.
constexpr double kProbabilitySlack = 1e-12;

double checked_probability_input(double x) {
  if (!std::isfinite(x) || std::abs(x) > 1.0 + kProbabilitySlack) {
    throw std::invalid_argument("shot_sample: |value| = " + std::to_string(std::abs(x)) +
                                " exceeds 1, not a valid Hadamard-test mean");
  }
  return std::clamp(x, -1.0, 1.0);
}

double shot_mean(const CounterRng& rng, std::uint64_t stream, std::uint64_t k,
                 double x, std::int64_t shots) {
  const double p_plus = 0.5 * (1.0 + checked_probability_input(x));
  if (p_plus == 1.0) return 1.0;
  if (p_plus == 0.0) return -1.0;
  std::int64_t plus = 0;
  for (std::int64_t i = 0; i < shots; ++i) {
    if (rng.uniform(stream, k, static_cast<std::uint64_t>(i)) < p_plus) ++plus;
  }
  return static_cast<double>(2 * plus - shots) / static_cast<double>(shots);
}

}  // namespace

void NoiseSpec::validate() const {
  if (const auto* g = std::get_if<GaussianNoise>(&kind)) {
    if (!(g->epsilon >= 0.0) || !std::isfinite(g->epsilon)) {
      throw std::invalid_argument("NoiseSpec: epsilon must be >= 0");
    }
  } else if (std::get<ShotNoise>(kind).shots_per_step < 1) {
    throw std::invalid_argument("NoiseSpec: shots_per_step must be >= 1");
  }
}

Trajectory gaussian_corrupt(const Trajectory& traj, double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("gaussian_corrupt: epsilon must be >= 0");
  }
  std::vector<complex> out(traj.samples().begin(), traj.samples().end());
  if (epsilon == 0.0) return Trajectory(std::move(out), traj.dt(), traj.real_only());
  const CounterRng rng(seed);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double re = out[k].real() + epsilon * rng.normal(kGaussianReal, k);
    const double im =
        traj.real_only() ? 0.0 : out[k].imag() + epsilon * rng.normal(kGaussianImag, k);
    out[k] = complex(re, im);
  }
  return Trajectory(std::move(out), traj.dt(), traj.real_only());
}

Trajectory shot_sample(const Trajectory& traj, std::int64_t shots_per_step,
                       std::uint64_t seed) {
  if (shots_per_step < 1) {
    throw std::invalid_argument("shot_sample: shots_per_step must be >= 1");
  }
  const CounterRng rng(seed);
  std::vector<complex> out(traj.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double re = shot_mean(rng, kShotReal, k, traj[k].real(), shots_per_step);
    const double im = traj.real_only()
                          ? 0.0
                          : shot_mean(rng, kShotImag, k, traj[k].imag(), shots_per_step);
    out[k] = complex(re, im);
  }
  return Trajectory(std::move(out), traj.dt(), traj.real_only());
}

Trajectory apply_noise(const Trajectory& traj, const NoiseSpec& spec) {
  spec.validate();
  if (const auto* g = std::get_if<GaussianNoise>(&spec.kind)) {
    return gaussian_corrupt(traj, g->epsilon, spec.seed);
  }
  return shot_sample(traj, std::get<ShotNoise>(spec.kind).shots_per_step, spec.seed);
}

double variance_of_mean(double s_re, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("variance_of_mean: n must be >= 1");
  if (std::abs(s_re) > 1.0) {
    throw std::invalid_argument("variance_of_mean: |s| must be <= 1");
  }
  const double p = 0.5 * (1.0 + s_re);
  return 4.0 * p * (1.0 - p) / static_cast<double>(n);
}

std::int64_t ShotAllocation::assigned() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ShotAllocation optimal_shot_allocation(std::span<const double> signal_re,
                                       std::int64_t total) {
  if (total < 0) throw std::invalid_argument("optimal_shot_allocation: negative budget");
  if (signal_re.empty()) throw std::invalid_argument("optimal_shot_allocation: empty signal");
  std::vector<double> weight(signal_re.size());
  double norm = 0.0;
  for (std::size_t k = 0; k < signal_re.size(); ++k) {
    const double s = signal_re[k];
    if (!std::isfinite(s) || std::abs(s) > 1.0 + kProbabilitySlack) {
      throw std::invalid_argument("optimal_shot_allocation: |s| must be <= 1");
    }
    const double clamped = std::clamp(s, -1.0, 1.0);
    weight[k] = std::sqrt(std::max(0.0, 1.0 - clamped * clamped));
    norm += weight[k];
  }
  if (norm == 0.0) {
    throw std::invalid_argument(
        "optimal_shot_allocation: every step has |s| = 1, so no step has variance "
        "to reduce and the allocation is undefined");
  }
  ShotAllocation alloc{std::vector<std::int64_t>(signal_re.size(), 0), total};
  const double budget = static_cast<double>(total);
  for (std::size_t k = 0; k < weight.size(); ++k) {
    if (weight[k] == 0.0) continue;
    // Rounding can land a mathematically integral share just below the
    // integer; a relative nudge recovers it.
    const double share = budget * weight[k] / norm;
    alloc.counts[k] = static_cast<std::int64_t>(std::floor(share * (1.0 + 1e-12)));
  }
  // The nudge must never push the sum past the budget.
  while (alloc.assigned() > total) {
    auto it = std::max_element(alloc.counts.begin(), alloc.counts.end());
    --*it;
  }
  return alloc;
}

double allocation_objective(std::span<const double> signal_re,
                            std::span<const std::int64_t> counts) {
  if (signal_re.size() != counts.size()) {
    throw std::invalid_argument("allocation_objective: length mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double var = std::max(0.0, 1.0 - signal_re[k] * signal_re[k]);
    if (var == 0.0) continue;
    if (counts[k] <= 0) return std::numeric_limits<double>::infinity();
    total += var / static_cast<double>(counts[k]);
  }
  return total;
}

}  // namespace fdodmd
