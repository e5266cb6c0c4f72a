#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fdodmd/odmd.hpp"
#include "fdodmd/spectral_model.hpp"

namespace fdodmd {

struct OdmdMethod {};
struct FdodmdMethod {
  std::vector<double> gammas;
  bool include_raw = true;
};
struct DftPeakMethod {};
struct ZeroPadMethod {
  int pad_factor = 0;
};

/// Which estimator a sweep runs, plus the shared Hankel/SVD settings. The
/// Fourier-peak methods ignore delta and the magnitude floor but still
/// read the same K + D + 1 sample window as ODMD.
struct EstimatorSpec {
  std::variant<OdmdMethod, FdodmdMethod, DftPeakMethod, ZeroPadMethod> method;
  OdmdOptions odmd;

  std::string tag() const;
};

/// Energy estimate (scaled units) from the first K + D + 1 samples of `full`.
double estimate_energy(const Trajectory& full, const EstimatorSpec& spec, int k_len);

enum class PointStatus { ok, divergent, insufficient_data };

struct ConvergencePoint {
  int k_len = 0;
  double abs_error = 0.0;  // +inf unless status == ok
  double estimate = 0.0;
  PointStatus status = PointStatus::ok;
};

struct ConvergenceCurve {
  std::vector<ConvergencePoint> points;
  std::string method;
  double target_energy = 0.0;
  double dt = 1.0;
  /// Set when the sweep stopped early after finding a stable window.
  bool truncated = false;
};

struct SweepOptions {
  /// Compare unscaled estimates against a target given in raw units.
  std::optional<RescaleParams> rescale;
  /// Stop as soon as `stable_window` consecutive points are below
  /// `stable_tolerance`; the remaining grid points are not evaluated.
  bool stop_when_stable = false;
  double stable_tolerance = 1e-3;
  int stable_window = 10;
};

/// {step, 2 step, ...} up to the largest K whose K + D + 1 window fits in
/// n_samples.
std::vector<int> default_k_grid(std::size_t n_samples, int step = 5);

ConvergenceCurve convergence_sweep(const Trajectory& full, const EstimatorSpec& estimator,
                                   double true_e0, std::span<const int> k_grid,
                                   const SweepOptions& options = {});

/// First K of the earliest run of `window` consecutive points with
/// abs_error < tol, or nullopt.
std::optional<int> steps_to_stable_accuracy(const ConvergenceCurve& curve, double tol,
                                            int window);

/// Right side of the denoising-error bound normalized by 1/K, for an
/// absolute threshold tau on the noiseless DFT s_hat (K = s_hat.size()).
double theorem1_rhs(std::span<const complex> s_hat, double tau, double epsilon);

struct MonteCarloStat {
  double mean = 0.0;
  double std = 0.0;
  int trials = 0;
};

/// (1/K) ||r - s||^2 averaged over trials, where r is the absolute-tau
/// denoising of s + xi with Re xi, Im xi ~ N(0, epsilon^2) independently.
MonteCarloStat theorem1_lhs_mc(const Trajectory& s, double tau, double epsilon, int trials,
                               std::uint64_t seed);

/// gamma * median |d_hat| for the practical median-relative rule.
double tau_from_gamma(const Trajectory& noisy, double gamma);

struct BoundRow {
  double tau = 0.0;
  int k_len = 0;
  double lhs_mean = 0.0;
  double lhs_std = 0.0;
  double rhs = 0.0;
  int trials = 0;
};

/// Monte-Carlo slack for lhs_mean <= rhs: three standard errors. When every
/// trial gave the same value the spread says nothing about rare events
/// (e.g. a bin near tau that was never kept), and the rule-of-three bound
/// 3 * lhs_mean / trials is used instead.
double bound_allowance(const BoundRow& row);
bool within_bound(const BoundRow& row);

/// n_tau evenly spaced thresholds on [0, 2 max|s_hat|].
std::vector<double> default_tau_grid(std::span<const complex> s_hat, int n_tau = 40);

/// Bound rows for the first k samples of `signal` for every k in k_values.
/// When taus is empty each k gets its own default grid.
std::vector<BoundRow> bound_report(const Trajectory& signal, std::span<const int> k_values,
                                   std::span<const double> taus, double epsilon, int trials,
                                   std::uint64_t seed, int n_tau = 40);

struct WedinReport {
  double bound = 0.0;
  double kappa = 0.0;
  double eta = 0.0;
  bool valid = false;  // false when kappa * eta >= 1
};

/// Perturbation bound on ||A_tilde - A_bar||_2 for the least-squares
/// propagator under X -> X + dX, X' -> X' + dXp.
WedinReport wedin_bound_report(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& x_shift,
                               const Eigen::MatrixXcd& dx, const Eigen::MatrixXcd& dx_shift);

/// Same, throwing std::domain_error when kappa * eta >= 1.
double wedin_bound(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& x_shift,
                   const Eigen::MatrixXcd& dx, const Eigen::MatrixXcd& dx_shift);

/// Worker count: FDODMD_NUM_THREADS if set and positive, otherwise the
/// hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fdodmd
