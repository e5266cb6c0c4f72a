#include "fdodmd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fdodmd/fourier.hpp"
#include "fdodmd/noise.hpp"
#include "fdodmd/rng.hpp"

namespace fdodmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

int window_delay(const EstimatorSpec& spec, int k_len) {
  return spec.odmd.delay.value_or(default_delay(k_len));
}

double q_term(double z) {
  // e^{-z}(1+z), with the z -> inf limit taken explicitly.
  if (z > 745.0) return 0.0;
  return std::exp(-z) * (1.0 + z);
}

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& m) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double tol = s.size() ? std::numeric_limits<double>::epsilon() *
                                    static_cast<double>(std::max(m.rows(), m.cols())) * s(0)
                              : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace

std::string EstimatorSpec::tag() const {
  struct Visitor {
    std::string operator()(const OdmdMethod&) const { return "odmd"; }
    std::string operator()(const FdodmdMethod& m) const {
      return m.include_raw ? "fdodmd" : "fdodmd-noraw";
    }
    std::string operator()(const DftPeakMethod&) const { return "dft"; }
    std::string operator()(const ZeroPadMethod&) const { return "zeropad"; }
  };
  return std::visit(Visitor{}, method);
}

double estimate_energy(const Trajectory& full, const EstimatorSpec& spec, int k_len) {
  struct Visitor {
    const Trajectory& full;
    const EstimatorSpec& spec;
    int k_len;

    double operator()(const OdmdMethod&) const {
      return odmd_estimate(full, k_len, spec.odmd).energy;
    }
    double operator()(const FdodmdMethod& m) const {
      return fdodmd_estimate(full, m.gammas, m.include_raw, k_len, spec.odmd).energy;
    }
    double operator()(const DftPeakMethod&) const {
      return dft_peak_estimate(window()).energy;
    }
    double operator()(const ZeroPadMethod& m) const {
      return zero_padded_peak_estimate(window(), m.pad_factor).energy;
    }
    Trajectory window() const {
      const std::size_t need = samples_needed(k_len, window_delay(spec, k_len));
      if (full.size() < need) {
        throw std::invalid_argument("estimate_energy: not enough samples for K=" +
                                    std::to_string(k_len));
      }
      return full.head(need);
    }
  };
  if (k_len < 0) throw std::invalid_argument("estimate_energy: k_len must be >= 0");
  return std::visit(Visitor{full, spec, k_len}, spec.method);
}

std::vector<int> default_k_grid(std::size_t n_samples, int step) {
  if (step < 1) throw std::invalid_argument("default_k_grid: step must be >= 1");
  std::vector<int> grid;
  for (int k = step;; k += step) {
    if (samples_needed(k, default_delay(k)) > n_samples) break;
    grid.push_back(k);
  }
  return grid;
}

ConvergenceCurve convergence_sweep(const Trajectory& full, const EstimatorSpec& estimator,
                                   double true_e0, std::span<const int> k_grid,
                                   const SweepOptions& options) {
  if (!std::isfinite(true_e0)) throw std::invalid_argument("convergence_sweep: bad target");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (k_grid[i] < 0 || (i > 0 && k_grid[i] <= k_grid[i - 1])) {
      throw std::invalid_argument("convergence_sweep: k_grid must be strictly increasing");
    }
  }
  if (options.rescale) options.rescale->validate();

  ConvergenceCurve curve;
  curve.method = estimator.tag();
  curve.target_energy = true_e0;
  curve.dt = full.dt();
  curve.points.resize(k_grid.size());

  auto evaluate = [&](std::size_t i) {
    ConvergencePoint& p = curve.points[i];
    p.k_len = k_grid[i];
    p.abs_error = kInf;
    p.estimate = std::numeric_limits<double>::quiet_NaN();
    if (samples_needed(p.k_len, window_delay(estimator, p.k_len)) > full.size()) {
      p.status = PointStatus::insufficient_data;
      return;
    }
    try {
      double e = estimate_energy(full, estimator, p.k_len);
      if (options.rescale) e = unscale_energy(e, *options.rescale);
      p.estimate = e;
      if (std::isfinite(e)) {
        p.abs_error = std::abs(e - true_e0);
        p.status = PointStatus::ok;
      } else {
        p.status = PointStatus::divergent;
      }
    } catch (const std::exception&) {
      p.status = PointStatus::divergent;
    }
  };

  if (!options.stop_when_stable) {
    parallel_for(k_grid.size(), evaluate);
    return curve;
  }
  if (!(options.stable_tolerance > 0.0) || options.stable_window < 1) {
    throw std::invalid_argument("convergence_sweep: invalid stability rule");
  }
  int run = 0;
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    evaluate(i);
    run = curve.points[i].abs_error < options.stable_tolerance ? run + 1 : 0;
    if (run >= options.stable_window) {
      curve.truncated = i + 1 < k_grid.size();
      curve.points.resize(i + 1);
      break;
    }
  }
  return curve;
}

std::optional<int> steps_to_stable_accuracy(const ConvergenceCurve& curve, double tol,
                                            int window) {
  if (curve.points.empty()) throw std::invalid_argument("steps_to_stable_accuracy: empty curve");
  if (!(tol > 0.0)) throw std::invalid_argument("steps_to_stable_accuracy: tol must be > 0");
  if (window < 1) throw std::invalid_argument("steps_to_stable_accuracy: window must be >= 1");
  int run = 0;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    run = curve.points[i].abs_error < tol ? run + 1 : 0;
    if (run == window) return curve.points[i + 1 - static_cast<std::size_t>(window)].k_len;
  }
  return std::nullopt;
}

double theorem1_rhs(std::span<const complex> s_hat, double tau, double epsilon) {
  if (s_hat.empty()) throw std::invalid_argument("theorem1_rhs: empty spectrum");
  if (!std::isfinite(epsilon) || !(epsilon > 0.0)) {
    throw std::invalid_argument("theorem1_rhs: epsilon must be positive and finite");
  }
  if (!std::isfinite(tau) || tau < 0.0) {
    throw std::invalid_argument("theorem1_rhs: tau must be finite and >= 0");
  }
  const double k = static_cast<double>(s_hat.size());
  const double var = epsilon * epsilon * k;  // variance of Re and Im of each noise bin
  const double scale = std::sqrt(2.0 * var);
  CompensatedSum noise_part;
  CompensatedSum signal_part;
  for (const complex& c : s_hat) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw std::invalid_argument("theorem1_rhs: non-finite coefficient");
    }
    const double mag = std::abs(c);
    if (tau >= mag) {
      const double gap = tau - mag;
      noise_part.add(q_term(gap * gap / (2.0 * var)));
    } else {
      noise_part.add(1.0);
    }
    const double re = std::erf((-c.real() + tau) / scale) - std::erf((-c.real() - tau) / scale);
    const double im = std::erf((-c.imag() + tau) / scale) - std::erf((-c.imag() - tau) / scale);
    signal_part.add(mag * mag / (4.0 * k) * re * im);
  }
  // 2 K eps^2 (1/K) sum(...) + sum(...), all divided by K.
  return (2.0 * epsilon * epsilon * noise_part.value() + signal_part.value()) / k;
}

MonteCarloStat theorem1_lhs_mc(const Trajectory& s, double tau, double epsilon, int trials,
                               std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("theorem1_lhs_mc: trials must be >= 2");
  if (!(tau >= 0.0)) throw std::invalid_argument("theorem1_lhs_mc: tau must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("theorem1_lhs_mc: epsilon must be >= 0");
  const Trajectory clean(std::vector<complex>(s.samples().begin(), s.samples().end()), s.dt(),
                         false);
  const double k = static_cast<double>(clean.size());
  const CounterRng root(seed);
  std::vector<double> errors(static_cast<std::size_t>(trials));
  parallel_for(errors.size(), [&](std::size_t t) {
    const Trajectory noisy = gaussian_corrupt(clean, epsilon, root.derive(t).seed());
    const Trajectory r = threshold_denoise_absolute(noisy, tau);
    CompensatedSum acc;
    for (std::size_t j = 0; j < clean.size(); ++j) acc.add(std::norm(r[j] - clean[j]));
    errors[t] = acc.value() / k;
  });
  CompensatedSum sum;
  for (double e : errors) sum.add(e);
  MonteCarloStat stat;
  stat.trials = trials;
  stat.mean = sum.value() / static_cast<double>(trials);
  CompensatedSum sq;
  for (double e : errors) sq.add((e - stat.mean) * (e - stat.mean));
  stat.std = std::sqrt(sq.value() / static_cast<double>(trials - 1));
  return stat;
}

double tau_from_gamma(const Trajectory& noisy, double gamma) {
  const ThresholdRule rule(gamma);
  return rule.tau(dft(noisy.samples()));
}

double bound_allowance(const BoundRow& row) {
  if (row.trials < 2) throw std::invalid_argument("bound_allowance: need at least 2 trials");
  const double n = static_cast<double>(row.trials);
  if (row.lhs_std > 1e-12 * std::abs(row.lhs_mean)) return 3.0 * row.lhs_std / std::sqrt(n);
  return 3.0 * row.lhs_mean / n;
}

bool within_bound(const BoundRow& row) {
  return row.lhs_mean <= row.rhs + bound_allowance(row) + 1e-12 * std::abs(row.rhs);
}

std::vector<double> default_tau_grid(std::span<const complex> s_hat, int n_tau) {
  if (n_tau < 2) throw std::invalid_argument("default_tau_grid: need at least 2 points");
  if (s_hat.empty()) throw std::invalid_argument("default_tau_grid: empty spectrum");
  double peak = 0.0;
  for (const auto& c : s_hat) peak = std::max(peak, std::abs(c));
  std::vector<double> grid(static_cast<std::size_t>(n_tau));
  for (int i = 0; i < n_tau; ++i) grid[i] = 2.0 * peak * i / (n_tau - 1);
  return grid;
}

std::vector<BoundRow> bound_report(const Trajectory& signal, std::span<const int> k_values,
                                   std::span<const double> taus, double epsilon, int trials,
                                   std::uint64_t seed, int n_tau) {
  if (k_values.empty()) throw std::invalid_argument("bound_report: no K values");
  std::vector<BoundRow> rows;
  for (int k : k_values) {
    if (k < 1 || static_cast<std::size_t>(k) > signal.size()) {
      throw std::invalid_argument("bound_report: K=" + std::to_string(k) +
                                  " outside the signal length");
    }
    const Trajectory s = signal.head(static_cast<std::size_t>(k));
    const auto s_hat = dft(s.samples());
    const std::vector<double> grid =
        taus.empty() ? default_tau_grid(s_hat, n_tau) : std::vector<double>(taus.begin(), taus.end());
    const std::uint64_t k_seed = CounterRng(seed).derive(static_cast<std::uint64_t>(k)).seed();
    for (double tau : grid) {
      const auto lhs = theorem1_lhs_mc(s, tau, epsilon, trials, k_seed);
      rows.push_back({tau, k, lhs.mean, lhs.std, theorem1_rhs(s_hat, tau, epsilon), trials});
    }
  }
  return rows;
}

WedinReport wedin_bound_report(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& x_shift,
                               const Eigen::MatrixXcd& dx, const Eigen::MatrixXcd& dx_shift) {
  if (x.size() == 0) throw std::invalid_argument("wedin_bound: empty X");
  if (x_shift.rows() != x.rows() || x_shift.cols() != x.cols() || dx.rows() != x.rows() ||
      dx.cols() != x.cols() || dx_shift.rows() != x.rows() || dx_shift.cols() != x.cols()) {
    throw std::invalid_argument("wedin_bound: dimension mismatch");
  }
  const double x_norm = spectral_norm(x);
  if (!(x_norm > 0.0)) throw std::invalid_argument("wedin_bound: X is zero");
  const Eigen::MatrixXcd x_pinv = pseudo_inverse(x);
  WedinReport rep;
  rep.kappa = x_norm * spectral_norm(x_pinv);
  rep.eta = spectral_norm(dx) / x_norm;
  rep.valid = rep.kappa * rep.eta < 1.0;
  if (!rep.valid) {
    rep.bound = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const Eigen::MatrixXcd a_bar = x_shift * x_pinv;
  const Eigen::MatrixXcd rho = x_shift - a_bar * x;
  const Eigen::MatrixXcd y = x_shift * pseudo_inverse(x.adjoint() * x);
  const double ke = rep.kappa * rep.eta;
  rep.bound = rep.kappa / (1.0 - ke) *
                  (spectral_norm(a_bar) * rep.eta + spectral_norm(rho) * ke / x_norm +
                   spectral_norm(dx_shift) / x_norm) +
              rep.eta * x_norm * spectral_norm(y);
  return rep;
}

double wedin_bound(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& x_shift,
                   const Eigen::MatrixXcd& dx, const Eigen::MatrixXcd& dx_shift) {
  const auto rep = wedin_bound_report(x, x_shift, dx, dx_shift);
  if (!rep.valid) {
    throw std::domain_error("wedin_bound: kappa * eta = " + std::to_string(rep.kappa * rep.eta) +
                            " >= 1, outside the small-perturbation regime");
  }
  return rep.bound;
}

int worker_count() {
  if (const char* env = std::getenv("FDODMD_NUM_THREADS")) {
    int n = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec == std::errc() && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(worker_count()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fdodmd
