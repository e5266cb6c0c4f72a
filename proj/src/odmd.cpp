#include "fdodmd/odmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fdodmd/fourier.hpp"

namespace fdodmd {

namespace {

template <class Scalar>
HankelMatrices<Scalar> fill_hankel(std::span<const Trajectory> trajectories, int d_delay,
                                   int k_len) {
  const auto stacked = static_cast<Eigen::Index>(trajectories.size());
  const Eigen::Index rows = static_cast<Eigen::Index>(d_delay) * stacked;
  const Eigen::Index cols = k_len + 1;
  HankelMatrices<Scalar> h;
  h.x.resize(rows, cols);
  h.x_shift.resize(rows, cols);
  for (Eigen::Index r = 0; r < stacked; ++r) {
    const auto samples = trajectories[static_cast<std::size_t>(r)].samples();
    for (Eigen::Index i = 0; i < d_delay; ++i) {
      const Eigen::Index row = i * stacked + r;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if constexpr (std::is_same_v<Scalar, double>) {
          h.x(row, j) = samples[static_cast<std::size_t>(i + j)].real();
          h.x_shift(row, j) = samples[static_cast<std::size_t>(i + j + 1)].real();
        } else {
          h.x(row, j) = samples[static_cast<std::size_t>(i + j)];
          h.x_shift(row, j) = samples[static_cast<std::size_t>(i + j + 1)];
        }
      }
    }
  }
  return h;
}

template <class Scalar>
PropagatorFit solve_impl(const HankelMatrices<Scalar>& h, double delta) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!h.x.allFinite() || !h.x_shift.allFinite()) {
    throw std::invalid_argument("solve_propagator: non-finite data");
  }
  Eigen::BDCSVD<Matrix> svd(h.x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw std::runtime_error("solve_propagator: SVD failed");
  }
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || !(sigma(0) > 0.0)) {
    throw std::invalid_argument("solve_propagator: data matrix is zero");
  }
  const double cutoff = delta * sigma(0);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) >= cutoff && sigma(rank) > 0.0) ++rank;

  const Matrix v = svd.matrixV().leftCols(rank);
  const Matrix u = svd.matrixU().leftCols(rank);
  const Eigen::VectorXd inv_sigma = sigma.head(rank).cwiseInverse();
  const Matrix left = (h.x_shift * v) * inv_sigma.asDiagonal();
  const Matrix right = u.adjoint();
  const Matrix reduced = right * left;

  PropagatorFit fit;
  fit.delta = delta;
  fit.rank_kept = static_cast<int>(rank);
  fit.singular_values = sigma;
  fit.left = left.template cast<complex>();
  fit.right = right.template cast<complex>();
  fit.eigenvalues = Eigen::VectorXcd::Zero(h.x.rows());
  if constexpr (std::is_same_v<Scalar, double>) {
    Eigen::EigenSolver<Matrix> es(reduced, false);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("solve_propagator: eigenvalue iteration did not converge");
    }
    fit.eigenvalues.head(rank) = es.eigenvalues();
  } else {
    Eigen::ComplexEigenSolver<Matrix> es(reduced, false);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("solve_propagator: eigenvalue iteration did not converge");
    }
    fit.eigenvalues.head(rank) = es.eigenvalues();
  }
  if (!fit.eigenvalues.allFinite()) {
    throw std::runtime_error("solve_propagator: non-finite eigenvalues");
  }
  return fit;
}

GseEstimate estimate_from_stack(std::span<const Trajectory> stack, int k_len, int delay,
                                const OdmdOptions& options) {
  const auto pair = build_hankel(stack, delay, k_len);
  const auto fit = solve_propagator(pair, options.delta);
  return extract_gse(fit, stack.front().dt(), options.magnitude_floor);
}

int resolve_delay(int k_len, const OdmdOptions& options) {
  if (k_len < 0) throw std::invalid_argument("ODMD: k_len must be >= 0");
  return options.delay.value_or(default_delay(k_len));
}

Trajectory data_window(const Trajectory& traj, int k_len, int delay) {
  const std::size_t need = samples_needed(k_len, delay);
  if (traj.size() < need) {
    throw std::invalid_argument("ODMD: K=" + std::to_string(k_len) + ", D=" +
                                std::to_string(delay) + " needs " + std::to_string(need) +
                                " samples, trajectory has " + std::to_string(traj.size()));
  }
  return traj.head(need);
}

}  // namespace

Eigen::MatrixXcd HankelPair::x() const {
  return std::visit([](const auto& h) -> Eigen::MatrixXcd { return h.x.template cast<complex>(); },
                    data);
}

Eigen::MatrixXcd HankelPair::x_shift() const {
  return std::visit(
      [](const auto& h) -> Eigen::MatrixXcd { return h.x_shift.template cast<complex>(); },
      data);
}

Eigen::Index HankelPair::rows() const noexcept {
  return std::visit([](const auto& h) { return h.x.rows(); }, data);
}

Eigen::Index HankelPair::cols() const noexcept {
  return std::visit([](const auto& h) { return h.x.cols(); }, data);
}

int default_delay(int k_len) { return (k_len + 1) / 2; }

std::size_t samples_needed(int k_len, int d_delay) {
  return static_cast<std::size_t>(k_len) + static_cast<std::size_t>(d_delay) + 1;
}

HankelPair build_hankel(std::span<const Trajectory> trajectories, int d_delay, int k_len) {
  if (trajectories.empty()) throw std::invalid_argument("build_hankel: no trajectories");
  if (d_delay < 1) throw std::invalid_argument("build_hankel: delay must be >= 1");
  if (k_len < 0) throw std::invalid_argument("build_hankel: k_len must be >= 0");
  const std::size_t need = samples_needed(k_len, d_delay);
  const double dt = trajectories.front().dt();
  bool all_real = true;
  for (const auto& t : trajectories) {
    if (t.size() < need) {
      throw std::invalid_argument("build_hankel: trajectory has " + std::to_string(t.size()) +
                                  " samples, needs " + std::to_string(need));
    }
    if (t.dt() != dt) throw std::invalid_argument("build_hankel: mismatched dt");
    all_real = all_real && t.real_only();
  }
  HankelPair pair;
  pair.delay = d_delay;
  pair.length = k_len;
  pair.trajectories = static_cast<int>(trajectories.size());
  if (all_real) {
    pair.data = fill_hankel<double>(trajectories, d_delay, k_len);
  } else {
    pair.data = fill_hankel<complex>(trajectories, d_delay, k_len);
  }
  return pair;
}

PropagatorFit solve_propagator(const HankelPair& pair, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("solve_propagator: delta must lie in [0, 1)");
  }
  return std::visit([delta](const auto& h) { return solve_impl(h, delta); }, pair.data);
}

GseEstimate extract_gse(const PropagatorFit& fit, double dt, double magnitude_floor) {
  if (!(dt > 0.0)) throw std::invalid_argument("extract_gse: dt must be positive");
  if (!(magnitude_floor >= 0.0)) {
    throw std::invalid_argument("extract_gse: magnitude_floor must be >= 0");
  }
  struct Mode {
    double energy;
    double damping;
  };
  std::vector<Mode> modes;
  GseEstimate est;
  est.rank_kept = fit.rank_kept;
  double best_phase = -std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < fit.eigenvalues.size(); ++l) {
    const complex lambda = fit.eigenvalues(l);
    const double mag = std::abs(lambda);
    if (!(mag > magnitude_floor)) continue;
    const double phase = std::arg(lambda);
    modes.push_back({-phase / dt, -std::log(mag) / dt});
    if (phase > best_phase) {
      best_phase = phase;
      est.selected_eigenvalue = lambda;
    }
  }
  if (modes.empty()) {
    throw std::runtime_error("extract_gse: no eigenvalue above the magnitude floor");
  }
  est.energy = -best_phase / dt;
  est.theta = -std::log(std::abs(est.selected_eigenvalue)) / dt;
  std::sort(modes.begin(), modes.end(),
            [](const Mode& a, const Mode& b) { return a.energy < b.energy; });
  est.all_energies.reserve(modes.size());
  est.all_damping.reserve(modes.size());
  for (const auto& m : modes) {
    est.all_energies.push_back(m.energy);
    est.all_damping.push_back(m.damping);
  }
  return est;
}

GseEstimate odmd_estimate(const Trajectory& traj, int k_len, const OdmdOptions& options) {
  const int delay = resolve_delay(k_len, options);
  const Trajectory window = data_window(traj, k_len, delay);
  return estimate_from_stack(std::span(&window, 1), k_len, delay, options);
}

GseEstimate fdodmd_estimate(const Trajectory& traj, std::span<const double> gammas,
                            bool include_raw, int k_len, const OdmdOptions& options) {
  if (gammas.empty() && !include_raw) {
    throw std::invalid_argument("fdodmd_estimate: empty stack (no gammas, raw excluded)");
  }
  const int delay = resolve_delay(k_len, options);
  Trajectory window = data_window(traj, k_len, delay);
  std::vector<Trajectory> stack;
  stack.reserve(gammas.size() + 1);
  if (include_raw) stack.push_back(window);
  if (!gammas.empty()) {
    std::vector<double> sorted(gammas.begin(), gammas.end());
    std::stable_sort(sorted.begin(), sorted.end());
    for (auto& r : denoise_ensemble(window, sorted)) stack.push_back(std::move(r));
  }
  return estimate_from_stack(stack, k_len, delay, options);
}

}  // namespace fdodmd
