#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "fdodmd/spectral_model.hpp"

namespace fdodmd {

template <class Scalar>
struct HankelMatrices {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x_shift;
};

/// Pair of (block) Hankel matrices X, X' of shape D*(R+1) x (K+1).
///
/// Row i*(R+1) + r holds trajectory r delayed by i: X(i*(R+1)+r, j) = d_r(t_{i+j})
/// and X'(i*(R+1)+r, j) = d_r(t_{i+j+1}). Real-only inputs are stored as real
/// matrices.
struct HankelPair {
  std::variant<HankelMatrices<double>, HankelMatrices<complex>> data;
  int delay = 0;
  int length = 0;
  int trajectories = 0;

  bool is_real() const noexcept { return data.index() == 0; }
  Eigen::MatrixXcd x() const;
  Eigen::MatrixXcd x_shift() const;
  Eigen::Index rows() const noexcept;
  Eigen::Index cols() const noexcept;
};

/// d_delay >= 1, k_len >= 0, every trajectory with >= k_len + d_delay + 1
/// samples and a common dt. A single trajectory gives the scalar Hankel pair.
HankelPair build_hankel(std::span<const Trajectory> trajectories, int d_delay, int k_len);

/// Truncated-SVD least-squares propagator A = X' X_delta^+.
///
/// The operator is kept in factored form A = left * right with
/// left = X' V_r S_r^{-1} and right = U_r^H; its nonzero spectrum is that of
/// the r x r matrix right * left, padded with zeros to the full side.
struct PropagatorFit {
  Eigen::MatrixXcd left;
  Eigen::MatrixXcd right;
  Eigen::VectorXcd eigenvalues;
  Eigen::VectorXd singular_values;
  double delta = 0.0;
  int rank_kept = 0;

  Eigen::Index side() const noexcept { return left.rows(); }
  Eigen::MatrixXcd dense_operator() const { return left * right; }
};

/// Keeps singular triplets with sigma_i >= delta * sigma_max (and sigma_i > 0).
PropagatorFit solve_propagator(const HankelPair& pair, double delta);

inline constexpr double kDefaultMagnitudeFloor = 1e-12;

struct GseEstimate {
  double energy = 0.0;
  double theta = 0.0;
  complex selected_eigenvalue{0.0, 0.0};
  /// Energies -arg(lambda)/dt of all admitted eigenvalues, ascending, with the
  /// matching damping rates -log|lambda|/dt.
  std::vector<double> all_energies;
  std::vector<double> all_damping;
  int rank_kept = 0;
};

/// energy = -max_l arg(lambda_l) / dt over eigenvalues with |lambda| > floor
/// (principal branch), theta = -log|lambda_sel| / dt.
GseEstimate extract_gse(const PropagatorFit& fit, double dt,
                        double magnitude_floor = kDefaultMagnitudeFloor);

/// floor((K + 1) / 2).
int default_delay(int k_len);
/// Samples consumed by a Hankel pair: K + D + 1.
std::size_t samples_needed(int k_len, int d_delay);

struct OdmdOptions {
  double delta = 0.1;
  double magnitude_floor = kDefaultMagnitudeFloor;
  std::optional<int> delay;  // defaults to floor((K + 1) / 2)
};

/// Single-trajectory estimate from the first K + D + 1 samples of `traj`.
GseEstimate odmd_estimate(const Trajectory& traj, int k_len, const OdmdOptions& options);

/// Denoise the first K + D + 1 samples with every gamma (ascending), stack the
/// reconstructions below the raw data (if include_raw) and fit the block
/// Hankel propagator.
GseEstimate fdodmd_estimate(const Trajectory& traj, std::span<const double> gammas,
                            bool include_raw, int k_len, const OdmdOptions& options);

}  // namespace fdodmd
