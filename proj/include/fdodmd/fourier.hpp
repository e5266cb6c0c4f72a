#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fdodmd/spectral_model.hpp"

namespace fdodmd {

/// x_hat[k] = sum_j x[j] exp(-2 pi i j k / n), any length n >= 1.
std::vector<complex> dft(std::span<const complex> x);
/// x[k] = (1/n) sum_j x_hat[j] exp(+2 pi i j k / n).
std::vector<complex> idft(std::span<const complex> xhat);

/// DFT of a trajectory with its angular bin frequencies
/// f_m = 2 pi m / (n dt).
struct SpectrumDFT {
  std::vector<complex> coefficients;
  std::vector<double> bin_frequencies;
  std::size_t length = 0;
  double dt = 1.0;
  bool real_only = false;
};

SpectrumDFT spectrum_dft(const Trajectory& traj);

/// Median of |c_m| over all bins; an even count averages the two central
/// magnitudes.
double median_magnitude(std::span<const complex> coefficients);

/// Hard-threshold rule tau = gamma * median |d_hat|.
struct ThresholdRule {
  double gamma = 1.0;

  explicit ThresholdRule(double g);
  double tau(std::span<const complex> coefficients) const;
};

/// Keeps DFT bins with |d_hat| >= tau (zeroing the rest) and transforms back.
/// Real-only inputs produce real-only outputs: the keep set is made
/// conjugate-symmetric and the residual imaginary part is checked (<= 1e-10)
/// and discarded.
Trajectory threshold_denoise(const Trajectory& traj, const ThresholdRule& rule);
Trajectory threshold_denoise_absolute(const Trajectory& traj, double tau);

/// Same thresholding applied to precomputed coefficients; returns complex
/// time-domain samples without any real-output enforcement.
std::vector<complex> threshold_reconstruct(std::span<const complex> coefficients,
                                           double tau);

/// One reconstruction per gamma, all thresholded from a single DFT of `traj`.
std::vector<Trajectory> denoise_ensemble(const Trajectory& traj,
                                         std::span<const double> gammas);

struct PeakEstimate {
  /// Signed energy estimate. Real-only data cannot distinguish +E from -E;
  /// for those the lower candidate -|E| is reported and sign_ambiguous is set.
  double energy = 0.0;
  double abs_energy = 0.0;
  std::size_t peak_bin = 0;
  std::size_t padded_length = 0;
  double peak_magnitude = 0.0;
  bool sign_ambiguous = false;
};

struct PeakOptions {
  bool include_dc = false;
};

/// Maximizes |d_hat| over the plain DFT bins.
PeakEstimate dft_peak_estimate(const Trajectory& traj, PeakOptions options = {});

/// Appends pad_factor * n zeros before maximizing |d_hat(f'_m)| over the
/// refined bins f'_m = 2 pi m / ((1 + pad_factor) n dt).
PeakEstimate zero_padded_peak_estimate(const Trajectory& traj, int pad_factor,
                                       PeakOptions options = {});

}  // namespace fdodmd
