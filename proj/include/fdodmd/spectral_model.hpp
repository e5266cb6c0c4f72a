#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace fdodmd {

using complex = std::complex<double>;

/// Eigenvalues with squared reference-state overlaps. Every signal in the
/// library is generated from one of these.
///
/// Construction validates: equal lengths, nondecreasing eigenvalues,
/// nonnegative finite overlaps summing to one within 1e-12.
class Spectrum {
 public:
  Spectrum(std::vector<double> eigenvalues, std::vector<double> overlaps);

  /// Sorts (eigenvalue, overlap) pairs by eigenvalue before validating.
  static Spectrum from_unsorted(std::vector<double> eigenvalues,
                                std::vector<double> overlaps);

  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const std::vector<double>& overlaps() const noexcept { return overlaps_; }
  std::size_t size() const noexcept { return eigenvalues_.size(); }
  double ground_energy() const noexcept { return eigenvalues_.front(); }

 private:
  std::vector<double> eigenvalues_;
  std::vector<double> overlaps_;
};

/// Affine map E = beta0 + beta1 * E_raw that places a raw spectrum (padded by
/// alpha on both sides) inside [-pi/(4 dt), pi/(4 dt)].
struct RescaleParams {
  double beta0 = 0.0;
  double beta1 = 1.0;
  double alpha = 0.2;
  double dt = 1.0;
  double lower_bound = 0.0;  // min(raw) - alpha
  double upper_bound = 0.0;  // max(raw) + alpha

  double forward(double raw) const noexcept { return beta0 + beta1 * raw; }
  void validate() const;
};

struct RescaledEigenvalues {
  RescaleParams params;
  std::vector<double> eigenvalues;
};

inline constexpr double kDefaultAlpha = 0.2;

RescaledEigenvalues rescale_spectrum(std::span<const double> raw_eigenvalues,
                                     double dt, double alpha = kDefaultAlpha);

double unscale_energy(double e, const RescaleParams& params);

/// Returns {p0, (1-p0)/(N-1), ...}: a reference state with ground overlap p0
/// and the remainder spread evenly over the excited states.
std::vector<double> make_reference_overlaps(int n_levels, double p0);

/// Uniformly sampled time series s(t_k), t_k = k dt.
///
/// When real_only is set every imaginary part is exactly zero; the
/// constructor rejects samples that violate this.
class Trajectory {
 public:
  Trajectory(std::vector<complex> samples, double dt, bool real_only);

  /// Real part of `samples`, flagged real_only.
  static Trajectory from_real(std::span<const double> samples, double dt);

  std::span<const complex> samples() const noexcept { return samples_; }
  const complex& operator[](std::size_t k) const { return samples_[k]; }
  std::size_t size() const noexcept { return samples_.size(); }
  double dt() const noexcept { return dt_; }
  bool real_only() const noexcept { return real_only_; }

  /// First `n` samples.
  Trajectory head(std::size_t n) const;
  /// Elementwise real part, flagged real_only.
  Trajectory real_part() const;
  std::vector<double> real_samples() const;

 private:
  std::vector<complex> samples_;
  double dt_;
  bool real_only_;
};

/// s(t_k) = sum_n p_n exp(-i E_n k dt) for k = 0..n_samples-1, s(0) = 1.
Trajectory exact_signal(const Spectrum& spec, double dt, std::size_t n_samples,
                        bool real_only = false);

/// exp(-theta k dt) * exact_signal(...).
Trajectory depolarized_signal(const Spectrum& spec, double theta, double dt,
                              std::size_t n_samples, bool real_only = false);

// Synthetic raw spectra. The ground state sits at 0 and the remaining
// n_levels-1 levels occupy [gap, width].
std::vector<double> ladder_levels(int n_levels, double gap, double width);
std::vector<double> random_levels(int n_levels, double gap, double width,
                                  std::uint64_t seed);

/// Parses `eigenvalue,overlap` rows; `#` starts a comment. Rows may come in
/// any order. Overlaps summing to 1 within 1e-6 are renormalized.
Spectrum parse_spectrum(std::istream& in);
Spectrum load_spectrum(const std::filesystem::path& path);

}  // namespace fdodmd
