#include "fdodmd/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fdodmd {

namespace {

// FFTW's planner is not thread-safe; executing an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  FftPlan(std::size_t n, int sign) : in_(n), out_(n) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in_.data()),
                             reinterpret_cast<fftw_complex*>(out_.data()), sign,
                             FFTW_ESTIMATE);
    if (plan_ == nullptr) throw std::runtime_error("FFTW: plan creation failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  std::vector<complex> run(std::span<const complex> x) {
    std::copy(x.begin(), x.end(), in_.begin());
    fftw_execute(plan_);
    return out_;
  }

 private:
  std::vector<complex> in_;
  std::vector<complex> out_;
  fftw_plan plan_ = nullptr;
};

std::vector<complex> transform(std::span<const complex> x, int sign) {
  if (x.empty()) throw std::invalid_argument("dft: empty input");
  FftPlan plan(x.size(), sign);
  return plan.run(x);
}

// Bins kept by |c| >= tau. For real signals the decision for m and n-m is
// taken from the same magnitude so the kept spectrum stays Hermitian.
std::vector<char> keep_mask(std::span<const complex> c, double tau, bool hermitian) {
  const std::size_t n = c.size();
  std::vector<char> keep(n, 0);
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t rep = hermitian ? std::min(m, (n - m) % n) : m;
    keep[m] = std::abs(c[rep]) >= tau ? 1 : 0;
  }
  return keep;
}

Trajectory reconstruct(const Trajectory& traj, std::span<const complex> coefficients,
                       double tau) {
  const bool real = traj.real_only();
  const auto keep = keep_mask(coefficients, tau, real);
  std::vector<complex> kept(coefficients.begin(), coefficients.end());
  for (std::size_t m = 0; m < kept.size(); ++m) {
    if (!keep[m]) kept[m] = complex(0.0, 0.0);
  }
  auto samples = idft(kept);
  if (real) {
    double scale = 1.0;
    double residue = 0.0;
    for (const auto& z : samples) {
      scale = std::max(scale, std::abs(z.real()));
      residue = std::max(residue, std::abs(z.imag()));
    }
    if (residue > 1e-10 * scale) {
      throw std::logic_error("threshold_denoise: imaginary residue " +
                             std::to_string(residue) + " on a real-only reconstruction");
    }
    for (auto& z : samples) z = complex(z.real(), 0.0);
  }
  return Trajectory(std::move(samples), traj.dt(), real);
}

PeakEstimate peak_from_coefficients(std::span<const complex> c, double dt, bool real_only,
                                    PeakOptions options) {
  const std::size_t n = c.size();
  const std::size_t first = options.include_dc ? 0 : 1;
  const std::size_t last = real_only ? n / 2 : n - 1;
  if (first > last || first >= n) {
    throw std::invalid_argument("peak estimate: no eligible frequency bins");
  }
  std::size_t best = first;
  double best_mag = std::abs(c[first]);
  for (std::size_t m = first + 1; m <= last; ++m) {
    const double mag = std::abs(c[m]);
    if (mag > best_mag) {
      best = m;
      best_mag = mag;
    }
  }
  const double period = 2.0 * std::numbers::pi / dt;
  const double f = period * static_cast<double>(best) / static_cast<double>(n);
  PeakEstimate est;
  est.peak_bin = best;
  est.padded_length = n;
  est.peak_magnitude = best_mag;
  if (real_only) {
    // m <= n/2 keeps f inside [0, pi/dt].
    est.abs_energy = f;
    est.energy = -f;
    est.sign_ambiguous = true;
  } else {
    // exp(-i E t) peaks at f = -E modulo 2 pi / dt; fold into (-pi/dt, pi/dt].
    double e = -f;
    if (e <= -0.5 * period) e += period;
    est.energy = e;
    est.abs_energy = std::abs(e);
  }
  return est;
}

}  // namespace

std::vector<complex> dft(std::span<const complex> x) { return transform(x, FFTW_FORWARD); }

std::vector<complex> idft(std::span<const complex> xhat) {
  auto x = transform(xhat, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& z : x) z *= scale;
  return x;
}

SpectrumDFT spectrum_dft(const Trajectory& traj) {
  SpectrumDFT out;
  out.coefficients = dft(traj.samples());
  out.length = traj.size();
  out.dt = traj.dt();
  out.real_only = traj.real_only();
  out.bin_frequencies.resize(out.length);
  const double df = 2.0 * std::numbers::pi / (static_cast<double>(out.length) * traj.dt());
  for (std::size_t m = 0; m < out.length; ++m) {
    out.bin_frequencies[m] = df * static_cast<double>(m);
  }
  return out;
}

double median_magnitude(std::span<const complex> coefficients) {
  if (coefficients.empty()) throw std::invalid_argument("median_magnitude: empty input");
  std::vector<double> mag(coefficients.size());
  std::transform(coefficients.begin(), coefficients.end(), mag.begin(),
                 [](const complex& z) { return std::abs(z); });
  const std::size_t mid = mag.size() / 2;
  std::nth_element(mag.begin(), mag.begin() + mid, mag.end());
  const double upper = mag[mid];
  if (mag.size() % 2 == 1) return upper;
  const double lower = *std::max_element(mag.begin(), mag.begin() + mid);
  return 0.5 * (lower + upper);
}

ThresholdRule::ThresholdRule(double g) : gamma(g) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("ThresholdRule: gamma must be positive");
  }
}

double ThresholdRule::tau(std::span<const complex> coefficients) const {
  return gamma * median_magnitude(coefficients);
}

std::vector<complex> threshold_reconstruct(std::span<const complex> coefficients,
                                           double tau) {
  if (coefficients.empty()) throw std::invalid_argument("threshold_reconstruct: empty input");
  const auto keep = keep_mask(coefficients, tau, false);
  std::vector<complex> kept(coefficients.begin(), coefficients.end());
  for (std::size_t m = 0; m < kept.size(); ++m) {
    if (!keep[m]) kept[m] = complex(0.0, 0.0);
  }
  return idft(kept);
}

Trajectory threshold_denoise_absolute(const Trajectory& traj, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("threshold_denoise: tau must be >= 0");
  const auto c = dft(traj.samples());
  return reconstruct(traj, c, tau);
}

Trajectory threshold_denoise(const Trajectory& traj, const ThresholdRule& rule) {
  const auto c = dft(traj.samples());
  return reconstruct(traj, c, rule.tau(c));
}

std::vector<Trajectory> denoise_ensemble(const Trajectory& traj,
                                         std::span<const double> gammas) {
  if (gammas.empty()) throw std::invalid_argument("denoise_ensemble: no thresholds given");
  const auto c = dft(traj.samples());
  const double median = median_magnitude(c);
  std::vector<Trajectory> out;
  out.reserve(gammas.size());
  for (double g : gammas) {
    const ThresholdRule rule(g);
    out.push_back(reconstruct(traj, c, rule.gamma * median));
  }
  return out;
}

PeakEstimate dft_peak_estimate(const Trajectory& traj, PeakOptions options) {
  const auto c = dft(traj.samples());
  return peak_from_coefficients(c, traj.dt(), traj.real_only(), options);
}

PeakEstimate zero_padded_peak_estimate(const Trajectory& traj, int pad_factor,
                                       PeakOptions options) {
  if (pad_factor < 0) throw std::invalid_argument("zero_padded_peak_estimate: pad_factor < 0");
  std::vector<complex> padded(traj.samples().begin(), traj.samples().end());
  padded.resize(traj.size() * static_cast<std::size_t>(1 + pad_factor), complex(0.0, 0.0));
  const auto c = dft(padded);
  return peak_from_coefficients(c, traj.dt(), traj.real_only(), options);
}

}  // namespace fdodmd
