#include "fdodmd/spectral_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fdodmd/rng.hpp"

namespace fdodmd {

namespace {

constexpr double kOverlapSumTolerance = 1e-12;
constexpr double kFileOverlapTolerance = 1e-6;

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("spectrum line " + std::to_string(line_no) +
                                ": cannot parse '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw std::invalid_argument("spectrum line " + std::to_string(line_no) +
                                ": non-finite value");
  }
  return value;
}

}  // namespace

Spectrum::Spectrum(std::vector<double> eigenvalues, std::vector<double> overlaps)
    : eigenvalues_(std::move(eigenvalues)), overlaps_(std::move(overlaps)) {
  if (eigenvalues_.empty()) {
    throw std::invalid_argument("Spectrum: no levels");
  }
  if (eigenvalues_.size() != overlaps_.size()) {
    throw std::invalid_argument("Spectrum: eigenvalue/overlap length mismatch");
  }
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
    if (!std::isfinite(eigenvalues_[i]) || !std::isfinite(overlaps_[i])) {
      throw std::invalid_argument("Spectrum: non-finite entry");
    }
    if (overlaps_[i] < 0.0) {
      throw std::invalid_argument("Spectrum: negative overlap");
    }
    if (i > 0 && eigenvalues_[i] < eigenvalues_[i - 1]) {
      throw std::invalid_argument("Spectrum: eigenvalues must be nondecreasing");
    }
  }
  if (std::abs(compensated_sum(overlaps_) - 1.0) > kOverlapSumTolerance) {
    throw std::invalid_argument("Spectrum: overlaps must sum to 1");
  }
}

Spectrum Spectrum::from_unsorted(std::vector<double> eigenvalues,
                                 std::vector<double> overlaps) {
  if (eigenvalues.size() != overlaps.size()) {
    throw std::invalid_argument("Spectrum: eigenvalue/overlap length mismatch");
  }
  std::vector<std::size_t> order(eigenvalues.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eigenvalues[a] < eigenvalues[b];
  });
  std::vector<double> e(order.size());
  std::vector<double> p(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    e[i] = eigenvalues[order[i]];
    p[i] = overlaps[order[i]];
  }
  return Spectrum(std::move(e), std::move(p));
}

void RescaleParams::validate() const {
  if (!(beta1 > 0.0) || !std::isfinite(beta0) || !std::isfinite(beta1)) {
    throw std::invalid_argument("RescaleParams: beta1 must be positive and finite");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("RescaleParams: dt must be positive");
  }
}

RescaledEigenvalues rescale_spectrum(std::span<const double> raw_eigenvalues,
                                     double dt, double alpha) {
  if (raw_eigenvalues.empty()) {
    throw std::invalid_argument("rescale_spectrum: empty spectrum");
  }
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("rescale_spectrum: alpha must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("rescale_spectrum: dt must be positive");
  }
  const auto [lo, hi] = std::minmax_element(raw_eigenvalues.begin(), raw_eigenvalues.end());
  RescaleParams params;
  params.alpha = alpha;
  params.dt = dt;
  params.lower_bound = *lo - alpha;
  params.upper_bound = *hi + alpha;
  const double width = params.upper_bound - params.lower_bound;
  const double center = 0.5 * (params.upper_bound + params.lower_bound);
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw std::invalid_argument("rescale_spectrum: degenerate spectral width");
  }
  params.beta1 = std::numbers::pi / (2.0 * dt * width);
  params.beta0 = -std::numbers::pi * center / (2.0 * dt * width);

  RescaledEigenvalues out{params, {}};
  out.eigenvalues.reserve(raw_eigenvalues.size());
  for (double e : raw_eigenvalues) out.eigenvalues.push_back(params.forward(e));
  return out;
}

double unscale_energy(double e, const RescaleParams& params) {
  params.validate();
  return (e - params.beta0) / params.beta1;
}

std::vector<double> make_reference_overlaps(int n_levels, double p0) {
  if (n_levels < 1) {
    throw std::invalid_argument("make_reference_overlaps: n_levels must be >= 1");
  }
  if (!(p0 > 0.0) || p0 > 1.0) {
    throw std::invalid_argument("make_reference_overlaps: p0 must lie in (0, 1]");
  }
  if (n_levels == 1) {
    if (p0 != 1.0) {
      throw std::invalid_argument("make_reference_overlaps: single level needs p0 = 1");
    }
    return {1.0};
  }
  std::vector<double> p(static_cast<std::size_t>(n_levels),
                        (1.0 - p0) / static_cast<double>(n_levels - 1));
  p[0] = p0;
  return p;
}

Trajectory::Trajectory(std::vector<complex> samples, double dt, bool real_only)
    : samples_(std::move(samples)), dt_(dt), real_only_(real_only) {
  if (samples_.empty()) {
    throw std::invalid_argument("Trajectory: needs at least one sample");
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw std::invalid_argument("Trajectory: dt must be positive");
  }
  if (real_only_) {
    for (const auto& z : samples_) {
      if (z.imag() != 0.0) {
        throw std::invalid_argument("Trajectory: real_only sample with imaginary part");
      }
    }
  }
}

Trajectory Trajectory::from_real(std::span<const double> samples, double dt) {
  std::vector<complex> z(samples.begin(), samples.end());
  return Trajectory(std::move(z), dt, true);
}

Trajectory Trajectory::head(std::size_t n) const {
  if (n == 0 || n > samples_.size()) {
    throw std::out_of_range("Trajectory::head: requested " + std::to_string(n) +
                            " of " + std::to_string(samples_.size()) + " samples");
  }
  return Trajectory(std::vector<complex>(samples_.begin(), samples_.begin() + n), dt_,
                    real_only_);
}

Trajectory Trajectory::real_part() const {
  std::vector<complex> z(samples_.size());
  std::transform(samples_.begin(), samples_.end(), z.begin(),
                 [](const complex& c) { return complex(c.real(), 0.0); });
  return Trajectory(std::move(z), dt_, true);
}

std::vector<double> Trajectory::real_samples() const {
  std::vector<double> r(samples_.size());
  std::transform(samples_.begin(), samples_.end(), r.begin(),
                 [](const complex& c) { return c.real(); });
  return r;
}

Trajectory depolarized_signal(const Spectrum& spec, double theta, double dt,
                              std::size_t n_samples, bool real_only) {
  if (theta < 0.0 || !std::isfinite(theta)) {
    throw std::invalid_argument("depolarized_signal: theta must be >= 0");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("signal: dt must be positive");
  }
  if (n_samples == 0) {
    throw std::invalid_argument("signal: n_samples must be >= 1");
  }
  const auto& energies = spec.eigenvalues();
  const auto& weights = spec.overlaps();
  std::vector<complex> s(n_samples);
  s[0] = complex(1.0, 0.0);
  for (std::size_t k = 1; k < n_samples; ++k) {
    const double t = static_cast<double>(k) * dt;
    complex acc(0.0, 0.0);
    for (std::size_t n = 0; n < energies.size(); ++n) {
      acc += weights[n] * std::polar(1.0, -energies[n] * t);
    }
    s[k] = theta == 0.0 ? acc : std::exp(-theta * t) * acc;
    if (real_only) s[k] = complex(s[k].real(), 0.0);
  }
  return Trajectory(std::move(s), dt, real_only);
}

Trajectory exact_signal(const Spectrum& spec, double dt, std::size_t n_samples,
                        bool real_only) {
  return depolarized_signal(spec, 0.0, dt, n_samples, real_only);
}

std::vector<double> ladder_levels(int n_levels, double gap, double width) {
  if (n_levels < 1) throw std::invalid_argument("ladder_levels: n_levels must be >= 1");
  if (n_levels > 1 && !(gap > 0.0 && width >= gap)) {
    throw std::invalid_argument("ladder_levels: need 0 < gap <= width");
  }
  std::vector<double> e(static_cast<std::size_t>(n_levels), 0.0);
  if (n_levels == 2) e[1] = gap;
  for (int i = 1; n_levels > 2 && i < n_levels; ++i) {
    e[i] = gap + (width - gap) * static_cast<double>(i - 1) / (n_levels - 2);
  }
  return e;
}

std::vector<double> random_levels(int n_levels, double gap, double width,
                                  std::uint64_t seed) {
  if (n_levels < 1) throw std::invalid_argument("random_levels: n_levels must be >= 1");
  if (n_levels > 1 && !(gap > 0.0 && width >= gap)) {
    throw std::invalid_argument("random_levels: need 0 < gap <= width");
  }
  const CounterRng rng(seed);
  std::vector<double> e(static_cast<std::size_t>(n_levels), 0.0);
  for (int i = 1; i < n_levels; ++i) {
    e[i] = gap + (width - gap) * rng.uniform(0, static_cast<std::uint64_t>(i));
  }
  std::sort(e.begin(), e.end());
  return e;
}

Spectrum parse_spectrum(std::istream& in) {
  std::vector<double> energies;
  std::vector<double> overlaps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos ||
        view.find(',', comma + 1) != std::string_view::npos) {
      throw std::invalid_argument("spectrum line " + std::to_string(line_no) +
                                  ": expected 'eigenvalue,overlap'");
    }
    const double e = parse_double(view.substr(0, comma), line_no);
    const double p = parse_double(view.substr(comma + 1), line_no);
    if (p < 0.0) {
      throw std::invalid_argument("spectrum line " + std::to_string(line_no) +
                                  ": negative overlap");
    }
    energies.push_back(e);
    overlaps.push_back(p);
  }
  if (energies.empty()) {
    throw std::invalid_argument("spectrum: no levels");
  }
  const double total = compensated_sum(overlaps);
  if (std::abs(total - 1.0) > kFileOverlapTolerance) {
    throw std::invalid_argument("spectrum: overlaps sum to " + std::to_string(total) +
                                ", expected 1");
  }
  for (double& p : overlaps) p /= total;
  return Spectrum::from_unsorted(std::move(energies), std::move(overlaps));
}

Spectrum load_spectrum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open spectrum file " + path.string());
  }
  return parse_spectrum(in);
}

}  // namespace fdodmd
