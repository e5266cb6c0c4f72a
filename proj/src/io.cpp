#include "fdodmd/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <system_error>

namespace fdodmd {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error("trajectory CSV line " + std::to_string(line_no) +
                             ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,re,im\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += format_double(static_cast<double>(k) * traj.dt());
    out += ',';
    out += format_double(traj[k].real());
    out += ',';
    out += format_double(traj[k].imag());
    out += '\n';
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  write_file_atomic(path, trajectory_csv(traj));
}

Trajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> times;
  std::vector<complex> samples;
  bool real_only = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != "t,re,im") {
        throw std::runtime_error("trajectory CSV: expected header 't,re,im', got '" +
                                 std::string(view) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_commas(view);
    if (fields.size() != 3) {
      throw std::runtime_error("trajectory CSV line " + std::to_string(line_no) +
                               ": expected 3 fields, got " + std::to_string(fields.size()));
    }
    const double t = parse_number(fields[0], line_no);
    const double re = parse_number(fields[1], line_no);
    const double im = parse_number(fields[2], line_no);
    if (!std::isfinite(t) || !std::isfinite(re) || !std::isfinite(im)) {
      throw std::runtime_error("trajectory CSV line " + std::to_string(line_no) +
                               ": non-finite value");
    }
    times.push_back(t);
    samples.emplace_back(re, im);
    real_only = real_only && im == 0.0;
  }
  if (!header_seen) throw std::runtime_error("trajectory CSV: missing header");
  if (samples.empty()) throw std::runtime_error("trajectory CSV: no samples");
  double dt = 1.0;
  if (times.size() > 1) {
    dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::runtime_error("trajectory CSV: t must increase");
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double expected = static_cast<double>(k) * dt + times[0];
      if (std::abs(times[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
        throw std::runtime_error("trajectory CSV: samples are not uniformly spaced at row " +
                                 std::to_string(k));
      }
    }
  }
  return Trajectory(std::move(samples), dt, real_only);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  try {
    return parse_trajectory_csv(read_file(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_ensemble_csv(const std::filesystem::path& path, const Trajectory& raw,
                        std::span<const double> gammas, std::span<const Trajectory> denoised) {
  if (gammas.size() != denoised.size()) {
    throw std::invalid_argument("write_ensemble_csv: one trajectory per gamma expected");
  }
  std::string out = "t,re_raw,im_raw";
  for (double g : gammas) {
    out += ",re_g" + format_double(g) + ",im_g" + format_double(g);
  }
  out += '\n';
  for (std::size_t k = 0; k < raw.size(); ++k) {
    out += format_double(static_cast<double>(k) * raw.dt());
    out += ',' + format_double(raw[k].real()) + ',' + format_double(raw[k].imag());
    for (const auto& d : denoised) {
      if (d.size() != raw.size()) throw std::invalid_argument("write_ensemble_csv: length mismatch");
      out += ',' + format_double(d[k].real()) + ',' + format_double(d[k].imag());
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::string curve_csv(const ConvergenceCurve& curve, double tol) {
  std::string out = "k,abs_error,converged\n";
  for (const auto& p : curve.points) {
    out += std::to_string(p.k_len) + ',' + format_double(p.abs_error) + ',' +
           (p.abs_error < tol ? "1" : "0") + '\n';
  }
  return out;
}

void write_curve_csv(const std::filesystem::path& path, const ConvergenceCurve& curve,
                     double tol) {
  write_file_atomic(path, curve_csv(curve, tol));
}

std::string bound_csv(std::span<const BoundRow> rows) {
  std::string out = "tau,k,lhs_mean,lhs_std,rhs\n";
  for (const auto& r : rows) {
    out += format_double(r.tau) + ',' + std::to_string(r.k_len) + ',' +
           format_double(r.lhs_mean) + ',' + format_double(r.lhs_std) + ',' +
           format_double(r.rhs) + '\n';
  }
  return out;
}

void write_bound_csv(const std::filesystem::path& path, std::span<const BoundRow> rows) {
  write_file_atomic(path, bound_csv(rows));
}

void write_allocation_csv(const std::filesystem::path& path, std::span<const double> signal,
                          const ShotAllocation& optimal, std::span<const std::int64_t> uniform) {
  if (signal.size() != optimal.counts.size() || signal.size() != uniform.size()) {
    throw std::invalid_argument("write_allocation_csv: length mismatch");
  }
  std::string out = "k,signal,optimal,uniform\n";
  for (std::size_t k = 0; k < signal.size(); ++k) {
    out += std::to_string(k) + ',' + format_double(signal[k]) + ',' +
           std::to_string(optimal.counts[k]) + ',' + std::to_string(uniform[k]) + '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace fdodmd
