#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fdodmd/analysis.hpp"
#include "fdodmd/noise.hpp"
#include "fdodmd/spectral_model.hpp"

namespace fdodmd {

/// "%.17g"; lossless for doubles.
std::string format_double(double x);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Header `t,re,im`, one row per sample.
std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// dt comes from the t column (t_1 - t_0), or is 1 for single-row files.
/// The result is real_only iff every imaginary part is exactly zero.
Trajectory parse_trajectory_csv(const std::string& text);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Header `t,re_raw,im_raw,re_g<gamma>,im_g<gamma>,...`.
void write_ensemble_csv(const std::filesystem::path& path, const Trajectory& raw,
                        std::span<const double> gammas, std::span<const Trajectory> denoised);

/// Header `k,abs_error,converged`; converged is 1 when abs_error < tol.
std::string curve_csv(const ConvergenceCurve& curve, double tol);
void write_curve_csv(const std::filesystem::path& path, const ConvergenceCurve& curve,
                     double tol);

/// Header `tau,k,lhs_mean,lhs_std,rhs`.
std::string bound_csv(std::span<const BoundRow> rows);
void write_bound_csv(const std::filesystem::path& path, std::span<const BoundRow> rows);

/// Header `k,signal,optimal,uniform`.
void write_allocation_csv(const std::filesystem::path& path, std::span<const double> signal,
                          const ShotAllocation& optimal, std::span<const std::int64_t> uniform);

}  // namespace fdodmd
