#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "fdodmd/analysis.hpp"
#include "fdodmd/fourier.hpp"
#include "fdodmd/noise.hpp"

using namespace fdodmd;
using std::numbers::pi;

namespace {

ConvergenceCurve curve_from(std::vector<double> errors) {
  ConvergenceCurve c;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    c.points.push_back({static_cast<int>(5 * (i + 1)), errors[i], 0.0, PointStatus::ok});
  }
  return c;
}

Spectrum three_level() { return Spectrum({-0.5, 0.1, 0.4}, {0.5, 0.25, 0.25}); }

Eigen::MatrixXcd random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::srand(seed);
  return Eigen::MatrixXcd::Random(r, c);
}

}  // namespace

TEST(StableAccuracy, WindowSemantics) {
  EXPECT_EQ(steps_to_stable_accuracy(curve_from(std::vector<double>(12, 1e-4)), 1e-3, 10), 5);
  EXPECT_FALSE(steps_to_stable_accuracy(curve_from(std::vector<double>(12, 1e-2)), 1e-3, 10));
  // A run broken after nine points restarts.
  std::vector<double> e(30, 1e-4);
  e[9] = 1.0;
  EXPECT_EQ(steps_to_stable_accuracy(curve_from(e), 1e-3, 10), 55);
  EXPECT_FALSE(steps_to_stable_accuracy(curve_from(std::vector<double>(9, 0.0)), 1e-3, 10));
  // Exactly at tolerance does not count.
  EXPECT_FALSE(steps_to_stable_accuracy(curve_from({1e-3, 1e-3}), 1e-3, 1));
  EXPECT_THROW(steps_to_stable_accuracy(curve_from({}), 1e-3, 1), std::invalid_argument);
  EXPECT_THROW(steps_to_stable_accuracy(curve_from({0.1}), 0.0, 1), std::invalid_argument);
  EXPECT_THROW(steps_to_stable_accuracy(curve_from({0.1}), 1e-3, 0), std::invalid_argument);
}

TEST(KGrid, FitsSamples) {
  const auto grid = default_k_grid(1501, 5);
  ASSERT_FALSE(grid.empty());
  EXPECT_EQ(grid.front(), 5);
  const int last = grid.back();
  EXPECT_LE(samples_needed(last, default_delay(last)), 1501u);
  EXPECT_GT(samples_needed(last + 5, default_delay(last + 5)), 1501u);
  EXPECT_EQ(last, 1000);
}

TEST(Sweep, NoiselessOdmdConverges) {
  const auto t = exact_signal(three_level(), 1.0, 301);
  EstimatorSpec spec{OdmdMethod{}, {}};
  spec.odmd.delta = 1e-8;
  const auto grid = default_k_grid(t.size(), 5);
  const auto curve = convergence_sweep(t, spec, -0.5, grid);
  ASSERT_EQ(curve.points.size(), grid.size());
  for (const auto& p : curve.points) {
    if (p.k_len >= 10) {
      EXPECT_EQ(p.status, PointStatus::ok);
      EXPECT_LT(p.abs_error, 1e-8) << p.k_len;
    }
  }
  EXPECT_EQ(steps_to_stable_accuracy(curve, 1e-3, 10), 5);
}

TEST(Sweep, RescaledErrorsAreInRawUnits) {
  const std::vector<double> raw{-3.0, -1.0, 2.0};
  const auto r = rescale_spectrum(raw, 1.0);
  const Spectrum s(r.eigenvalues, {0.5, 0.25, 0.25});
  const auto t = exact_signal(s, 1.0, 200);
  EstimatorSpec spec{OdmdMethod{}, {}};
  spec.odmd.delta = 1e-8;
  SweepOptions opt;
  opt.rescale = r.params;
  const std::vector<int> grid{40};
  const auto curve = convergence_sweep(t, spec, -3.0, grid, opt);
  EXPECT_LT(curve.points[0].abs_error, 1e-7);
  EXPECT_NEAR(curve.points[0].estimate, -3.0, 1e-7);
}

TEST(Sweep, StatusFlags) {
  const auto t = exact_signal(three_level(), 1.0, 50);
  EstimatorSpec spec{OdmdMethod{}, {}};
  const std::vector<int> grid{10, 40};
  const auto curve = convergence_sweep(t, spec, -0.5, grid);
  EXPECT_EQ(curve.points[0].status, PointStatus::ok);
  EXPECT_EQ(curve.points[1].status, PointStatus::insufficient_data);
  EXPECT_TRUE(std::isinf(curve.points[1].abs_error));

  // Thresholding everything away leaves a zero data matrix.
  EstimatorSpec all_cut{FdodmdMethod{{1e12}, false}, {}};
  const std::vector<int> one{10};
  const auto d = convergence_sweep(t, all_cut, -0.5, one);
  EXPECT_EQ(d.points[0].status, PointStatus::divergent);
  EXPECT_TRUE(std::isinf(d.points[0].abs_error));

  const std::vector<int> bad{10, 10};
  EXPECT_THROW(convergence_sweep(t, spec, -0.5, bad), std::invalid_argument);
}

TEST(Sweep, DeterministicAcrossRunsAndThreads) {
  const auto noisy = gaussian_corrupt(exact_signal(three_level(), 1.0, 400), 0.1, 3);
  EstimatorSpec spec{FdodmdMethod{{1.0, 2.0, 4.0}, true}, {}};
  const auto grid = default_k_grid(noisy.size(), 20);
  const auto a = convergence_sweep(noisy, spec, -0.5, grid);
  setenv("FDODMD_NUM_THREADS", "3", 1);
  const auto b = convergence_sweep(noisy, spec, -0.5, grid);
  unsetenv("FDODMD_NUM_THREADS");
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].estimate, b.points[i].estimate);
    EXPECT_EQ(a.points[i].abs_error, b.points[i].abs_error);
  }
}

TEST(Sweep, EarlyStopTruncates) {
  const auto t = exact_signal(three_level(), 1.0, 301);
  EstimatorSpec spec{OdmdMethod{}, {}};
  spec.odmd.delta = 1e-8;
  SweepOptions opt;
  opt.stop_when_stable = true;
  opt.stable_window = 4;
  const auto grid = default_k_grid(t.size(), 5);
  const auto curve = convergence_sweep(t, spec, -0.5, grid, opt);
  EXPECT_TRUE(curve.truncated);
  EXPECT_EQ(curve.points.size(), 4u);
}

TEST(Sweep, DftPeakStaysBiasedOnDepolarizedData) {
  // Off-grid ground energy; the plain DFT has no sub-bin resolution.
  const Spectrum s({-0.5123, 0.3}, {0.6, 0.4});
  const auto t = depolarized_signal(s, 0.02, 1.0, 301);
  EstimatorSpec spec{DftPeakMethod{}, {}};
  const auto grid = default_k_grid(t.size(), 5);
  const auto curve = convergence_sweep(t, spec, -0.5123, grid);
  EXPECT_FALSE(steps_to_stable_accuracy(curve, 1e-3, 10));
}

TEST(EstimatorTag, Names) {
  EXPECT_EQ((EstimatorSpec{OdmdMethod{}, {}}.tag()), "odmd");
  EXPECT_EQ((EstimatorSpec{FdodmdMethod{{1.0}, true}, {}}.tag()), "fdodmd");
  EXPECT_EQ((EstimatorSpec{FdodmdMethod{{1.0}, false}, {}}.tag()), "fdodmd-noraw");
  EXPECT_EQ((EstimatorSpec{DftPeakMethod{}, {}}.tag()), "dft");
  EXPECT_EQ((EstimatorSpec{ZeroPadMethod{4}, {}}.tag()), "zeropad");
}

TEST(BoundRhs, ZeroThreshold) {
  const auto s_hat = dft(exact_signal(three_level(), 1.0, 64).samples());
  EXPECT_NEAR(theorem1_rhs(s_hat, 0.0, 0.1), 2 * 0.01, 1e-15);
  EXPECT_NEAR(theorem1_rhs(s_hat, 0.0, 0.7), 2 * 0.49, 1e-14);
}

TEST(BoundRhs, LargeThresholdGivesSignalEnergy) {
  const auto s = exact_signal(three_level(), 1.0, 64);
  const auto s_hat = dft(s.samples());
  double energy = 0.0;
  for (const auto& z : s.samples()) energy += std::norm(z);
  double peak = 0.0;
  for (const auto& c : s_hat) peak = std::max(peak, std::abs(c));
  EXPECT_NEAR(theorem1_rhs(s_hat, 100 * peak, 0.1), energy / 64.0, 1e-10);
}

TEST(BoundRhs, SingleBinClosedForm) {
  // K = 1, s_hat = 1, eps = 0.5, tau = 0.5: the Gaussian scale sqrt(2 K eps^2)
  // is 1/sqrt(2), so the erf arguments are -1/sqrt(2), -3/sqrt(2) and +-1/sqrt(2).
  const double erf_1 = 0.6826894921370859;  // erf(1/sqrt 2)
  const double erf_3 = 0.9973002039367398;  // erf(3/sqrt 2)
  const double expected = 2 * 0.25 * 1.0 + 0.25 * (erf_3 - erf_1) * (2 * erf_1);
  const std::vector<complex> s_hat{1.0};
  EXPECT_NEAR(theorem1_rhs(s_hat, 0.5, 0.5), expected, 1e-14);
  EXPECT_NEAR(expected, 0.607391, 1e-6);

  // tau above |s_hat|: noise term (1 + z) e^{-z} with z = (tau - |s|)^2 / (2 K eps^2).
  const double z = 0.25 / 0.5;
  const double erf_5 = 0.9999994266968563;  // erf(5/sqrt 2)
  const double above = 2 * 0.25 * (1 + z) * std::exp(-z) + 0.25 * (erf_1 + erf_5) * (2 * erf_3);
  EXPECT_NEAR(theorem1_rhs(s_hat, 1.5, 0.5), above, 1e-14);
}

TEST(BoundRhs, RejectsInvalidInput) {
  const std::vector<complex> s_hat{1.0, 0.5};
  EXPECT_THROW(theorem1_rhs(s_hat, 0.1, 0.0), std::invalid_argument);
  EXPECT_THROW(theorem1_rhs(s_hat, -0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(theorem1_rhs(s_hat, std::nan(""), 0.1), std::invalid_argument);
  EXPECT_THROW(theorem1_rhs(std::vector<complex>{}, 0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(theorem1_rhs(std::vector<complex>{complex(INFINITY, 0)}, 0.1, 0.1),
               std::invalid_argument);
}

TEST(BoundLhs, Limits) {
  const auto s = exact_signal(three_level(), 1.0, 100);
  const auto zero = theorem1_lhs_mc(s, 0.0, 0.1, 400, 1);
  // tau = 0 keeps the noise: E (1/K)||xi||^2 = 2 eps^2.
  EXPECT_NEAR(zero.mean, 0.02, 4 * zero.std / std::sqrt(400.0));
  double energy = 0.0;
  for (const auto& z : s.samples()) energy += std::norm(z);
  const auto huge = theorem1_lhs_mc(s, 1e6, 0.1, 10, 1);
  EXPECT_NEAR(huge.mean, energy / 100.0, 1e-12);
  EXPECT_NEAR(huge.std, 0.0, 1e-12);
  EXPECT_THROW(theorem1_lhs_mc(s, 0.1, 0.1, 1, 1), std::invalid_argument);
  EXPECT_THROW(theorem1_lhs_mc(s, -0.1, 0.1, 10, 1), std::invalid_argument);
}

TEST(BoundLhs, DeterministicForSeed) {
  const auto s = exact_signal(three_level(), 1.0, 50);
  const auto a = theorem1_lhs_mc(s, 2.0, 0.2, 20, 7);
  const auto b = theorem1_lhs_mc(s, 2.0, 0.2, 20, 7);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std, b.std);
}

TEST(BoundReport, HoldsOnSmallGrid) {
  const auto s = exact_signal(three_level(), 1.0, 200);
  const std::vector<int> ks{50, 100};
  const auto rows = bound_report(s, ks, {}, 0.1, 100, 3, 12);
  ASSERT_EQ(rows.size(), 24u);
  for (const auto& r : rows) {
    EXPECT_TRUE(within_bound(r)) << r.k_len << " " << r.tau << " " << r.lhs_mean << " " << r.rhs;
  }
  EXPECT_EQ(rows.front().tau, 0.0);
  EXPECT_THROW(bound_report(s, std::vector<int>{0}, {}, 0.1, 10, 1), std::invalid_argument);
  EXPECT_THROW(bound_report(s, std::vector<int>{201}, {}, 0.1, 10, 1), std::invalid_argument);
}

TEST(BoundReport, AllowanceRules) {
  BoundRow spread{1.0, 10, 0.5, 0.2, 0.4, 100};
  EXPECT_NEAR(bound_allowance(spread), 0.06, 1e-15);
  EXPECT_FALSE(within_bound(spread));
  spread.rhs = 0.45;
  EXPECT_TRUE(within_bound(spread));
  const BoundRow frozen{1.0, 10, 0.5, 0.0, 0.49, 100};
  EXPECT_NEAR(bound_allowance(frozen), 0.015, 1e-15);
  EXPECT_TRUE(within_bound(frozen));
  EXPECT_THROW(bound_allowance(BoundRow{1.0, 10, 0.5, 0.0, 0.49, 1}), std::invalid_argument);
}

TEST(TauGrid, SpansTwicePeak) {
  const std::vector<complex> s_hat{3.0, complex(0, -4.0), 1.0};
  const auto g = default_tau_grid(s_hat, 5);
  EXPECT_EQ(g, (std::vector<double>{0.0, 2.0, 4.0, 6.0, 8.0}));
  EXPECT_THROW(default_tau_grid(s_hat, 1), std::invalid_argument);
}

TEST(TauFromGamma, MedianRule) {
  const Trajectory t(idft(std::vector<complex>{10.0, 1.0, 1.0, 3.0}), 1.0, false);
  EXPECT_NEAR(tau_from_gamma(t, 2.0), 4.0, 1e-13);
}

TEST(Wedin, ZeroPerturbationGivesZero) {
  const auto t = exact_signal(three_level(), 1.0, 40);
  const auto h = build_hankel(std::span(&t, 1), 10, 20);
  const Eigen::MatrixXcd x = h.x(), xs = h.x_shift();
  const auto r = wedin_bound_report(x, xs, Eigen::MatrixXcd::Zero(x.rows(), x.cols()),
                                    Eigen::MatrixXcd::Zero(x.rows(), x.cols()));
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.eta, 0.0);
  EXPECT_NEAR(r.bound, 0.0, 1e-12);
}

TEST(Wedin, HalvingPerturbationAtLeastHalvesBound) {
  const Eigen::MatrixXcd x = random_matrix(6, 10, 1);
  const Eigen::MatrixXcd xs = random_matrix(6, 10, 2);
  const Eigen::MatrixXcd dx = 1e-3 * random_matrix(6, 10, 3);
  const Eigen::MatrixXcd dxs = 1e-3 * random_matrix(6, 10, 4);
  const auto full = wedin_bound_report(x, xs, dx, dxs);
  const auto half = wedin_bound_report(x, xs, 0.5 * dx, 0.5 * dxs);
  ASSERT_TRUE(full.valid && half.valid);
  EXPECT_GT(full.bound, 0.0);
  EXPECT_LE(half.bound, 0.5 * full.bound * (1 + 1e-12));
  EXPECT_NEAR(half.eta, 0.5 * full.eta, 1e-15);
}

TEST(Wedin, BoundsActualOperatorChange) {
  const Eigen::MatrixXcd x = random_matrix(5, 12, 5);
  const Eigen::MatrixXcd xs = random_matrix(5, 12, 6);
  const Eigen::MatrixXcd dx = 1e-2 * random_matrix(5, 12, 7);
  const Eigen::MatrixXcd dxs = 1e-2 * random_matrix(5, 12, 8);
  const auto pinv = [](const Eigen::MatrixXcd& m) {
    return m.completeOrthogonalDecomposition().pseudoInverse();
  };
  const Eigen::MatrixXcd a = xs * pinv(x);
  const Eigen::MatrixXcd b = (xs + dxs) * pinv(x + dx);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a - b);
  const auto r = wedin_bound_report(x, xs, dx, dxs);
  ASSERT_TRUE(r.valid);
  EXPECT_LE(svd.singularValues()(0), r.bound);
}

TEST(Wedin, LargePerturbationIsInvalid) {
  const Eigen::MatrixXcd x = random_matrix(4, 8, 1);
  const Eigen::MatrixXcd big = 100.0 * random_matrix(4, 8, 2);
  const auto r = wedin_bound_report(x, x, big, big);
  EXPECT_FALSE(r.valid);
  EXPECT_TRUE(std::isnan(r.bound));
  EXPECT_THROW(wedin_bound(x, x, big, big), std::domain_error);
}

TEST(Wedin, DenoisingTightensBound) {
  // Modes on the DFT grid of the full record, so thresholding removes noise
  // without cutting leakage.
  const double w = 2.0 * std::numbers::pi / 200.0;
  const Spectrum spec({-16 * w, 3 * w, 12 * w}, {0.5, 0.25, 0.25});
  const auto clean = exact_signal(spec, 1.0, 200);
  const auto noisy = gaussian_corrupt(clean, 0.01, 4);
  const auto denoised = threshold_denoise(noisy, ThresholdRule(4.0));
  const int d = 4, k = 150;
  const auto hc = build_hankel(std::span(&clean, 1), d, k);
  const auto hn = build_hankel(std::span(&noisy, 1), d, k);
  const auto hd = build_hankel(std::span(&denoised, 1), d, k);
  const Eigen::MatrixXcd x = hc.x(), xs = hc.x_shift();
  const auto raw = wedin_bound_report(x, xs, hn.x() - x, hn.x_shift() - xs);
  const auto fd = wedin_bound_report(x, xs, hd.x() - x, hd.x_shift() - xs);
  ASSERT_TRUE(raw.valid && fd.valid);
  EXPECT_LT(fd.eta, raw.eta);
  EXPECT_LT(fd.bound, raw.bound);
}

TEST(Parallel, CoversIndicesAndPropagates) {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  setenv("FDODMD_NUM_THREADS", "2", 1);
  EXPECT_EQ(worker_count(), 2);
  unsetenv("FDODMD_NUM_THREADS");
  EXPECT_GE(worker_count(), 1);
}
