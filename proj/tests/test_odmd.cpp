#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fdodmd/noise.hpp"
#include "fdodmd/odmd.hpp"

using namespace fdodmd;
using std::numbers::pi;

namespace {

Trajectory real_ramp(int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = i;
  return Trajectory::from_real(x, 1.0);
}

Spectrum random_spectrum(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> e(-pi / 4, pi / 4);
  std::uniform_real_distribution<double> w(0.2, 1.0);
  std::vector<double> energies(static_cast<std::size_t>(n));
  std::vector<double> overlaps(static_cast<std::size_t>(n));
  for (auto& x : energies) x = e(gen);
  double sum = 0.0;
  for (auto& p : overlaps) sum += (p = w(gen));
  for (auto& p : overlaps) p /= sum;
  return Spectrum::from_unsorted(energies, overlaps);
}

PropagatorFit fit_with(std::vector<complex> eigenvalues) {
  PropagatorFit fit;
  fit.eigenvalues = Eigen::Map<Eigen::VectorXcd>(eigenvalues.data(),
                                                static_cast<Eigen::Index>(eigenvalues.size()));
  fit.rank_kept = static_cast<int>(eigenvalues.size());
  return fit;
}

double residual(const HankelPair& h, const Eigen::MatrixXcd& a) {
  return (h.x_shift() - a * h.x()).norm();
}

}  // namespace

TEST(Hankel, ScalarExample) {
  const auto t = real_ramp(5);
  const auto h = build_hankel(std::span(&t, 1), 2, 2);
  ASSERT_TRUE(h.is_real());
  Eigen::MatrixXcd x(2, 3), xs(2, 3);
  x << 0, 1, 2, 1, 2, 3;
  xs << 1, 2, 3, 2, 3, 4;
  EXPECT_EQ(h.x(), x);
  EXPECT_EQ(h.x_shift(), xs);
}

TEST(Hankel, SingleColumn) {
  const auto t = real_ramp(2);
  const auto h = build_hankel(std::span(&t, 1), 1, 0);
  EXPECT_EQ(h.rows(), 1);
  EXPECT_EQ(h.cols(), 1);
  EXPECT_EQ(h.x()(0, 0), complex(0.0));
  EXPECT_EQ(h.x_shift()(0, 0), complex(1.0));
}

TEST(Hankel, BlockOrderingAndShift) {
  std::vector<Trajectory> trajs;
  for (int r = 0; r < 3; ++r) {
    std::vector<complex> x(20);
    for (int k = 0; k < 20; ++k) x[static_cast<std::size_t>(k)] = complex(100 * r + k, -r);
    trajs.emplace_back(x, 0.5, false);
  }
  const auto h = build_hankel(trajs, 4, 9);
  ASSERT_FALSE(h.is_real());
  EXPECT_EQ(h.rows(), 12);
  EXPECT_EQ(h.cols(), 10);
  const auto x = h.x();
  const auto xs = h.x_shift();
  for (int i = 0; i < 4; ++i) {
    for (int r = 0; r < 3; ++r) {
      for (int j = 0; j < 10; ++j) {
        EXPECT_EQ(x(i * 3 + r, j), trajs[static_cast<std::size_t>(r)][static_cast<std::size_t>(i + j)]);
        EXPECT_EQ(xs(i * 3 + r, j), trajs[static_cast<std::size_t>(r)][static_cast<std::size_t>(i + j + 1)]);
      }
    }
  }
  // The shifted matrix is the unshifted one moved by one column.
  EXPECT_EQ(xs.leftCols(9), x.rightCols(9));
}

TEST(Hankel, RejectsInvalidInput) {
  const auto t = real_ramp(5);
  EXPECT_THROW(build_hankel(std::span(&t, 1), 3, 2), std::invalid_argument);
  EXPECT_THROW(build_hankel(std::span(&t, 1), 0, 2), std::invalid_argument);
  EXPECT_THROW(build_hankel(std::span(&t, 1), 1, -1), std::invalid_argument);
  EXPECT_THROW(build_hankel(std::span<const Trajectory>(), 1, 1), std::invalid_argument);
  const std::vector<Trajectory> mixed{t, Trajectory::from_real(std::vector<double>(5, 0.0), 2.0)};
  EXPECT_THROW(build_hankel(mixed, 2, 2), std::invalid_argument);
}

TEST(Hankel, DelayHelpers) {
  EXPECT_EQ(default_delay(0), 0);
  EXPECT_EQ(default_delay(1), 1);
  EXPECT_EQ(default_delay(10), 5);
  EXPECT_EQ(default_delay(11), 6);
  EXPECT_EQ(samples_needed(10, 5), 16u);
}

TEST(Propagator, SingleExponential) {
  const complex lambda = std::polar(1.0, -0.5);
  std::vector<complex> x(9);
  for (int k = 0; k < 9; ++k) x[static_cast<std::size_t>(k)] = std::pow(lambda, k);
  const Trajectory t(x, 1.0, false);
  const auto h = build_hankel(std::span(&t, 1), 3, 5);
  const auto fit = solve_propagator(h, 1e-12);
  EXPECT_EQ(fit.rank_kept, 1);
  ASSERT_EQ(fit.eigenvalues.size(), 3);
  std::vector<double> mags;
  for (const auto& l : fit.eigenvalues) mags.push_back(std::abs(l));
  std::sort(mags.begin(), mags.end());
  EXPECT_LT(mags[0], 1e-12);
  EXPECT_LT(mags[1], 1e-12);
  Eigen::Index best = 0;
  fit.eigenvalues.cwiseAbs().maxCoeff(&best);
  EXPECT_LT(std::abs(fit.eigenvalues(best) - lambda), 1e-12);
}

TEST(Propagator, DeltaNearOneKeepsOnlyLeadingTriplet) {
  const auto s = random_spectrum(4, 3);
  const auto t = exact_signal(s, 1.0, 40);
  const auto h = build_hankel(std::span(&t, 1), 10, 20);
  EXPECT_EQ(solve_propagator(h, 1.0 - 1e-12).rank_kept, 1);
  EXPECT_THROW(solve_propagator(h, 1.0), std::invalid_argument);
  EXPECT_THROW(solve_propagator(h, -0.1), std::invalid_argument);
}

TEST(Propagator, ZeroDataRejected) {
  const Trajectory t(std::vector<complex>(10, 0.0), 1.0, false);
  const auto h = build_hankel(std::span(&t, 1), 3, 4);
  EXPECT_THROW(solve_propagator(h, 0.1), std::invalid_argument);
}

TEST(Propagator, NonFiniteDataRejected) {
  std::vector<complex> x(10, 1.0);
  x[4] = complex(std::nan(""), 0.0);
  const Trajectory t(x, 1.0, false);
  const auto h = build_hankel(std::span(&t, 1), 3, 4);
  EXPECT_THROW(solve_propagator(h, 0.1), std::invalid_argument);
}

TEST(Propagator, ThreeModeRecovery) {
  const std::vector<complex> modes{std::polar(0.99, -0.3), std::polar(0.97, 0.2),
                                   std::polar(1.0, 0.7)};
  std::vector<complex> x(30, 0.0);
  for (int k = 0; k < 30; ++k) {
    for (const auto& m : modes) x[static_cast<std::size_t>(k)] += std::pow(m, k);
  }
  const Trajectory t(x, 1.0, false);
  const auto h = build_hankel(std::span(&t, 1), 6, 15);
  const auto fit = solve_propagator(h, 1e-10);
  EXPECT_EQ(fit.rank_kept, 3);
  for (const auto& m : modes) {
    double best = 1e9;
    for (const auto& l : fit.eigenvalues) best = std::min(best, std::abs(l - m));
    EXPECT_LT(best, 1e-8);
  }
}

TEST(Propagator, FactorsReproduceDenseOperator) {
  const auto noisy = gaussian_corrupt(exact_signal(random_spectrum(5, 8), 1.0, 60), 0.05, 2);
  const auto h = build_hankel(std::span(&noisy, 1), 20, 39);
  const auto fit = solve_propagator(h, 0.05);
  const Eigen::MatrixXcd dense = fit.dense_operator();
  EXPECT_EQ(dense.rows(), fit.side());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense);
  std::vector<double> a, b;
  for (const auto& l : es.eigenvalues()) a.push_back(std::abs(l));
  for (const auto& l : fit.eigenvalues) b.push_back(std::abs(l));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-8);
}

TEST(Propagator, LeastSquaresOptimalInKeptSubspace) {
  const auto noisy = gaussian_corrupt(exact_signal(random_spectrum(6, 1), 1.0, 80), 0.1, 4);
  const auto h = build_hankel(std::span(&noisy, 1), 25, 50);
  const auto fit = solve_propagator(h, 0.1);
  const Eigen::MatrixXcd a = fit.dense_operator();
  const double base = residual(h, a);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXcd c(a.rows(), fit.rank_kept);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = complex(g(gen), g(gen)) * 1e-3;
    // Perturb only along the kept left singular directions (rows of `right`).
    EXPECT_GE(residual(h, a + c * fit.right), base * (1 - 1e-12));
  }
}

TEST(Propagator, NoTruncationMatchesNormalEquations) {
  const auto noisy = gaussian_corrupt(exact_signal(random_spectrum(3, 5), 1.0, 40), 0.2, 1);
  const auto h = build_hankel(std::span(&noisy, 1), 8, 30);
  const auto fit = solve_propagator(h, 0.0);
  const Eigen::MatrixXcd x = h.x();
  const Eigen::MatrixXcd xs = h.x_shift();
  const Eigen::MatrixXcd gram = x * x.adjoint();
  const Eigen::MatrixXcd normal = xs * x.adjoint() * gram.inverse();
  EXPECT_NEAR(residual(h, fit.dense_operator()), residual(h, normal), 1e-9);
}

TEST(ExtractGse, PicksLargestPhase) {
  const auto a = extract_gse(fit_with({std::polar(1.0, -0.3), std::polar(1.0, -0.1)}), 1.0);
  EXPECT_NEAR(a.energy, 0.1, 1e-14);
  const auto b = extract_gse(fit_with({std::polar(1.0, 0.4), std::polar(1.0, -0.1)}), 1.0);
  EXPECT_NEAR(b.energy, -0.4, 1e-14);
  ASSERT_EQ(b.all_energies.size(), 2u);
  EXPECT_NEAR(b.all_energies[0], -0.4, 1e-14);
  EXPECT_NEAR(b.all_energies[1], 0.1, 1e-14);
}

TEST(ExtractGse, DampedEigenvalue) {
  const auto e = extract_gse(fit_with({std::exp(complex(-0.05, -0.2))}), 1.0);
  EXPECT_NEAR(e.energy, 0.2, 1e-14);
  EXPECT_NEAR(e.theta, 0.05, 1e-14);
  const auto half = extract_gse(fit_with({std::exp(complex(-0.05, -0.2))}), 0.5);
  EXPECT_NEAR(half.energy, 0.4, 1e-14);
  EXPECT_NEAR(half.theta, 0.1, 1e-14);
}

TEST(ExtractGse, MagnitudeFloor) {
  const auto e = extract_gse(fit_with({0.0, 1e-14 * std::polar(1.0, 2.0), std::polar(0.5, -0.25)}), 1.0);
  EXPECT_NEAR(e.energy, 0.25, 1e-14);
  EXPECT_EQ(e.all_energies.size(), 1u);
  EXPECT_THROW(extract_gse(fit_with({0.0, 1e-13}), 1.0), std::runtime_error);
  EXPECT_THROW(extract_gse(fit_with({1.0}), 0.0), std::invalid_argument);
}

TEST(Odmd, NoiselessFiveLevels) {
  // Real data carries +-E for every level, so the ground level must also be
  // the largest in magnitude for the real-part estimate.
  const std::vector<double> e{-0.7, -0.2, 0.1, 0.3, 0.6};
  const Spectrum s(e, make_reference_overlaps(5, 0.4));
  const auto t = exact_signal(s, 1.0, 61);
  OdmdOptions opt;
  opt.delta = 1e-10;
  const auto est = odmd_estimate(t, 40, opt);
  EXPECT_NEAR(est.energy, -0.7, 1e-8);
  EXPECT_EQ(est.rank_kept, 5);
  const auto re = odmd_estimate(t.real_part(), 40, opt);
  EXPECT_NEAR(re.energy, -0.7, 1e-8);
}

TEST(Odmd, InsufficientSamplesRejected) {
  const Trajectory t({1.0}, 1.0, false);
  EXPECT_THROW(odmd_estimate(t, 0, OdmdOptions{}), std::invalid_argument);
  const auto longer = exact_signal(random_spectrum(3, 1), 1.0, 10);
  EXPECT_THROW(odmd_estimate(longer, 10, OdmdOptions{}), std::invalid_argument);
}

TEST(Odmd, ExactRecoveryOnRandomSpectra) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 1 + static_cast<int>(seed % 8);
    const auto s = random_spectrum(n, seed);
    // Distinct modes only; random draws closer than 1e-3 would need far more data.
    bool separated = true;
    for (std::size_t i = 1; i < s.size(); ++i) {
      separated = separated && s.eigenvalues()[i] - s.eigenvalues()[i - 1] > 1e-2;
    }
    if (!separated) continue;
    const int k = 6 * n + 4;
    const auto t = exact_signal(s, 1.0, samples_needed(k, default_delay(k)));
    OdmdOptions opt;
    opt.delta = 1e-9;
    const auto est = odmd_estimate(t, k, opt);
    EXPECT_NEAR(est.energy, s.ground_energy(), 1e-7) << seed;
    ASSERT_EQ(est.all_energies.size(), s.size()) << seed;
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_NEAR(est.all_energies[i], s.eigenvalues()[i], 1e-7) << seed;
      EXPECT_NEAR(est.all_damping[i], 0.0, 1e-7) << seed;
    }
  }
}

TEST(Odmd, DepolarizationOnlyShiftsDamping) {
  const Spectrum s({-0.5, 0.2, 0.6}, {0.5, 0.3, 0.2});
  OdmdOptions opt;
  opt.delta = 1e-10;
  const auto clean = odmd_estimate(exact_signal(s, 1.0, 50), 30, opt);
  const auto damped = odmd_estimate(depolarized_signal(s, 0.02, 1.0, 50), 30, opt);
  EXPECT_NEAR(damped.energy, clean.energy, 1e-8);
  EXPECT_NEAR(damped.theta - clean.theta, 0.02, 1e-8);
}

TEST(Odmd, Deterministic) {
  const auto noisy = gaussian_corrupt(exact_signal(random_spectrum(6, 2), 1.0, 200), 0.1, 3);
  OdmdOptions opt;
  const auto a = odmd_estimate(noisy, 120, opt);
  const auto b = odmd_estimate(noisy, 120, opt);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.all_energies, b.all_energies);
}

TEST(Fdodmd, EmptyEnsembleWithRawEqualsOdmd) {
  const auto noisy = gaussian_corrupt(exact_signal(random_spectrum(5, 7), 1.0, 200), 0.1, 5);
  OdmdOptions opt;
  for (int k : {20, 57, 120}) {
    const auto a = odmd_estimate(noisy, k, opt);
    const auto b = fdodmd_estimate(noisy, std::vector<double>{}, true, k, opt);
    EXPECT_EQ(a.energy, b.energy);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(a.all_energies, b.all_energies);
  }
  EXPECT_THROW(fdodmd_estimate(noisy, std::vector<double>{}, false, 20, opt),
               std::invalid_argument);
}

TEST(Fdodmd, DuplicatedTrajectoriesMatchSingle) {
  const auto noisy = gaussian_corrupt(exact_signal(random_spectrum(4, 9), 1.0, 100), 0.05, 6);
  const auto single = build_hankel(std::span(&noisy, 1), 30, 60);
  const std::vector<Trajectory> copies(3, noisy);
  const auto stacked = build_hankel(copies, 30, 60);
  const auto a = extract_gse(solve_propagator(single, 0.05), 1.0);
  const auto b = extract_gse(solve_propagator(stacked, 0.05), 1.0);
  EXPECT_EQ(a.rank_kept, b.rank_kept);
  EXPECT_NEAR(a.energy, b.energy, 1e-10);
}

TEST(Fdodmd, NoiselessRecovery) {
  const Spectrum s({-0.4, 0.0, 0.5}, {0.4, 0.3, 0.3});
  const auto t = exact_signal(s, 1.0, 200);
  // Thresholding leaves small leakage residue, so the cutoff must sit above it.
  OdmdOptions opt;
  opt.delta = 0.05;
  const std::vector<double> gammas{1.0, 2.0};
  const auto est = fdodmd_estimate(t, gammas, true, 100, opt);
  EXPECT_NEAR(est.energy, -0.4, 1e-3);
}
