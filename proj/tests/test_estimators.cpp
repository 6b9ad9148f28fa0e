#include "agginc/error.hpp"
#include "agginc/estimators.hpp"
#include "agginc/models.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <memory>
#include <random>

using namespace agginc;

namespace {

DesignPtr share(Design d) { return std::make_shared<const Design>(std::move(d)); }

std::vector<oracle::Vec> gaussian_scores(const SampleMatrix& z, const Eigen::VectorXd& mean) {
  std::vector<oracle::Vec> s;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    oracle::Vec v(static_cast<std::size_t>(z.cols()));
    for (Eigen::Index c = 0; c < z.cols(); ++c) v[static_cast<std::size_t>(c)] = mean(c) - z(i, c);
    s.push_back(v);
  }
  return s;
}

// Alternates sub-diagonal, random and full designs over n items.
DesignPtr some_design(std::size_t n, std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0:
      return share(subdiagonal_design(n, 1 + rng() % (n - 1)));
    case 1:
      return share(random_design(n, 1 + rng() % total_pair_count(n), rng()));
    default:
      return share(full_design(n));
  }
}

}  // namespace

TEST(IncompleteStatistic, MmdMatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 3 + rng() % 16, d = 1 + rng() % 4;
    const SampleMatrix x = oracle::random_matrix(n, d, rng);
    const SampleMatrix y = oracle::random_matrix(n + rng() % 3, d, rng, 1.5);
    const KernelSpec spec = t % 2 ? KernelSpec::gaussian(1.3, d) : KernelSpec::imq(0.7, d, 0.4);
    const auto design = some_design(n, rng);
    const auto k = oracle::from_spec(spec);
    const double got = incomplete_statistic(cache_h_values(pair_two_sample(x, y, spec), design));
    EXPECT_LT(oracle::relative_error(got, oracle::design_mean(design->pairs(), oracle::mmd_pairs(k, x, y))), 1e-12);
  }
}

TEST(IncompleteStatistic, HsicMatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 40; ++t) {
    const std::size_t rows = 6 + rng() % 15, dx = 1 + rng() % 3, dy = 1 + rng() % 2;
    const SampleMatrix z = oracle::random_matrix(rows, dx + dy, rng);
    const KernelSpec ks = KernelSpec::gaussian(0.9, dx), ls = KernelSpec::gaussian(1.1, dy);
    const auto design = some_design(rows / 2, rng);
    const auto k = oracle::from_spec(ks), l = oracle::from_spec(ls);
    const double got = incomplete_statistic(cache_h_values(pair_independence(z, dx, ks, ls), design));
    const double want = oracle::design_mean(design->pairs(), oracle::hsic_pairs(k, l, z, static_cast<Eigen::Index>(dx)));
    EXPECT_LT(oracle::relative_error(got, want), 1e-12);
  }
}

TEST(IncompleteStatistic, KsdMatchesBruteForce) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + rng() % 19, d = 1 + rng() % 4;
    const SampleMatrix z = oracle::random_matrix(n, d, rng);
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), 0.2);
    const KernelSpec spec = t % 2 ? KernelSpec::gaussian(1.0, d) : KernelSpec::imq(1.0, d, 0.5);
    const auto design = some_design(n, rng);
    const auto k = oracle::from_spec(spec);
    const auto scores = gaussian_scores(z, mean);
    const double got = incomplete_statistic(cache_h_values(pair_gof(z, spec, gaussian_score_model(mean)), design));
    EXPECT_LT(oracle::relative_error(got, oracle::design_mean(design->pairs(), oracle::ksd_pairs(k, z, scores))),
              1e-12);
  }
}

TEST(IncompleteStatistic, FullDesignKsdEqualsCompleteKsd) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 5 + rng() % 30, d = 1 + rng() % 3;
    const SampleMatrix z = oracle::random_matrix(n, d, rng);
    const Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    const KernelSpec spec = KernelSpec::imq(1.2, d);
    const ScoreModel model = gaussian_score_model(mean);
    const double incomplete = incomplete_statistic(cache_h_values(pair_gof(z, spec, model), share(full_design(n))));
    const auto k = oracle::from_spec(spec);
    const auto scores = gaussian_scores(z, mean);
    const double oracle_complete = oracle::complete_mean(n, oracle::ksd_pairs(k, z, scores));
    EXPECT_LT(oracle::relative_error(incomplete, oracle_complete), 1e-10);
    EXPECT_LT(oracle::relative_error(complete_ksd(z, spec, model), oracle_complete), 1e-10);
  }
}

TEST(CompleteMmd, MatchesPairwiseSums) {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 2 + rng() % 10, n = 2 + rng() % 10, d = 1 + rng() % 3;
    const SampleMatrix x = oracle::random_matrix(m, d, rng);
    const SampleMatrix y = oracle::random_matrix(n, d, rng);
    const KernelSpec spec = KernelSpec::gaussian(1.0, d);
    const auto k = oracle::from_spec(spec);
    long double xx = 0, yy = 0, xy = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.rows(); ++j)
        if (i != j) xx += oracle::kernel(k, oracle::row_of(x, i), oracle::row_of(x, j));
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      for (Eigen::Index j = 0; j < y.rows(); ++j)
        if (i != j) yy += oracle::kernel(k, oracle::row_of(y, i), oracle::row_of(y, j));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < y.rows(); ++j) xy += oracle::kernel(k, oracle::row_of(x, i), oracle::row_of(y, j));
    const double md = static_cast<double>(m), nd = static_cast<double>(n);
    const double want = static_cast<double>(xx / (md * (md - 1)) + yy / (nd * (nd - 1)) - 2 * xy / (md * nd));
    EXPECT_NEAR(complete_mmd(x, y, spec), want, 1e-12);
  }
}

TEST(CompleteMmd, IdenticalSamplesGiveSmallNegativeValue) {
  // With X = Y the cross term includes the diagonal k(x_i, x_i) = 1, so the
  // unbiased estimate is 2 S / (m^2 (m - 1)) - 2 / m where S sums k over i != j.
  std::mt19937_64 rng(16);
  const SampleMatrix x = oracle::random_matrix(12, 2, rng);
  const KernelSpec spec = KernelSpec::gaussian(1.0, 2);
  const auto k = oracle::from_spec(spec);
  long double s = 0;
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = 0; j < 12; ++j)
      if (i != j) s += oracle::kernel(k, oracle::row_of(x, i), oracle::row_of(x, j));
  const double want = static_cast<double>(2 * s / (144.0 * 11.0)) - 2.0 / 12.0;
  EXPECT_NEAR(complete_mmd(x, x, spec), want, 1e-13);
  EXPECT_LT(complete_mmd(x, x, spec), 0.0);
}

TEST(CompleteHsic, TraceFormMatchesFourthOrderSum) {
  std::mt19937_64 rng(17);
  for (std::size_t n : {6U, 7U, 8U}) {
    const SampleMatrix z = oracle::random_matrix(n, 3, rng);
    const KernelSpec ks = KernelSpec::gaussian(1.0, 2), ls = KernelSpec::imq(0.8, 1);
    const double want = oracle::hsic_fourth_order(oracle::from_spec(ks), oracle::from_spec(ls), z, 2);
    EXPECT_NEAR(complete_hsic(z, 2, ks, ls), want, 1e-9);
  }
}

TEST(Pairing, TwoSampleTruncatesToSmallerSet) {
  std::mt19937_64 rng(18);
  const SampleMatrix x = oracle::random_matrix(7, 2, rng);
  const SampleMatrix y = oracle::random_matrix(10, 2, rng);
  const KernelSpec spec = KernelSpec::gaussian(1.0, 2);
  const PairedData data = pair_two_sample(x, y, spec);
  EXPECT_EQ(data.n_items, 7U);
  const SampleMatrix y_head = y.topRows(7);
  const PairedData trimmed = pair_two_sample(x, y_head, spec);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = i + 1; j < 7; ++j) EXPECT_EQ(data.item_eval(i, j), trimmed.item_eval(i, j));
}

TEST(Pairing, IndependenceHalvesAndDropsOddRow) {
  std::mt19937_64 rng(19);
  const SampleMatrix z = oracle::random_matrix(9, 2, rng);
  const KernelSpec k = KernelSpec::gaussian(1.0, 1);
  const PairedData data = pair_independence(z, 1, k, k);
  EXPECT_EQ(data.n_items, 4U);
  EXPECT_EQ(data.kernels.size(), 2U);
  const auto kr = oracle::from_spec(k);
  const auto h = oracle::hsic_pairs(kr, kr, z, 1);
  EXPECT_NEAR(data.item_eval(0, 3), h(0, 3), 1e-15);
}

TEST(Pairing, RejectsMismatchedInput) {
  const SampleMatrix a = SampleMatrix::Random(5, 2), b = SampleMatrix::Random(5, 3);
  EXPECT_THROW(pair_two_sample(a, b, KernelSpec::gaussian(1.0, 2)), InputError);
  EXPECT_THROW(pair_two_sample(a, a, KernelSpec::gaussian(1.0, 3)), InputError);
  EXPECT_THROW(pair_independence(a, 2, KernelSpec::gaussian(1.0, 2), KernelSpec::gaussian(1.0, 1)), InputError);
  EXPECT_THROW(pair_gof(a, KernelSpec::gaussian(1.0, 2), gaussian_score_model(Eigen::VectorXd::Zero(3))),
               InputError);
  const PairedData data = pair_two_sample(a, a, KernelSpec::gaussian(1.0, 2));
  EXPECT_THROW(cache_h_values(data, share(full_design(6))), ConfigError);
}

TEST(Cache, OneEvaluationPerDesignPairAndNoneDuringBootstrap) {
  std::mt19937_64 rng(20);
  const SampleMatrix z = oracle::random_matrix(60, 2, rng);
  PairedData data = pair_gof(z, KernelSpec::imq(1.0, 2), gaussian_score_model(Eigen::VectorXd::Zero(2)));
  auto calls = std::make_shared<std::size_t>(0);
  auto inner = data.item_eval;
  data.item_eval = [calls, inner](std::size_t i, std::size_t j) {
    ++*calls;
    return inner(i, j);
  };
  const auto design = share(subdiagonal_design(60, 7));
  const HValueCache cache = cache_h_values(data, design);
  EXPECT_EQ(*calls, design->size());
  wild_bootstrap_statistics(cache, 50, RademacherSource(1, 2));
  incomplete_statistic(cache);
  EXPECT_EQ(*calls, design->size());
}

TEST(Rademacher, DeterministicBalancedAndOrderFree) {
  const RademacherSource src(42, 7);
  std::vector<double> a(1000), b(1000);
  src.fill(5, a);
  src.fill(3, b);
  src.fill(5, b);
  EXPECT_EQ(a, b);
  src.fill(6, b);
  EXPECT_NE(a, b);
  const RademacherSource other(42, 8);
  other.fill(5, b);
  EXPECT_NE(a, b);
  std::size_t plus = 0, total = 0;
  for (std::size_t r = 0; r < 100; ++r) {
    src.fill(r, a);
    for (double s : a) {
      ASSERT_TRUE(s == 1.0 || s == -1.0);
      plus += s > 0;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(plus) / static_cast<double>(total), 0.5, 0.01);
}

TEST(WildBootstrap, ConstantSignsReproduceStatisticExactly) {
  std::mt19937_64 rng(21);
  for (std::size_t n : {10U, 500U, 3000U}) {
    const SampleMatrix x = oracle::random_matrix(n, 2, rng), y = oracle::random_matrix(n, 2, rng);
    const auto design = share(random_design(n, std::min<std::size_t>(5 * n, total_pair_count(n)), n));
    const HValueCache cache = cache_h_values(pair_two_sample(x, y, KernelSpec::gaussian(1.0, 2)), design);
    const double stat = incomplete_statistic(cache);
    EXPECT_EQ(wild_bootstrap_statistic(cache, std::vector<double>(n, 1.0)), stat);
    EXPECT_EQ(wild_bootstrap_statistic(cache, std::vector<double>(n, -1.0)), stat);
  }
}

TEST(WildBootstrap, MatchesSignedOracleSum) {
  std::mt19937_64 rng(22);
  const std::size_t n = 40;
  const SampleMatrix z = oracle::random_matrix(n, 3, rng);
  const KernelSpec spec = KernelSpec::imq(1.0, 3);
  const auto design = share(subdiagonal_design(n, 10));
  const HValueCache cache = cache_h_values(pair_gof(z, spec, gaussian_score_model(Eigen::VectorXd::Zero(3))), design);
  const auto scores = gaussian_scores(z, Eigen::VectorXd::Zero(3));
  const auto k = oracle::from_spec(spec);
  const auto h = oracle::ksd_pairs(k, z, scores);
  const RademacherSource src(3, 4);
  const auto reps = wild_bootstrap_statistics(cache, 20, src);
  std::vector<double> eps(n);
  for (std::size_t b = 0; b < 20; ++b) {
    src.fill(b, eps);
    const double want = oracle::design_mean(design->pairs(), [&](std::size_t i, std::size_t j) {
      return eps[i] * eps[j] * h(i, j);
    });
    EXPECT_NEAR(reps[b], want, 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST(WildBootstrap, MmdReplicateEqualsStatisticOnSwappedSamples) {
  // Flipping the sign of item i is the same as exchanging X_i and Y_i.
  std::mt19937_64 rng(23);
  const std::size_t n = 30;
  const SampleMatrix x = oracle::random_matrix(n, 2, rng), y = oracle::random_matrix(n, 2, rng, 2.0);
  const KernelSpec spec = KernelSpec::gaussian(1.5, 2);
  const auto design = share(random_design(n, 200, 1));
  const HValueCache cache = cache_h_values(pair_two_sample(x, y, spec), design);
  const RademacherSource src(8, 9);
  std::vector<double> eps(n);
  for (std::size_t b = 0; b < 10; ++b) {
    src.fill(b, eps);
    SampleMatrix xs = x, ys = y;
    for (std::size_t i = 0; i < n; ++i) {
      if (eps[i] < 0) {
        xs.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(i));
        ys.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(i));
      }
    }
    const double swapped = incomplete_statistic(cache_h_values(pair_two_sample(xs, ys, spec), design));
    EXPECT_NEAR(wild_bootstrap_statistic(cache, eps), swapped, 1e-14);
  }
}

TEST(WildBootstrap, HsicReplicateEqualsStatisticWithSwappedXHalves) {
  // Flipping item i exchanges the X parts of rows i and i + n, which flips
  // the sign of the k-core and leaves the l-core unchanged.
  std::mt19937_64 rng(24);
  const std::size_t rows = 40, n = 20;
  const SampleMatrix z = oracle::random_matrix(rows, 2, rng);
  const KernelSpec k = KernelSpec::gaussian(1.0, 1);
  const auto design = share(full_design(n));
  const HValueCache cache = cache_h_values(pair_independence(z, 1, k, k), design);
  const RademacherSource src(5, 6);
  std::vector<double> eps(n);
  for (std::size_t b = 0; b < 10; ++b) {
    src.fill(b, eps);
    SampleMatrix zs = z;
    for (std::size_t i = 0; i < n; ++i) {
      if (eps[i] < 0) std::swap(zs(static_cast<Eigen::Index>(i), 0), zs(static_cast<Eigen::Index>(i + n), 0));
    }
    const double swapped = incomplete_statistic(cache_h_values(pair_independence(zs, 1, k, k), design));
    EXPECT_NEAR(wild_bootstrap_statistic(cache, eps), swapped, 1e-14);
  }
}

TEST(WildBootstrap, SharedSignsMatchPerCacheReplicates) {
  std::mt19937_64 rng(25);
  const std::size_t n = 50;
  const SampleMatrix x = oracle::random_matrix(n, 1, rng), y = oracle::random_matrix(n, 1, rng);
  const auto design = share(subdiagonal_design(n, 5));
  std::vector<HValueCache> caches;
  for (double bw : {0.25, 0.5, 1.0}) {
    caches.push_back(cache_h_values(pair_two_sample(x, y, KernelSpec::gaussian(bw, 1)), design));
  }
  const RademacherSource src(1, 1);
  const auto shared = wild_bootstrap_shared(caches, 30, src);
  for (std::size_t k = 0; k < caches.size(); ++k) {
    EXPECT_EQ(shared[k], wild_bootstrap_statistics(caches[k], 30, src));
  }
}

TEST(WildBootstrap, RejectsWrongSignLengthAndMixedDesigns) {
  const SampleMatrix x = SampleMatrix::Random(10, 1), y = SampleMatrix::Random(10, 1);
  const PairedData data = pair_two_sample(x, y, KernelSpec::gaussian(1.0, 1));
  const HValueCache a = cache_h_values(data, share(subdiagonal_design(10, 2)));
  EXPECT_THROW(wild_bootstrap_statistic(a, std::vector<double>(9, 1.0)), InputError);
  const HValueCache b = cache_h_values(data, share(subdiagonal_design(10, 3)));
  const std::vector<HValueCache> mixed{a, b};
  EXPECT_THROW(wild_bootstrap_shared(mixed, 2, RademacherSource(0, 0)), ConfigError);
}
