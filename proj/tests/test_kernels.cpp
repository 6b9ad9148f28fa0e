#include "agginc/error.hpp"
#include "agginc/kernels.hpp"
#include "agginc/models.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace agginc;

namespace {

struct Case {
  KernelSpec spec;
  oracle::Kernel ref;
  std::vector<double> x, y;
};

// Random family, per-coordinate bandwidths and points.
Case random_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> bw(0.3, 3.0);
  std::uniform_real_distribution<double> beta(0.1, 0.9);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<std::size_t>(dim(rng));
  std::vector<double> bws(d);
  for (double& b : bws) b = bw(rng);
  const bool gaussian = rng() % 2 == 0;
  const double b = beta(rng);
  Case c{KernelSpec(gaussian ? KernelFamily::Gaussian : KernelFamily::Imq, bws, b), {gaussian, bws, b}, {}, {}};
  c.x.resize(d);
  c.y.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    c.x[i] = normal(rng);
    c.y[i] = normal(rng);
  }
  return c;
}

}  // namespace

TEST(Kernel, MatchesDirectFormula) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const Case c = random_case(rng);
    EXPECT_NEAR(eval_kernel(c.spec, c.x, c.y), oracle::kernel(c.ref, c.x, c.y), 1e-14);
  }
}

TEST(Kernel, KnownValues) {
  const std::vector<double> x{0.0, 0.0}, y{1.0, 2.0};
  const KernelSpec g(KernelFamily::Gaussian, {1.0, 2.0});
  EXPECT_DOUBLE_EQ(eval_kernel(g, x, y), std::exp(-2.0));
  const KernelSpec m(KernelFamily::Imq, {1.0, 2.0}, 0.5);
  EXPECT_DOUBLE_EQ(eval_kernel(m, x, y), 1.0 / std::sqrt(3.0));
}

TEST(Kernel, ValuesInUnitIntervalAndOneOnDiagonal) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const Case c = random_case(rng);
    const double v = eval_kernel(c.spec, c.x, c.y);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(eval_kernel(c.spec, c.x, c.x), 1.0);
    EXPECT_EQ(eval_kernel(c.spec, c.x, c.y), eval_kernel(c.spec, c.y, c.x));
  }
}

TEST(Kernel, JointScaleInvariance) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    Case c = random_case(rng);
    const double factor = 0.5 + static_cast<double>(t % 7);
    std::vector<double> cx = c.x, cy = c.y;
    for (double& v : cx) v *= factor;
    for (double& v : cy) v *= factor;
    EXPECT_NEAR(eval_kernel(c.spec.scaled(factor), cx, cy), eval_kernel(c.spec, c.x, c.y), 1e-13);
  }
}

TEST(Kernel, RejectsInvalidParameters) {
  EXPECT_THROW(KernelSpec(KernelFamily::Gaussian, {}), ConfigError);
  EXPECT_THROW(KernelSpec::gaussian(0.0, 2), ConfigError);
  EXPECT_THROW(KernelSpec::gaussian(-1.0, 2), ConfigError);
  EXPECT_THROW(KernelSpec::gaussian(std::numeric_limits<double>::infinity(), 1), ConfigError);
  EXPECT_THROW(KernelSpec::imq(1.0, 1, 1.0), ConfigError);
  EXPECT_THROW(KernelSpec::imq(1.0, 1, 0.0), ConfigError);
  EXPECT_THROW(parse_kernel_family("laplace"), ConfigError);
  EXPECT_EQ(parse_kernel_family(to_string(KernelFamily::Imq)), KernelFamily::Imq);
}

TEST(Kernel, DimensionMismatchIsInputError) {
  const KernelSpec g = KernelSpec::gaussian(1.0, 2);
  const std::vector<double> x{0.0, 1.0}, y{1.0};
  EXPECT_THROW(eval_kernel(g, x, y), InputError);
}

TEST(KernelDerivatives, MatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  const double h = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const Case c = random_case(rng);
    const auto der = kernel_derivatives(c.spec, c.x, c.y);
    EXPECT_NEAR(der.value, oracle::kernel(c.ref, c.x, c.y), 1e-14);
    double trace_fd = 0.0;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      auto xp = c.x, xm = c.x, yp = c.y, ym = c.y;
      xp[i] += h;
      xm[i] -= h;
      yp[i] += h;
      ym[i] -= h;
      const double gx = (eval_kernel(c.spec, xp, c.y) - eval_kernel(c.spec, xm, c.y)) / (2 * h);
      const double gy = (eval_kernel(c.spec, c.x, yp) - eval_kernel(c.spec, c.x, ym)) / (2 * h);
      EXPECT_NEAR(der.grad_x[i], gx, 1e-8);
      EXPECT_NEAR(der.grad_y[i], gy, 1e-8);
      trace_fd += (eval_kernel(c.spec, xp, yp) - eval_kernel(c.spec, xp, ym) - eval_kernel(c.spec, xm, yp) +
                   eval_kernel(c.spec, xm, ym)) /
                  (4 * h * h);
    }
    EXPECT_LT(std::abs(der.mixed_trace - trace_fd) / std::max(std::abs(der.mixed_trace), 1.0), 1e-5);
  }
}

TEST(HMmd, MatchesOracleAndSymmetry) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const Case a = random_case(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x2(a.x.size()), y2(a.x.size());
    for (std::size_t i = 0; i < x2.size(); ++i) {
      x2[i] = normal(rng);
      y2[i] = normal(rng);
    }
    const double got = h_mmd(a.spec, a.x, x2, a.y, y2);
    EXPECT_NEAR(got, oracle::h_mmd(a.ref, a.x, x2, a.y, y2), 1e-14);
    EXPECT_DOUBLE_EQ(got, h_mmd(a.spec, x2, a.x, y2, a.y));
  }
}

TEST(HMmd, VanishesWhenSamplesCoincide) {
  const KernelSpec g = KernelSpec::gaussian(1.0, 1);
  const std::vector<double> a{0.3}, b{-1.2};
  EXPECT_EQ(h_mmd(g, a, b, a, b), 0.0);
}

TEST(HHsic, IsQuarterProductOfMmdCores) {
  std::mt19937_64 rng(6);
  const KernelSpec k = KernelSpec::gaussian(0.8, 2);
  const KernelSpec l = KernelSpec::imq(1.3, 1, 0.5);
  const oracle::Kernel kr{true, {0.8, 0.8}, 0.5}, lr{false, {1.3}, 0.5};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::vector<double>> xs(4, std::vector<double>(2)), ys(4, std::vector<double>(1));
    for (auto& v : xs)
      for (double& e : v) e = normal(rng);
    for (auto& v : ys)
      for (double& e : v) e = normal(rng);
    const JointPoint z1{xs[0], ys[0]}, z2{xs[1], ys[1]}, z3{xs[2], ys[2]}, z4{xs[3], ys[3]};
    const double want = 0.25 * oracle::h_mmd(kr, xs[0], xs[1], xs[2], xs[3]) *
                        oracle::h_mmd(lr, ys[0], ys[1], ys[2], ys[3]);
    EXPECT_NEAR(h_hsic(k, l, z1, z2, z3, z4), want, 1e-14);
  }
}

TEST(HKsd, MatchesOracleForBothOverloads) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const Case c = random_case(rng);
    const std::size_t d = c.x.size();
    Eigen::VectorXd mean(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) mean(static_cast<Eigen::Index>(i)) = 0.1 * static_cast<double>(i);
    const ScoreModel model = gaussian_score_model(mean);
    std::vector<double> sx(d), sy(d);
    for (std::size_t i = 0; i < d; ++i) {
      sx[i] = mean(static_cast<Eigen::Index>(i)) - c.x[i];
      sy[i] = mean(static_cast<Eigen::Index>(i)) - c.y[i];
    }
    const double want = oracle::h_ksd(c.ref, c.x, c.y, sx, sy);
    const double tol = 1e-12 * std::max(1.0, std::abs(want));
    EXPECT_NEAR(h_ksd(c.spec, model, c.x, c.y), want, tol);
    EXPECT_NEAR(h_ksd(c.spec, c.x, c.y, sx, sy), want, tol);
    EXPECT_NEAR(h_ksd(c.spec, model, c.x, c.y), h_ksd(c.spec, model, c.y, c.x), tol);
  }
}

TEST(HKsd, DiagonalAtOriginForStandardGaussian) {
  for (std::size_t d : {1U, 3U, 10U}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      const KernelSpec g = KernelSpec::gaussian(lambda, d);
      const std::vector<double> zero(d, 0.0);
      const ScoreModel model = gaussian_score_model(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
      EXPECT_DOUBLE_EQ(h_ksd(g, model, zero, zero), 2.0 * static_cast<double>(d) / (lambda * lambda));
    }
  }
}

TEST(MedianBandwidth, OddAndEvenPairCounts) {
  SampleMatrix three(3, 1);
  three << 0.0, 1.0, 3.0;  // distances 1, 3, 2
  EXPECT_DOUBLE_EQ(median_bandwidth(three), 2.0);
  SampleMatrix four(4, 1);
  four << 0.0, 1.0, 3.0, 7.0;  // distances 1, 2, 3, 4, 6, 7
  EXPECT_DOUBLE_EQ(median_bandwidth(four), 3.5);
  SampleMatrix two_d(2, 2);
  two_d << 0.0, 0.0, 3.0, 4.0;
  EXPECT_DOUBLE_EQ(median_bandwidth(two_d), 5.0);
}

TEST(MedianBandwidth, MatchesSortedOracle) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto n = static_cast<std::size_t>(3 + t);
    const SampleMatrix m = oracle::random_matrix(n, 3, rng);
    std::vector<double> dist;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = i + 1; j < m.rows(); ++j) dist.push_back((m.row(i) - m.row(j)).norm());
    std::sort(dist.begin(), dist.end());
    const std::size_t k = dist.size();
    const double want = k % 2 == 1 ? dist[k / 2] : 0.5 * (dist[k / 2 - 1] + dist[k / 2]);
    EXPECT_DOUBLE_EQ(median_bandwidth(m), want);
  }
}

TEST(MedianBandwidth, DuplicatedDataIsDegenerate) {
  SampleMatrix same = SampleMatrix::Constant(5, 2, 1.5);
  EXPECT_THROW(median_bandwidth(same), DegenerateDataError);
  SampleMatrix one(1, 2);
  one << 1.0, 2.0;
  EXPECT_THROW(median_bandwidth(one), InputError);
}
