#pragma once

#include "agginc/design.hpp"
#include "agginc/estimators.hpp"
#include "agginc/kernels.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace agginc {

struct TestConfig {
  double alpha = 0.05;
  std::size_t B1 = 500;  // wild bootstrap replicates for the quantiles
  std::size_t B2 = 500;  // wild bootstrap replicates for the level correction
  std::size_t B3 = 50;   // bisection steps for the correction

  void validate() const;
};

/// One entry of a bandwidth collection. `l` is set only for independence
/// tests, where each entry is a (k, l) kernel pair.
struct BandwidthChoice {
  KernelSpec k;
  std::optional<KernelSpec> l;
  double weight = 1.0;
};

using BandwidthCollection = std::vector<BandwidthChoice>;

/// Checks positivity and sum(weights) <= 1.
void validate_weights(std::span<const double> weights);

/// {2^i * median : i = -(count-1)..0} with uniform weights 1/count.
BandwidthCollection median_collection(const SampleMatrix& points, KernelFamily family, std::size_t count = 4,
                                      double imq_exponent = 0.5);

/// 3 x 3 grid {(2^i lambda_med, 2^j mu_med) : i, j in {-2, -1, 0}}, uniform weights 1/9.
BandwidthCollection hsic_collection(const SampleMatrix& x, const SampleMatrix& y,
                                    KernelFamily family = KernelFamily::Gaussian, double imq_exponent = 0.5);

/// Bandwidths 2^-l (all coordinates) for l = 1..ceil((2/d) log2((L/N) / ln ln(L/N))),
/// weights 6 / (pi^2 l^2). With dy > 0 each entry is a (k, l) pair and d = dx + dy.
/// Requires L/N > e.
BandwidthCollection theoretical_collection(std::size_t design_size, std::size_t sample_size, std::size_t dx,
                                           std::size_t dy = 0, KernelFamily family = KernelFamily::Gaussian,
                                           double imq_exponent = 0.5);

/// 1-based rank ceil(B1 (1 - level)) into the B1 + 1 sorted statistics, for level in [0, 1).
std::size_t quantile_rank(std::size_t B1, double level);

/// `statistics` holds B1 wild bootstrap replicates followed by the original
/// statistic. Returns the quantile_rank(B1, level)-th smallest value.
double bootstrap_quantile(std::span<const double> statistics, double level);

struct SingleTestResult {
  bool reject = false;
  double statistic = 0.0;
  double quantile = 0.0;
};

/// Rejects iff the incomplete statistic strictly exceeds the bootstrap
/// quantile at level config.alpha, using B1 replicates from `seed`.
SingleTestResult single_test(const PairedData& data, DesignPtr design, const TestConfig& config,
                             std::uint64_t seed);

/// Largest u in [0, 1 / max w) (to B3-step bisection resolution) such that
/// the fraction of correction replicates b with
///   max_k (c_replicates[k][b] - quantile_k(u w_k)) > 0
/// is at most alpha. Returns 0 when no probe satisfies the constraint.
double compute_u_alpha(std::span<const double> originals, const std::vector<std::vector<double>>& q_replicates,
                       const std::vector<std::vector<double>>& c_replicates, std::span<const double> weights,
                       const TestConfig& config);

struct BandwidthOutcome {
  std::vector<KernelSpec> kernels;
  double weight = 0.0;
  double statistic = 0.0;
  double level = 0.0;  // u_alpha * weight
  double quantile = 0.0;
  bool reject = false;
};

struct AggTestResult {
  Problem problem = Problem::TwoSample;
  bool reject = false;
  double u_alpha = 0.0;
  bool degenerate_correction = false;  // no probed u satisfied the constraint
  std::vector<BandwidthOutcome> per_bandwidth;
  std::size_t l_used = 0;
  std::size_t n_items = 0;
  DesignProvenance design;
  TestConfig config;
  std::uint64_t seed = 0;
};

/// Aggregated test over bandwidths. `per_bandwidth[k]` is the data paired
/// under bandwidth k; all entries must share n_items. Sign vectors are shared
/// across bandwidths within each replicate, for both bootstrap families.
AggTestResult aggregated_test(std::span<const PairedData> per_bandwidth, std::span<const double> weights,
                              DesignPtr design, const TestConfig& config, std::uint64_t seed);

/// Notices for bootstrap sizes below the sufficient conditions of the
/// aggregated test's power guarantee (for type II error `beta`). Not enforced.
std::vector<std::string> bootstrap_bound_notices(const TestConfig& config, std::span<const double> weights,
                                                 double beta = 0.05);

// ---------------------------------------------------------------------------
// End-to-end tests on raw samples.

enum class CollectionKind { Median, Theoretical };

struct DesignRequest {
  DesignKind kind = DesignKind::SubDiagonal;
  std::size_t subdiagonals = 100;  // SubDiagonal
  std::size_t size = 0;            // RandomNoReplacement
};

Design build_design(const DesignRequest& request, std::size_t n_items, std::uint64_t seed);

struct AggOptions {
  TestConfig config;
  DesignRequest design;
  CollectionKind collection = CollectionKind::Median;
  KernelFamily family = KernelFamily::Gaussian;
  double imq_exponent = 0.5;
  std::uint64_t seed = 0;
};

/// Two-sample test. The median bandwidth is taken over the pooled (truncated) samples.
AggTestResult mmdagginc(const SampleMatrix& x, const SampleMatrix& y, const AggOptions& options);

/// Independence test on paired rows (x_i, y_i).
AggTestResult hsicagginc(const SampleMatrix& x, const SampleMatrix& y, const AggOptions& options);

/// Goodness-of-fit test of `z` against the model with score `model`.
AggTestResult ksdagginc(const SampleMatrix& z, const ScoreModel& model, const AggOptions& options);

}  // namespace agginc
