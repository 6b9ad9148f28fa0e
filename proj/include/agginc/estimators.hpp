#pragma once

#include "agginc/design.hpp"
#include "agginc/kernels.hpp"
#include "agginc/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace agginc {

enum class Problem { TwoSample, Independence, GoodnessOfFit };

std::string to_string(Problem problem);
Problem parse_problem(const std::string& name);

/// Raw samples arranged so that every problem reduces to a second-order
/// statistic over item pairs (i, j) of {0..n_items-1}.
///
///   TwoSample      n_items = min(m, n);  (i, j) -> h_mmd(X_i, X_j; Y_i, Y_j)
///   Independence   n_items = floor(N/2); (i, j) -> h_hsic(Z_i, Z_j, Z_{i+n}, Z_{j+n})
///   GoodnessOfFit  n_items = N;          (i, j) -> h_ksd(Z_i, Z_j)
struct PairedData {
  Problem problem = Problem::TwoSample;
  std::size_t n_items = 0;
  /// Kernel(s) bound into item_eval: one for MMD/KSD, (k, l) for HSIC.
  std::vector<KernelSpec> kernels;
  std::function<double(std::size_t, std::size_t)> item_eval;
};

/// Samples beyond min(m, n) in the larger set are ignored.
PairedData pair_two_sample(std::shared_ptr<const SampleMatrix> x, std::shared_ptr<const SampleMatrix> y,
                           const KernelSpec& spec);
PairedData pair_two_sample(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& spec);

/// Columns [0, dx) of `z` are the X component, the rest the Y component.
/// For odd N the last sample is unused.
PairedData pair_independence(std::shared_ptr<const SampleMatrix> z, std::size_t dx,
                             const KernelSpec& kspec, const KernelSpec& lspec);
PairedData pair_independence(const SampleMatrix& z, std::size_t dx, const KernelSpec& kspec,
                             const KernelSpec& lspec);

/// Scores are evaluated once per sample at construction.
PairedData pair_gof(std::shared_ptr<const SampleMatrix> z, const KernelSpec& spec, const ScoreModel& model);
PairedData pair_gof(const SampleMatrix& z, const KernelSpec& spec, const ScoreModel& model);

/// h values for each pair of a design, aligned index-wise with design->pairs().
struct HValueCache {
  DesignPtr design;
  std::vector<double> values;
};

/// Exactly one item_eval call per design pair.
HValueCache cache_h_values(const PairedData& data, DesignPtr design);

/// Mean of the cached values.
double incomplete_statistic(const HValueCache& cache);

/// Source of Rademacher vectors. The vector for replicate b depends only on
/// (seed, stream, b), so replicates can be generated in any order.
class RademacherSource {
 public:
  RademacherSource(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  /// Fills `signs` with i.i.d. uniform +1/-1 values.
  void fill(std::size_t replicate, std::span<double> signs) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// (1/|D|) sum_{(i,j) in D} signs_i signs_j h_ij for one given sign vector.
double wild_bootstrap_statistic(const HValueCache& cache, std::span<const double> signs);

/// B replicates, replicate b using source.fill(b, ...). No new h evaluations.
std::vector<double> wild_bootstrap_statistics(const HValueCache& cache, std::size_t replicates,
                                              const RademacherSource& source);

/// Replicates for several caches over the same design, with replicate b using
/// the same sign vector for every cache. Result is indexed [cache][replicate].
std::vector<std::vector<double>> wild_bootstrap_shared(std::span<const HValueCache> caches,
                                                       std::size_t replicates,
                                                       const RademacherSource& source);

/// Quadratic-time complete U-statistics (Gram-sum and trace closed forms).
double complete_mmd(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& spec);
double complete_hsic(const SampleMatrix& z, std::size_t dx, const KernelSpec& kspec, const KernelSpec& lspec);
double complete_ksd(const SampleMatrix& z, const KernelSpec& spec, const ScoreModel& model);

}  // namespace agginc
