#include "agginc/testing.hpp"

#include "agginc/error.hpp"
#include "agginc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace agginc {

namespace {

constexpr double kWeightSumSlack = 1e-12;

// Every bootstrap family draws from its own stream; see rng.hpp.
RademacherSource quantile_source(std::uint64_t seed) { return {seed, streams::kQuantileBootstrap}; }
RademacherSource correction_source(std::uint64_t seed) { return {seed, streams::kCorrectionBootstrap}; }

std::vector<double> sorted_with_original(const std::vector<double>& replicates, double original) {
  std::vector<double> all(replicates);
  all.push_back(original);
  std::sort(all.begin(), all.end());
  return all;
}

double quantile_of_sorted(const std::vector<double>& sorted, std::size_t B1, double level) {
  return sorted[quantile_rank(B1, level) - 1];
}

KernelSpec make_kernel(KernelFamily family, double bandwidth, std::size_t d, double imq_exponent) {
  return family == KernelFamily::Imq ? KernelSpec::imq(bandwidth, d, imq_exponent)
                                     : KernelSpec::gaussian(bandwidth, d);
}

SampleMatrix top_rows(const SampleMatrix& m, Eigen::Index n) { return m.topRows(n); }

}  // namespace

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (B1 < 1 || B2 < 1 || B3 < 1) throw ConfigError("B1, B2 and B3 must be positive");
}

void validate_weights(std::span<const double> weights) {
  if (weights.empty()) throw ConfigError("bandwidth collection is empty");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("bandwidth weights must be positive");
    sum += w;
  }
  if (sum > 1.0 + kWeightSumSlack) throw ConfigError("bandwidth weights must sum to at most 1");
}

BandwidthCollection median_collection(const SampleMatrix& points, KernelFamily family, std::size_t count,
                                      double imq_exponent) {
  if (count == 0) throw ConfigError("collection size must be positive");
  const double median = median_bandwidth(points);
  const auto d = static_cast<std::size_t>(points.cols());
  BandwidthCollection out;
  for (std::size_t e = count; e-- > 0;) {
    const double bw = std::ldexp(median, -static_cast<int>(e));
    out.push_back({make_kernel(family, bw, d, imq_exponent), std::nullopt, 1.0 / static_cast<double>(count)});
  }
  return out;
}

BandwidthCollection hsic_collection(const SampleMatrix& x, const SampleMatrix& y, KernelFamily family,
                                    double imq_exponent) {
  const double lambda_med = median_bandwidth(x);
  const double mu_med = median_bandwidth(y);
  const auto dx = static_cast<std::size_t>(x.cols());
  const auto dy = static_cast<std::size_t>(y.cols());
  BandwidthCollection out;
  for (int i = -2; i <= 0; ++i) {
    for (int j = -2; j <= 0; ++j) {
      out.push_back({make_kernel(family, std::ldexp(lambda_med, i), dx, imq_exponent),
                     make_kernel(family, std::ldexp(mu_med, j), dy, imq_exponent), 1.0 / 9.0});
    }
  }
  return out;
}

BandwidthCollection theoretical_collection(std::size_t design_size, std::size_t sample_size, std::size_t dx,
                                           std::size_t dy, KernelFamily family, double imq_exponent) {
  if (sample_size == 0 || dx == 0) throw ConfigError("theoretical collection needs N >= 1 and d >= 1");
  const double ratio = static_cast<double>(design_size) / static_cast<double>(sample_size);
  if (!(ratio > std::numbers::e)) {
    throw ConfigError("theoretical collection requires L/N > e (got L/N = " + std::to_string(ratio) + ")");
  }
  const double d = static_cast<double>(dx + dy);
  const double top = std::ceil((2.0 / d) * std::log2(ratio / std::log(std::log(ratio))));
  if (!(top >= 1.0)) throw ConfigError("theoretical collection is empty for this L/N and dimension");
  const auto l_max = static_cast<int>(top);
  BandwidthCollection out;
  for (int l = 1; l <= l_max; ++l) {
    const double bw = std::ldexp(1.0, -l);
    const double w = 6.0 / (std::numbers::pi * std::numbers::pi * l * l);
    std::optional<KernelSpec> second;
    if (dy > 0) second = make_kernel(family, bw, dy, imq_exponent);
    out.push_back({make_kernel(family, bw, dx, imq_exponent), second, w});
  }
  return out;
}

std::size_t quantile_rank(std::size_t B1, double level) {
  if (!(level >= 0.0 && level < 1.0)) throw ConfigError("quantile level must lie in [0, 1)");
  double x = static_cast<double>(B1) * (1.0 - level);
  // Products such as 500 * (1 - 0.05) can land a hair above an integer.
  const double nearest = std::round(x);
  if (std::abs(x - nearest) < 1e-9 * std::max(1.0, x)) x = nearest;
  const auto rank = static_cast<std::size_t>(std::ceil(x));
  return std::clamp<std::size_t>(rank, 1, B1 + 1);
}

double bootstrap_quantile(std::span<const double> statistics, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  if (statistics.size() < 2) throw ConfigError("bootstrap quantile needs B1 >= 1 replicates plus the original");
  std::vector<double> sorted(statistics.begin(), statistics.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[quantile_rank(sorted.size() - 1, level) - 1];
}

SingleTestResult single_test(const PairedData& data, DesignPtr design, const TestConfig& config,
                             std::uint64_t seed) {
  config.validate();
  const HValueCache cache = cache_h_values(data, std::move(design));
  SingleTestResult out;
  out.statistic = incomplete_statistic(cache);
  const auto replicates = wild_bootstrap_statistics(cache, config.B1, quantile_source(seed));
  const auto sorted = sorted_with_original(replicates, out.statistic);
  out.quantile = quantile_of_sorted(sorted, config.B1, config.alpha);
  out.reject = out.statistic > out.quantile;
  return out;
}

double compute_u_alpha(std::span<const double> originals, const std::vector<std::vector<double>>& q_replicates,
                       const std::vector<std::vector<double>>& c_replicates, std::span<const double> weights,
                       const TestConfig& config) {
  config.validate();
  const std::size_t width = originals.size();
  if (width == 0 || q_replicates.size() != width || c_replicates.size() != width || weights.size() != width) {
    throw ConfigError("u_alpha inputs must have one entry per bandwidth");
  }
  validate_weights(weights);
  std::vector<std::vector<double>> sorted(width);
  for (std::size_t k = 0; k < width; ++k) {
    if (q_replicates[k].size() != config.B1 || c_replicates[k].size() != config.B2) {
      throw ConfigError("replicate counts do not match B1 / B2");
    }
    sorted[k] = sorted_with_original(q_replicates[k], originals[k]);
  }

  std::vector<double> thresholds(width);
  auto rejection_fraction = [&](double u) {
    for (std::size_t k = 0; k < width; ++k) thresholds[k] = quantile_of_sorted(sorted[k], config.B1, u * weights[k]);
    std::size_t count = 0;
    for (std::size_t b = 0; b < config.B2; ++b) {
      for (std::size_t k = 0; k < width; ++k) {
        if (c_replicates[k][b] - thresholds[k] > 0.0) {
          ++count;
          break;
        }
      }
    }
    return static_cast<double>(count) / static_cast<double>(config.B2);
  };

  double lo = 0.0;
  double hi = 1.0 / *std::max_element(weights.begin(), weights.end());
  for (std::size_t step = 0; step < config.B3; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (rejection_fraction(mid) <= config.alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

AggTestResult aggregated_test(std::span<const PairedData> per_bandwidth, std::span<const double> weights,
                              DesignPtr design, const TestConfig& config, std::uint64_t seed) {
  config.validate();
  if (per_bandwidth.empty()) throw ConfigError("bandwidth collection is empty");
  if (weights.size() != per_bandwidth.size()) throw ConfigError("need one weight per bandwidth");
  validate_weights(weights);
  if (!design) throw ConfigError("no design supplied");

  const std::size_t width = per_bandwidth.size();
  std::vector<HValueCache> caches;
  caches.reserve(width);
  for (const auto& data : per_bandwidth) caches.push_back(cache_h_values(data, design));

  std::vector<double> originals(width);
  for (std::size_t k = 0; k < width; ++k) originals[k] = incomplete_statistic(caches[k]);

  const auto q_reps = wild_bootstrap_shared(caches, config.B1, quantile_source(seed));
  const auto c_reps = wild_bootstrap_shared(caches, config.B2, correction_source(seed));
  const double u = compute_u_alpha(originals, q_reps, c_reps, weights, config);

  AggTestResult out;
  out.problem = per_bandwidth.front().problem;
  out.u_alpha = u;
  out.degenerate_correction = (u == 0.0);
  out.l_used = design->size();
  out.n_items = design->n_items();
  out.design = design->provenance();
  out.config = config;
  out.seed = seed;
  for (std::size_t k = 0; k < width; ++k) {
    BandwidthOutcome o;
    o.kernels = per_bandwidth[k].kernels;
    o.weight = weights[k];
    o.statistic = originals[k];
    o.level = u * weights[k];
    o.quantile = quantile_of_sorted(sorted_with_original(q_reps[k], originals[k]), config.B1, o.level);
    o.reject = o.statistic > o.quantile;
    out.reject = out.reject || o.reject;
    out.per_bandwidth.push_back(std::move(o));
  }
  return out;
}

std::vector<std::string> bootstrap_bound_notices(const TestConfig& config, std::span<const double> weights,
                                                 double beta) {
  std::vector<std::string> notes;
  if (weights.empty()) return notes;
  const double w_min = *std::min_element(weights.begin(), weights.end());
  const double w_max = *std::max_element(weights.begin(), weights.end());
  const double a = config.alpha;
  const double b1 = (1.0 / (w_min * w_min)) * 12.0 / (a * a) * (std::log(8.0 / beta) + a * (1.0 - a));
  const double b2 = 8.0 / (a * a) * std::log(2.0 / beta);
  const double b3 = std::log2(4.0 / a / w_max);
  auto check = [&](const char* name, std::size_t have, double want) {
    if (static_cast<double>(have) < want) {
      notes.push_back(std::string(name) + "=" + std::to_string(have) + " is below the sufficient bound " +
                      std::to_string(static_cast<long long>(std::ceil(want))) + " of the power guarantee");
    }
  };
  check("B1", config.B1, b1);
  check("B2", config.B2, b2);
  check("B3", config.B3, b3);
  return notes;
}

Design build_design(const DesignRequest& request, std::size_t n_items, std::uint64_t seed) {
  switch (request.kind) {
    case DesignKind::SubDiagonal:
      return subdiagonal_design(n_items, request.subdiagonals);
    case DesignKind::RandomNoReplacement:
      return random_design(n_items, request.size, seed);
    case DesignKind::Full:
      return full_design(n_items);
    case DesignKind::Explicit:
      break;
  }
  throw ConfigError("explicit designs must be supplied directly");
}

namespace {

AggTestResult run_collection(const BandwidthCollection& collection, DesignPtr design, const AggOptions& options,
                             const std::function<PairedData(const BandwidthChoice&)>& pair) {
  std::vector<PairedData> data;
  std::vector<double> weights;
  data.reserve(collection.size());
  for (const auto& choice : collection) {
    data.push_back(pair(choice));
    weights.push_back(choice.weight);
  }
  return aggregated_test(data, weights, std::move(design), options.config, options.seed);
}

}  // namespace

AggTestResult mmdagginc(const SampleMatrix& x, const SampleMatrix& y, const AggOptions& options) {
  options.config.validate();
  if (x.rows() < 2 || y.rows() < 2) throw InputError("two-sample test needs at least 2 samples per set");
  if (x.cols() != y.cols()) throw InputError("X and Y have different dimensions");
  const Eigen::Index n = std::min(x.rows(), y.rows());
  auto xs = std::make_shared<const SampleMatrix>(top_rows(x, n));
  auto ys = std::make_shared<const SampleMatrix>(top_rows(y, n));

  BandwidthCollection collection;
  if (options.collection == CollectionKind::Median) {
    SampleMatrix pooled(2 * n, x.cols());
    pooled << *xs, *ys;
    collection = median_collection(pooled, options.family, 4, options.imq_exponent);
  }
  auto design = std::make_shared<const Design>(build_design(options.design, static_cast<std::size_t>(n), options.seed));
  if (collection.empty()) {
    collection = theoretical_collection(design->size(), static_cast<std::size_t>(n),
                                        static_cast<std::size_t>(x.cols()), 0, options.family, options.imq_exponent);
  }
  return run_collection(collection, design, options,
                        [&](const BandwidthChoice& c) { return pair_two_sample(xs, ys, c.k); });
}

AggTestResult hsicagginc(const SampleMatrix& x, const SampleMatrix& y, const AggOptions& options) {
  options.config.validate();
  if (x.rows() != y.rows()) throw InputError("independence test needs paired samples (equal row counts)");
  if (x.rows() < 4) throw InputError("independence test needs at least 4 samples");
  const auto dx = static_cast<std::size_t>(x.cols());
  const auto dy = static_cast<std::size_t>(y.cols());
  auto z = std::make_shared<SampleMatrix>(x.rows(), x.cols() + y.cols());
  *z << x, y;
  const std::size_t n_items = static_cast<std::size_t>(x.rows()) / 2;

  BandwidthCollection collection;
  if (options.collection == CollectionKind::Median) {
    collection = hsic_collection(x, y, options.family, options.imq_exponent);
  }
  auto design = std::make_shared<const Design>(build_design(options.design, n_items, options.seed));
  if (collection.empty()) {
    collection = theoretical_collection(design->size(), static_cast<std::size_t>(x.rows()), dx, dy,
                                        options.family, options.imq_exponent);
  }
  std::shared_ptr<const SampleMatrix> zc = z;
  return run_collection(collection, design, options,
                        [&](const BandwidthChoice& c) { return pair_independence(zc, dx, c.k, *c.l); });
}

AggTestResult ksdagginc(const SampleMatrix& z, const ScoreModel& model, const AggOptions& options) {
  options.config.validate();
  if (z.rows() < 2) throw InputError("goodness-of-fit test needs at least 2 samples");
  if (model.dimension != static_cast<std::size_t>(z.cols())) {
    throw InputError("score model dimension does not match the data dimension");
  }
  auto zs = std::make_shared<const SampleMatrix>(z);
  const auto n_items = static_cast<std::size_t>(z.rows());

  BandwidthCollection collection;
  if (options.collection == CollectionKind::Median) {
    collection = median_collection(z, options.family, 4, options.imq_exponent);
  }
  auto design = std::make_shared<const Design>(build_design(options.design, n_items, options.seed));
  if (collection.empty()) {
    collection = theoretical_collection(design->size(), n_items, static_cast<std::size_t>(z.cols()), 0,
                                        options.family, options.imq_exponent);
  }
  return run_collection(collection, design, options,
                        [&](const BandwidthChoice& c) { return pair_gof(zs, c.k, model); });
}

}  // namespace agginc
