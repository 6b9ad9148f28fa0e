#include "agginc/estimators.hpp"

#include "agginc/error.hpp"
#include "agginc/rng.hpp"

#include <algorithm>
#include <array>

namespace agginc {

namespace {

// Two-level summation: pairs are accumulated in fixed-size blocks and block
// sums are added to the running total. Keeps rounding error roughly
// O(sqrt(L / block)) instead of O(L) without a per-term compensation cost.
constexpr std::size_t kBlock = 1024;

// out[k] = sum_t s_t * values[t * K + k] with s_t = signs[i_t] * signs[j_t],
// or s_t = 1 when signs is empty. Identical operation order in both cases so
// an all-ones sign vector reproduces the plain sum bit for bit.
void signed_pair_sums(const std::vector<IndexPair>& pairs, const double* values, std::size_t width,
                      std::span<const double> signs, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  constexpr std::size_t kMaxWidth = 64;
  std::array<double, kMaxWidth> block_stack{};
  std::vector<double> block_heap;
  double* block = block_stack.data();
  if (width > kMaxWidth) {
    block_heap.assign(width, 0.0);
    block = block_heap.data();
  }

  const std::size_t n_pairs = pairs.size();
  for (std::size_t start = 0; start < n_pairs; start += kBlock) {
    const std::size_t stop = std::min(n_pairs, start + kBlock);
    std::fill(block, block + width, 0.0);
    if (signs.empty()) {
      for (std::size_t t = start; t < stop; ++t) {
        const double* v = values + t * width;
        for (std::size_t k = 0; k < width; ++k) block[k] += v[k];
      }
    } else {
      for (std::size_t t = start; t < stop; ++t) {
        const double s = signs[pairs[t].i] * signs[pairs[t].j];
        const double* v = values + t * width;
        for (std::size_t k = 0; k < width; ++k) block[k] += s * v[k];
      }
    }
    for (std::size_t k = 0; k < width; ++k) out[k] += block[k];
  }
}

void require_nonempty(const HValueCache& cache) {
  if (!cache.design || cache.values.empty()) throw ConfigError("empty design: nothing to average");
  if (cache.values.size() != cache.design->size()) {
    throw ConfigError("h-value cache is not aligned with its design");
  }
}

std::shared_ptr<const SampleMatrix> share(const SampleMatrix& m) {
  return std::make_shared<const SampleMatrix>(m);
}

}  // namespace

std::string to_string(Problem problem) {
  switch (problem) {
    case Problem::TwoSample:
      return "two_sample";
    case Problem::Independence:
      return "independence";
    case Problem::GoodnessOfFit:
      return "goodness_of_fit";
  }
  return "unknown";
}

Problem parse_problem(const std::string& name) {
  if (name == "two_sample" || name == "mmd") return Problem::TwoSample;
  if (name == "independence" || name == "hsic") return Problem::Independence;
  if (name == "goodness_of_fit" || name == "gof" || name == "ksd") return Problem::GoodnessOfFit;
  throw ConfigError("unknown problem '" + name + "' (expected two_sample, independence or goodness_of_fit)");
}

PairedData pair_two_sample(std::shared_ptr<const SampleMatrix> x, std::shared_ptr<const SampleMatrix> y,
                           const KernelSpec& spec) {
  if (x->rows() < 2 || y->rows() < 2) throw InputError("two-sample test needs at least 2 samples per set");
  if (x->cols() != y->cols()) throw InputError("X and Y have different dimensions");
  if (static_cast<std::size_t>(x->cols()) != spec.dimension()) {
    throw InputError("kernel dimension does not match the data dimension");
  }
  PairedData out;
  out.problem = Problem::TwoSample;
  out.n_items = static_cast<std::size_t>(std::min(x->rows(), y->rows()));
  out.kernels = {spec};
  out.item_eval = [x = std::move(x), y = std::move(y), spec](std::size_t i, std::size_t j) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    return h_mmd(spec, row(*x, a), row(*x, b), row(*y, a), row(*y, b));
  };
  return out;
}

PairedData pair_two_sample(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& spec) {
  return pair_two_sample(share(x), share(y), spec);
}

PairedData pair_independence(std::shared_ptr<const SampleMatrix> z, std::size_t dx,
                             const KernelSpec& kspec, const KernelSpec& lspec) {
  if (z->rows() < 4) throw InputError("independence test needs at least 4 samples");
  if (dx == 0 || dx >= static_cast<std::size_t>(z->cols())) {
    throw InputError("X dimension must leave at least one column for Y");
  }
  const std::size_t dy = static_cast<std::size_t>(z->cols()) - dx;
  if (kspec.dimension() != dx || lspec.dimension() != dy) {
    throw InputError("kernel dimensions do not match the (X, Y) split");
  }
  const std::size_t half = static_cast<std::size_t>(z->rows()) / 2;
  PairedData out;
  out.problem = Problem::Independence;
  out.n_items = half;
  out.kernels = {kspec, lspec};
  out.item_eval = [z = std::move(z), dx, dy, half, kspec, lspec](std::size_t i, std::size_t j) {
    auto joint = [&](std::size_t r) {
      const double* p = z->data() + static_cast<Eigen::Index>(r) * z->cols();
      return JointPoint{Point(p, dx), Point(p + dx, dy)};
    };
    return h_hsic(kspec, lspec, joint(i), joint(j), joint(i + half), joint(j + half));
  };
  return out;
}

PairedData pair_independence(const SampleMatrix& z, std::size_t dx, const KernelSpec& kspec,
                             const KernelSpec& lspec) {
  return pair_independence(share(z), dx, kspec, lspec);
}

PairedData pair_gof(std::shared_ptr<const SampleMatrix> z, const KernelSpec& spec, const ScoreModel& model) {
  if (z->rows() < 2) throw InputError("goodness-of-fit test needs at least 2 samples");
  const auto d = static_cast<std::size_t>(z->cols());
  if (model.dimension != d) throw InputError("score model dimension does not match the data dimension");
  if (spec.dimension() != d) throw InputError("kernel dimension does not match the data dimension");

  auto scores = std::make_shared<SampleMatrix>(z->rows(), z->cols());
  for (Eigen::Index i = 0; i < z->rows(); ++i) {
    model.score(row(*z, i), std::span<double>(scores->data() + i * scores->cols(), d));
  }
  PairedData out;
  out.problem = Problem::GoodnessOfFit;
  out.n_items = static_cast<std::size_t>(z->rows());
  out.kernels = {spec};
  out.item_eval = [z = std::move(z), scores = std::shared_ptr<const SampleMatrix>(std::move(scores)),
                   spec](std::size_t i, std::size_t j) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    return h_ksd(spec, row(*z, a), row(*z, b), row(*scores, a), row(*scores, b));
  };
  return out;
}

PairedData pair_gof(const SampleMatrix& z, const KernelSpec& spec, const ScoreModel& model) {
  return pair_gof(share(z), spec, model);
}

HValueCache cache_h_values(const PairedData& data, DesignPtr design) {
  if (!design) throw ConfigError("no design supplied");
  if (design->n_items() != data.n_items) {
    throw ConfigError("design covers " + std::to_string(design->n_items()) + " items but the data pair into " +
                      std::to_string(data.n_items));
  }
  HValueCache cache;
  cache.values.reserve(design->size());
  for (const auto& p : design->pairs()) cache.values.push_back(data.item_eval(p.i, p.j));
  cache.design = std::move(design);
  return cache;
}

double incomplete_statistic(const HValueCache& cache) {
  require_nonempty(cache);
  double sum = 0.0;
  signed_pair_sums(cache.design->pairs(), cache.values.data(), 1, {}, std::span<double>(&sum, 1));
  return sum / static_cast<double>(cache.values.size());
}

void RademacherSource::fill(std::size_t replicate, std::span<double> signs) const {
  Rng rng = make_rng(seed_, stream_, replicate);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (i % 64 == 0) bits = rng();
    signs[i] = (bits & 1U) ? 1.0 : -1.0;
    bits >>= 1U;
  }
}

double wild_bootstrap_statistic(const HValueCache& cache, std::span<const double> signs) {
  require_nonempty(cache);
  if (signs.size() != cache.design->n_items()) throw InputError("sign vector length must equal n_items");
  double sum = 0.0;
  signed_pair_sums(cache.design->pairs(), cache.values.data(), 1, signs, std::span<double>(&sum, 1));
  return sum / static_cast<double>(cache.values.size());
}

std::vector<double> wild_bootstrap_statistics(const HValueCache& cache, std::size_t replicates,
                                              const RademacherSource& source) {
  auto shared = wild_bootstrap_shared(std::span<const HValueCache>(&cache, 1), replicates, source);
  return std::move(shared.front());
}

std::vector<std::vector<double>> wild_bootstrap_shared(std::span<const HValueCache> caches,
                                                       std::size_t replicates,
                                                       const RademacherSource& source) {
  if (caches.empty()) return {};
  for (const auto& c : caches) {
    require_nonempty(c);
    if (c.design.get() != caches.front().design.get() && c.design->pairs() != caches.front().design->pairs()) {
      throw ConfigError("shared wild bootstrap requires every cache to use the same design");
    }
  }
  const Design& design = *caches.front().design;
  const std::size_t width = caches.size();
  const std::size_t n_pairs = design.size();

  // Pair-major layout so each pass over the design touches all bandwidths at once.
  std::vector<double> interleaved(n_pairs * width);
  for (std::size_t k = 0; k < width; ++k) {
    for (std::size_t t = 0; t < n_pairs; ++t) interleaved[t * width + k] = caches[k].values[t];
  }

  std::vector<std::vector<double>> out(width, std::vector<double>(replicates));
  std::vector<double> signs(design.n_items());
  std::vector<double> sums(width);
  const double inv = 1.0 / static_cast<double>(n_pairs);
  for (std::size_t b = 0; b < replicates; ++b) {
    source.fill(b, signs);
    signed_pair_sums(design.pairs(), interleaved.data(), width, signs, sums);
    for (std::size_t k = 0; k < width; ++k) out[k][b] = sums[k] * inv;
  }
  return out;
}

double complete_mmd(const SampleMatrix& x, const SampleMatrix& y, const KernelSpec& spec) {
  const auto m = x.rows();
  const auto n = y.rows();
  if (m < 2 || n < 2) throw InputError("complete MMD needs at least 2 samples per set");
  if (x.cols() != y.cols()) throw InputError("X and Y have different dimensions");
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) sxx += eval_kernel(spec, row(x, i), row(x, j));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) syy += eval_kernel(spec, row(y, i), row(y, j));
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sxy += eval_kernel(spec, row(x, i), row(y, j));
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return 2.0 * sxx / (md * (md - 1.0)) - 2.0 * sxy / (md * nd) + 2.0 * syy / (nd * (nd - 1.0));
}

double complete_hsic(const SampleMatrix& z, std::size_t dx, const KernelSpec& kspec, const KernelSpec& lspec) {
  const auto n = z.rows();
  if (n < 4) throw InputError("complete HSIC needs at least 4 samples");
  if (dx == 0 || dx >= static_cast<std::size_t>(z.cols())) throw InputError("invalid X dimension");
  const std::size_t dy = static_cast<std::size_t>(z.cols()) - dx;
  if (kspec.dimension() != dx || lspec.dimension() != dy) {
    throw InputError("kernel dimensions do not match the (X, Y) split");
  }
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* pi = z.data() + i * z.cols();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double* pj = z.data() + j * z.cols();
      k(i, j) = k(j, i) = eval_kernel(kspec, Point(pi, dx), Point(pj, dx));
      l(i, j) = l(j, i) = eval_kernel(lspec, Point(pi + dx, dy), Point(pj + dx, dy));
    }
  }
  const double nd = static_cast<double>(n);
  const double trace_kl = (k.array() * l.array()).sum();  // tr(K L) for symmetric K, L
  const double sum_k = k.sum();
  const double sum_l = l.sum();
  const double cross = (k.rowwise().sum().transpose() * l.rowwise().sum())(0, 0);  // 1' K L 1
  return (trace_kl + sum_k * sum_l / ((nd - 1.0) * (nd - 2.0)) - 2.0 * cross / (nd - 2.0)) /
         (nd * (nd - 3.0));
}

double complete_ksd(const SampleMatrix& z, const KernelSpec& spec, const ScoreModel& model) {
  const PairedData data = pair_gof(z, spec, model);
  const auto n = data.n_items;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sum += data.item_eval(i, j);
  }
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace agginc
