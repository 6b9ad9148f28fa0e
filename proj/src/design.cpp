#include "agginc/design.hpp"

#include "agginc/csv.hpp"
#include "agginc/error.hpp"
#include "agginc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

namespace agginc {

namespace {

// Row-major rank of (i, j), i < j, among all pairs of {0..n-1}.
IndexPair unrank_pair(std::uint64_t rank, std::uint64_t n) {
  // Row i holds n - 1 - i pairs and starts at offset i n - i (i + 1) / 2.
  auto row_start = [n](std::uint64_t i) { return i * n - i * (i + 1) / 2; };
  const double nd = static_cast<double>(n);
  const double disc = (2.0 * nd - 1.0) * (2.0 * nd - 1.0) - 8.0 * static_cast<double>(rank);
  auto i = static_cast<std::uint64_t>(std::max(0.0, std::floor(((2.0 * nd - 1.0) - std::sqrt(std::max(disc, 0.0))) / 2.0)));
  while (i > 0 && row_start(i) > rank) --i;
  while (i + 1 < n && row_start(i + 1) <= rank) ++i;
  const std::uint64_t j = i + 1 + (rank - row_start(i));
  return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
}

}  // namespace

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::SubDiagonal:
      return "subdiagonal";
    case DesignKind::RandomNoReplacement:
      return "random";
    case DesignKind::Full:
      return "full";
    case DesignKind::Explicit:
      return "explicit";
  }
  return "unknown";
}

Design::Design(std::size_t n_items, std::vector<IndexPair> pairs, DesignProvenance provenance)
    : n_items_(n_items), pairs_(std::move(pairs)), provenance_(provenance) {
  if (n_items_ < 2) throw ConfigError("a design needs at least 2 items");
  if (n_items_ > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("design index range exceeds 32-bit indices");
  }
  if (pairs_.empty()) throw ConfigError("a design needs at least one pair");
  for (const auto& p : pairs_) {
    if (p.i >= p.j || p.j >= n_items_) {
      throw ConfigError("design pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) +
                        ") is not a valid pair i < j < " + std::to_string(n_items_));
    }
  }
  std::vector<IndexPair> sorted = pairs_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("design contains duplicate pairs");
  }
  if (provenance_.kind == DesignKind::Full && pairs_.size() != total_pair_count(n_items_)) {
    throw ConfigError("full design must contain every pair");
  }
}

std::size_t total_pair_count(std::size_t n_items) {
  return n_items < 2 ? 0 : n_items * (n_items - 1) / 2;
}

Design subdiagonal_design(std::size_t n_items, std::size_t subdiagonals) {
  if (n_items < 2) throw ConfigError("sub-diagonal design needs at least 2 items");
  if (subdiagonals < 1 || subdiagonals > n_items - 1) {
    throw ConfigError("number of sub-diagonals R=" + std::to_string(subdiagonals) +
                      " must lie in [1, " + std::to_string(n_items - 1) + "]");
  }
  std::vector<IndexPair> pairs;
  pairs.reserve(subdiagonals * n_items - subdiagonals * (subdiagonals + 1) / 2);
  for (std::size_t r = 1; r <= subdiagonals; ++r) {
    for (std::size_t i = 0; i + r < n_items; ++i) {
      pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + r)});
    }
  }
  return Design(n_items, std::move(pairs), {DesignKind::SubDiagonal, subdiagonals, 0});
}

Design random_design(std::size_t n_items, std::size_t size, std::uint64_t seed) {
  const std::size_t total = total_pair_count(n_items);
  if (n_items < 2) throw ConfigError("random design needs at least 2 items");
  if (size < 1 || size > total) {
    throw ConfigError("random design size L=" + std::to_string(size) + " must lie in [1, " +
                      std::to_string(total) + "]");
  }
  Rng rng = make_rng(seed, streams::kRandomDesign);

  // Floyd's algorithm: exactly `size` draws, each rank equally likely to be selected.
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(size * 2);
  for (std::uint64_t top = total - size; top < total; ++top) {
    std::uniform_int_distribution<std::uint64_t> pick(0, top);
    const std::uint64_t candidate = pick(rng);
    if (!chosen.insert(candidate).second) chosen.insert(top);
  }
  std::vector<std::uint64_t> ranks(chosen.begin(), chosen.end());
  std::sort(ranks.begin(), ranks.end());

  std::vector<IndexPair> pairs;
  pairs.reserve(size);
  for (auto rank : ranks) pairs.push_back(unrank_pair(rank, n_items));
  return Design(n_items, std::move(pairs), {DesignKind::RandomNoReplacement, 0, seed});
}

Design full_design(std::size_t n_items) {
  if (n_items < 2) throw ConfigError("full design needs at least 2 items");
  std::vector<IndexPair> pairs;
  pairs.reserve(total_pair_count(n_items));
  for (std::size_t i = 0; i < n_items; ++i) {
    for (std::size_t j = i + 1; j < n_items; ++j) {
      pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  }
  return Design(n_items, std::move(pairs), {DesignKind::Full, 0, 0});
}

void write_design_csv(const Design& design, std::ostream& out) {
  out << "i,j\n";
  for (const auto& p : design.pairs()) out << p.i << ',' << p.j << '\n';
}

Design read_design_csv(std::istream& in, std::size_t n_items) {
  const CsvTable table = read_csv(in);
  if (table.header.size() != 2) throw InputError("design CSV must have exactly two columns");
  std::vector<IndexPair> pairs;
  pairs.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    const double a = r[0];
    const double b = r[1];
    if (a < 0 || b < 0 || a != std::floor(a) || b != std::floor(b)) {
      throw InputError("design CSV entries must be non-negative integers");
    }
    auto i = static_cast<std::uint32_t>(std::min(a, b));
    auto j = static_cast<std::uint32_t>(std::max(a, b));
    pairs.push_back({i, j});
  }
  try {
    return Design(n_items, std::move(pairs), {DesignKind::Explicit, 0, 0});
  } catch (const ConfigError& e) {
    throw InputError(std::string("invalid design CSV: ") + e.what());
  }
}

}  // namespace agginc
