#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace agginc {

/// Unordered index pair stored with i < j.
struct IndexPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

enum class DesignKind { SubDiagonal, RandomNoReplacement, Full, Explicit };

std::string to_string(DesignKind kind);

struct DesignProvenance {
  DesignKind kind = DesignKind::Explicit;
  std::size_t subdiagonals = 0;  // R, SubDiagonal only
  std::uint64_t seed = 0;        // RandomNoReplacement only

  friend bool operator==(const DesignProvenance&, const DesignProvenance&) = default;
};

/// Set of index pairs over which an incomplete U-statistic is averaged.
/// Immutable once built; every constructor path validates the pair list.
class Design {
 public:
  /// Validates indices, ordering (i < j) and uniqueness.
  Design(std::size_t n_items, std::vector<IndexPair> pairs, DesignProvenance provenance);

  std::size_t n_items() const { return n_items_; }
  const std::vector<IndexPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  const DesignProvenance& provenance() const { return provenance_; }

 private:
  std::size_t n_items_;
  std::vector<IndexPair> pairs_;
  DesignProvenance provenance_;
};

using DesignPtr = std::shared_ptr<const Design>;

/// n (n - 1) / 2
std::size_t total_pair_count(std::size_t n_items);

/// First R sub-diagonals of the n x n index matrix, enumerated by r then i.
/// Size is R n - R (R + 1) / 2.
Design subdiagonal_design(std::size_t n_items, std::size_t subdiagonals);

/// L distinct pairs drawn uniformly without replacement; deterministic in
/// (n_items, L, seed). Pairs are returned in row-major (i, then j) order.
Design random_design(std::size_t n_items, std::size_t size, std::uint64_t seed);

/// Every pair i < j, row-major order.
Design full_design(std::size_t n_items);

/// Two-column CSV with header "i,j".
void write_design_csv(const Design& design, std::ostream& out);
Design read_design_csv(std::istream& in, std::size_t n_items);

}  // namespace agginc
