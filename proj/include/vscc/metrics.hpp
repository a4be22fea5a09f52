#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/error.hpp"

namespace vscc {

// Cross-tabulation of two partitions over the same observations.
struct ContingencyTable {
  std::vector<std::vector<long>> counts;  // G1 x G2
  std::vector<long> row_marginals;
  std::vector<long> col_marginals;
  long n = 0;
};

inline ContingencyTable contingency_table(const Partition& a,
                                          const Partition& b) {
  if (a.labels.size() != b.labels.size())
    throw Error(ErrorCode::LengthMismatch,
                "partitions have " + std::to_string(a.labels.size()) + " and " +
                    std::to_string(b.labels.size()) + " labels");
  validate_partition(a);
  validate_partition(b);

  ContingencyTable t;
  t.n = static_cast<long>(a.labels.size());
  t.counts.assign(static_cast<std::size_t>(a.group_count),
                  std::vector<long>(static_cast<std::size_t>(b.group_count), 0));
  t.row_marginals.assign(static_cast<std::size_t>(a.group_count), 0);
  t.col_marginals.assign(static_cast<std::size_t>(b.group_count), 0);
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const std::size_t r = static_cast<std::size_t>(a.labels[i] - 1);
    const std::size_t c = static_cast<std::size_t>(b.labels[i] - 1);
    t.counts[r][c]++;
    t.row_marginals[r]++;
    t.col_marginals[c]++;
  }
  return t;
}

namespace detail {

inline double choose2(long m) {
  return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
}

struct PairCounts {
  double pairs_total;
  double pairs_joint;  // sum_ij C(n_ij, 2)
  double pairs_a;      // sum_i C(a_i, 2)
  double pairs_b;      // sum_j C(b_j, 2)
};

inline PairCounts pair_counts(const ContingencyTable& t) {
  PairCounts pc{choose2(t.n), 0.0, 0.0, 0.0};
  for (const auto& row : t.counts)
    for (long c : row) pc.pairs_joint += choose2(c);
  for (long m : t.row_marginals) pc.pairs_a += choose2(m);
  for (long m : t.col_marginals) pc.pairs_b += choose2(m);
  return pc;
}

// true when the two partitions induce the same grouping up to relabeling
inline bool same_grouping(const ContingencyTable& t) {
  for (std::size_t r = 0; r < t.counts.size(); ++r) {
    long nonzero = 0;
    for (long c : t.counts[r]) nonzero += (c != 0);
    if (t.row_marginals[r] > 0 && nonzero != 1) return false;
  }
  for (std::size_t c = 0; c < t.col_marginals.size(); ++c) {
    long nonzero = 0;
    for (const auto& row : t.counts) nonzero += (row[c] != 0);
    if (t.col_marginals[c] > 0 && nonzero != 1) return false;
  }
  return true;
}

}  // namespace detail

// Fraction of observation pairs on which the two partitions agree
// (joined in both, or separated in both).
inline double rand_index(const Partition& a, const Partition& b) {
  if (a.labels.size() < 2)
    throw Error(ErrorCode::TooFewRows, "rand index needs n >= 2");
  const auto t = contingency_table(a, b);
  const auto pc = detail::pair_counts(t);
  const double disagreements = pc.pairs_a + pc.pairs_b - 2.0 * pc.pairs_joint;
  return (pc.pairs_total - disagreements) / pc.pairs_total;
}

// Hubert-Arabie chance-corrected agreement: 0 expected for random labels,
// 1 for identical groupings. When the adjustment degenerates
// (MaxIndex == ExpectedIndex) returns 1 for identical groupings, else 0.
inline double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.labels.size() < 2)
    throw Error(ErrorCode::TooFewRows, "adjusted rand index needs n >= 2");
  const auto t = contingency_table(a, b);
  const auto pc = detail::pair_counts(t);
  const double expected = pc.pairs_a * pc.pairs_b / pc.pairs_total;
  const double max_index = 0.5 * (pc.pairs_a + pc.pairs_b);
  if (max_index == expected)
    return detail::same_grouping(t) ? 1.0 : 0.0;
  return (pc.pairs_joint - expected) / (max_index - expected);
}

}  // namespace vscc
