#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/error.hpp"
#include "vscc/preprocess.hpp"

namespace vscc {

// Per-variable within-group variance W_j, denominator n. On data standardized
// to unit sample variance, W_j <= (n-1)/n, so 1 - W_j^m is a usable
// correlation threshold.
struct WithinGroupVariances {
  enum class Source { Hard, Soft };

  Eigen::VectorXd w;
  Source source = Source::Hard;

  Eigen::Index p() const { return w.size(); }
};

// W_j = sum_g sum_i z_ig (x_ij - mu_gj)^2 / n with mu_gj the z-weighted
// group mean. Groups with zero total weight contribute nothing.
inline WithinGroupVariances within_group_variances(const Dataset& ds,
                                                   const SoftAssignment& z) {
  if (z.n() != ds.n())
    throw Error(ErrorCode::DimensionMismatch,
                "assignment has " + std::to_string(z.n()) + " rows, data has " +
                    std::to_string(ds.n()));
  validate_soft(z);

  const Eigen::Index n = ds.n();
  const Eigen::Index G = z.group_count();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(ds.p());
  for (Eigen::Index g = 0; g < G; ++g) {
    const Eigen::VectorXd weights = z.probs.col(g);
    const double total = weights.sum();
    if (total <= 0.0) continue;
    const Eigen::RowVectorXd mu = (weights.transpose() * ds.values) / total;
    const Eigen::MatrixXd dev = ds.values.rowwise() - mu;
    w += (dev.array().square().colwise() * weights.array())
             .colwise()
             .sum()
             .matrix()
             .transpose();
  }
  w /= static_cast<double>(n);
  return WithinGroupVariances{std::move(w), WithinGroupVariances::Source::Soft};
}

inline WithinGroupVariances within_group_variances(const Dataset& ds,
                                                   const Partition& z) {
  if (static_cast<Eigen::Index>(z.labels.size()) != ds.n())
    throw Error(ErrorCode::DimensionMismatch,
                "partition has " + std::to_string(z.labels.size()) +
                    " labels, data has " + std::to_string(ds.n()) + " rows");
  validate_partition(z);
  std::vector<long> counts(static_cast<std::size_t>(z.group_count), 0);
  for (int l : z.labels) counts[static_cast<std::size_t>(l - 1)]++;
  for (std::size_t g = 0; g < counts.size(); ++g)
    if (counts[g] == 0)
      throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(g + 1) +
                                             " has no observations");
  auto out = within_group_variances(ds, to_soft(z));
  out.source = WithinGroupVariances::Source::Hard;
  return out;
}

// Correlation threshold 1 - w^m for relationship order m in 1..5. Negative
// when w > 1, in which case nothing can pass (strict test below).
inline double threshold(Relationship rel, double w_k) {
  const int m = relationship_order(rel);
  if (m < 1 || m > 5)
    throw Error(ErrorCode::InvalidConfig,
                "threshold is defined for relationship orders 1..5");
  if (w_k < 0.0)
    throw Error(ErrorCode::InvalidSpec, "within-group variance must be >= 0");
  double power = 1.0;
  for (int t = 0; t < m; ++t) power *= w_k;
  return 1.0 - power;
}

namespace detail {

// ascending W, ties by original column index (0-based output)
inline std::vector<int> ascending_w_order(const Eigen::VectorXd& w) {
  std::vector<int> order(static_cast<std::size_t>(w.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return w(a) < w(b); });
  return order;
}

}  // namespace detail

// The stepwise selection: visit variables by ascending W; the minimizer is
// always taken; variable k joins iff |rho_kr| < 1 - W_k^m against every
// already-selected r (strict). Returned indices are 1-based, in insertion
// order.
inline VariableSubset select_variables(const WithinGroupVariances& w,
                                       const CorrelationMatrix& rho,
                                       Relationship rel) {
  if (w.p() < 1)
    throw Error(ErrorCode::EmptyMatrix, "no variables to select from");
  if (rho.rho.rows() != w.p() || rho.rho.cols() != w.p())
    throw Error(ErrorCode::DimensionMismatch,
                "correlation matrix does not match variable count");

  const auto order = detail::ascending_w_order(w.w);
  VariableSubset subset;
  subset.relationship = rel;
  subset.indices.push_back(order[0] + 1);
  for (std::size_t s = 1; s < order.size(); ++s) {
    const int k = order[s];
    const double limit = threshold(rel, w.w(k));
    const bool admit =
        std::all_of(subset.indices.begin(), subset.indices.end(),
                    [&](int r) { return rho.abs_at(k + 1, r) < limit; });
    if (admit) subset.indices.push_back(k + 1);
  }
  return subset;
}

// The up-to-five subsets produced by the relationship family, with identical
// index sets collapsed onto the lowest relationship order.
struct SelectionResult {
  std::vector<VariableSubset> subsets;
  WithinGroupVariances w;
  std::vector<int> sorted_order;  // 1-based columns by ascending W
};

inline SelectionResult select_all(const WithinGroupVariances& w,
                                  const CorrelationMatrix& rho) {
  SelectionResult out;
  out.w = w;
  for (int idx : detail::ascending_w_order(w.w))
    out.sorted_order.push_back(idx + 1);

  for (int m = 1; m <= 5; ++m) {
    auto subset = select_variables(w, rho, relationship_from_order(m));
    const bool duplicate =
        std::any_of(out.subsets.begin(), out.subsets.end(),
                    [&](const VariableSubset& prev) {
                      return prev.indices == subset.indices;
                    });
    if (!duplicate) out.subsets.push_back(std::move(subset));
  }
  return out;
}

}  // namespace vscc
