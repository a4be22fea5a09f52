#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "vscc/error.hpp"

namespace vscc {

// The five variance-correlation relationships plus the full-variable-set
// pseudo relationship used when the unreduced data competes as a candidate.
enum class Relationship {
  Linear = 1,
  Quadratic = 2,
  Cubic = 3,
  Quartic = 4,
  Quintic = 5,
  FullSet = 6,
};

inline int relationship_order(Relationship rel) { return static_cast<int>(rel); }

inline Relationship relationship_from_order(int m) {
  if (m < 1 || m > 6)
    throw Error(ErrorCode::InvalidConfig, "relationship order must be 1..5");
  return static_cast<Relationship>(m);
}

inline const char* relationship_name(Relationship rel) {
  switch (rel) {
    case Relationship::Linear: return "linear";
    case Relationship::Quadratic: return "quadratic";
    case Relationship::Cubic: return "cubic";
    case Relationship::Quartic: return "quartic";
    case Relationship::Quintic: return "quintic";
    case Relationship::FullSet: return "full_set";
  }
  return "unknown";
}

inline Relationship relationship_from_name(const std::string& name) {
  for (int m = 1; m <= 6; ++m) {
    const auto rel = static_cast<Relationship>(m);
    if (name == relationship_name(rel)) return rel;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown relationship name: " + name);
}

// n x p matrix of finite measurements with named columns.
struct Dataset {
  Eigen::MatrixXd values;             // n x p
  std::vector<std::string> var_names; // size p

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }
};

// Hard group labels in {1..G}. Groups may be empty here; operations that
// average per group reject empty groups themselves.
struct Partition {
  std::vector<int> labels;
  int group_count = 0;
};

// Hard labels in {1..G} for a subset of observations, 0 meaning unknown.
struct PartialPartition {
  std::vector<int> labels;
  int group_count = 0;

  std::size_t known_count() const {
    std::size_t k = 0;
    for (int l : labels) k += (l != 0);
    return k;
  }
};

// n x G matrix of membership probabilities; each row sums to 1.
struct SoftAssignment {
  Eigen::MatrixXd probs;

  Eigen::Index n() const { return probs.rows(); }
  Eigen::Index group_count() const { return probs.cols(); }
};

// An ordered set of selected variables (1-based column indices, in the
// order the selection algorithm admitted them) plus the relationship that
// produced it.
struct VariableSubset {
  std::vector<int> indices;
  Relationship relationship = Relationship::Linear;

  std::size_t size() const { return indices.size(); }
};

inline Dataset validate_dataset(const Eigen::MatrixXd& raw,
                                const std::vector<std::string>& names) {
  std::vector<Issue> issues;
  if (raw.rows() == 0 || raw.cols() == 0) {
    issues.push_back({ErrorCode::EmptyMatrix, -1, -1, "matrix has no entries"});
  } else if (raw.rows() < 2) {
    issues.push_back({ErrorCode::TooFewRows, -1, -1,
                      "need at least 2 observations"});
  }
  if (static_cast<Eigen::Index>(names.size()) != raw.cols()) {
    issues.push_back({ErrorCode::DimensionMismatch, -1, -1,
                      "got " + std::to_string(names.size()) + " names for " +
                          std::to_string(raw.cols()) + " columns"});
  } else {
    std::set<std::string> seen;
    for (const auto& name : names) {
      if (!seen.insert(name).second)
        issues.push_back({ErrorCode::DuplicateName, -1, -1, name});
    }
  }
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index j = 0; j < raw.cols(); ++j)
      if (!std::isfinite(raw(i, j)))
        issues.push_back({ErrorCode::NonFiniteEntry, static_cast<long>(i + 1),
                          static_cast<long>(j + 1), "non-finite entry"});

  if (!issues.empty()) {
    std::string summary = std::to_string(issues.size()) + " violation(s):";
    for (const auto& issue : issues) {
      summary += " [";
      summary += error_code_name(issue.code);
      if (issue.row >= 0)
        summary += " at (" + std::to_string(issue.row) + "," +
                   std::to_string(issue.col) + ")";
      if (!issue.detail.empty()) summary += " " + issue.detail;
      summary += "]";
    }
    throw ValidationError(std::move(issues), summary);
  }
  return Dataset{raw, names};
}

inline void validate_partition(const Partition& z) {
  if (z.group_count < 1)
    throw Error(ErrorCode::InvalidSpec, "group count must be >= 1");
  for (std::size_t i = 0; i < z.labels.size(); ++i)
    if (z.labels[i] < 1 || z.labels[i] > z.group_count)
      throw Error(ErrorCode::InvalidSpec,
                  "label out of range at row " + std::to_string(i + 1));
}

inline void validate_soft(const SoftAssignment& soft, double tol = 1e-9) {
  const auto& z = soft.probs;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index g = 0; g < z.cols(); ++g) {
      const double v = z(i, g);
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::InvalidSpec,
                    "membership probability outside [0,1] at row " +
                        std::to_string(i + 1));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      throw Error(ErrorCode::InvalidSpec,
                  "row " + std::to_string(i + 1) + " sums to " +
                      std::to_string(sum) + ", expected 1");
  }
}

// argmax per row, ties to the lowest group index
inline Partition harden(const SoftAssignment& soft) {
  Partition out;
  out.group_count = static_cast<int>(soft.group_count());
  out.labels.resize(static_cast<std::size_t>(soft.n()));
  for (Eigen::Index i = 0; i < soft.n(); ++i) {
    int best = 0;
    double best_p = soft.probs(i, 0);
    for (Eigen::Index g = 1; g < soft.probs.cols(); ++g) {
      if (soft.probs(i, g) > best_p) {
        best_p = soft.probs(i, g);
        best = static_cast<int>(g);
      }
    }
    out.labels[static_cast<std::size_t>(i)] = best + 1;
  }
  return out;
}

// 0/1 embedding of a hard partition
inline SoftAssignment to_soft(const Partition& z) {
  SoftAssignment soft;
  soft.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(z.labels.size()),
                                     z.group_count);
  for (std::size_t i = 0; i < z.labels.size(); ++i)
    soft.probs(static_cast<Eigen::Index>(i), z.labels[i] - 1) = 1.0;
  return soft;
}

// columns are 1-based
inline Dataset select_columns(const Dataset& ds, const std::vector<int>& cols) {
  Dataset out;
  out.values.resize(ds.n(), static_cast<Eigen::Index>(cols.size()));
  out.var_names.reserve(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const int j = cols[k];
    if (j < 1 || j > ds.p())
      throw Error(ErrorCode::DimensionMismatch,
                  "column index " + std::to_string(j) + " outside 1.." +
                      std::to_string(ds.p()));
    out.values.col(static_cast<Eigen::Index>(k)) = ds.values.col(j - 1);
    out.var_names.push_back(ds.var_names[static_cast<std::size_t>(j - 1)]);
  }
  return out;
}

inline Dataset select_rows(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.var_names = ds.var_names;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), ds.p());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int i = rows[k];
    if (i < 1 || i > ds.n())
      throw Error(ErrorCode::DimensionMismatch,
                  "row index " + std::to_string(i) + " outside 1.." +
                      std::to_string(ds.n()));
    out.values.row(static_cast<Eigen::Index>(k)) = ds.values.row(i - 1);
  }
  return out;
}

inline std::vector<int> all_columns(const Dataset& ds) {
  std::vector<int> cols(static_cast<std::size_t>(ds.p()));
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j) + 1;
  return cols;
}

}  // namespace vscc
