#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/error.hpp"

namespace vscc {

// Pearson correlations of all variable pairs; symmetric with unit diagonal.
struct CorrelationMatrix {
  Eigen::MatrixXd rho;

  double abs_at(int j, int r) const {  // 1-based
    return std::abs(rho(j - 1, r - 1));
  }
};

namespace detail {

// sample standard deviations, n-1 denominator
inline Eigen::VectorXd column_sds(const Eigen::MatrixXd& centered) {
  const double denom = static_cast<double>(centered.rows() - 1);
  return (centered.colwise().squaredNorm() / denom).array().sqrt();
}

inline void require_no_constant_columns(const Dataset& ds,
                                        const Eigen::VectorXd& sds) {
  std::vector<Issue> issues;
  for (Eigen::Index j = 0; j < sds.size(); ++j)
    if (!(sds(j) > 0.0))
      issues.push_back({ErrorCode::ConstantColumn, -1, static_cast<long>(j + 1),
                        ds.var_names[static_cast<std::size_t>(j)]});
  if (!issues.empty()) {
    std::string what = "zero-variance column(s):";
    for (const auto& issue : issues) what += " " + issue.detail;
    throw ValidationError(std::move(issues), what);
  }
}

}  // namespace detail

// Rescales every column to mean 0 and sample variance 1 (n-1 denominator).
inline Dataset standardize(const Dataset& ds) {
  if (ds.n() < 2)
    throw Error(ErrorCode::TooFewRows, "standardize needs at least 2 rows");
  Eigen::MatrixXd centered =
      ds.values.rowwise() - ds.values.colwise().mean();
  const Eigen::VectorXd sds = detail::column_sds(centered);
  detail::require_no_constant_columns(ds, sds);
  centered.array().rowwise() /= sds.transpose().array();
  return Dataset{std::move(centered), ds.var_names};
}

// Full-sample Pearson correlation matrix, computed once and independent of
// any group structure.
inline CorrelationMatrix correlation_matrix(const Dataset& ds) {
  if (ds.n() < 2)
    throw Error(ErrorCode::TooFewRows, "correlation needs at least 2 rows");
  const Eigen::MatrixXd centered =
      ds.values.rowwise() - ds.values.colwise().mean();
  const Eigen::VectorXd sds = detail::column_sds(centered);
  detail::require_no_constant_columns(ds, sds);

  const double denom = static_cast<double>(ds.n() - 1);
  CorrelationMatrix out;
  out.rho = Eigen::MatrixXd::Identity(ds.p(), ds.p());
  for (Eigen::Index j = 0; j < ds.p(); ++j) {
    for (Eigen::Index r = j + 1; r < ds.p(); ++r) {
      double rho = centered.col(j).dot(centered.col(r)) /
                   (denom * sds(j) * sds(r));
      rho = std::clamp(rho, -1.0, 1.0);
      out.rho(j, r) = rho;
      out.rho(r, j) = rho;
    }
  }
  return out;
}

}  // namespace vscc
