#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vscc/csv.hpp"
#include "vscc/data.hpp"
#include "vscc/error.hpp"
#include "vscc/metrics.hpp"
#include "vscc/workflows.hpp"

namespace vscc {

// One line of report.csv; the column set mirrors the result tables the
// pipelines are compared on, plus bookkeeping for excluded candidates.
struct ReportRow {
  std::string relationship;
  int n_vars = 0;
  std::string vars;  // ';'-joined variable names
  int G = 0;
  std::string model;
  double bic = 0.0;
  double uncertainty = 0.0;
  std::optional<double> ari;
  double runtime_s = 0.0;
  std::string status;

  bool operator==(const ReportRow&) const = default;
};

inline constexpr const char* kReportHeader =
    "relationship,n_vars,vars,G,model,bic,uncertainty,ari,runtime_s,status";

namespace detail {

inline std::string format_double(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

inline std::string join_names(const Dataset& ds,
                              const std::vector<int>& indices) {
  std::string out;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (k > 0) out += ';';
    out += ds.var_names[static_cast<std::size_t>(indices[k] - 1)];
  }
  return out;
}

// ARI of the candidate's hardened assignment against the reference labels,
// over the given rows (1-based), skipping rows with no reference label.
inline std::optional<double> candidate_ari(const SubsetCandidate& cand,
                                           const PartialPartition& truth,
                                           const std::vector<int>& rows) {
  const Partition hard = harden(cand.fit.assignment);
  Partition a, b;
  a.group_count = hard.group_count;
  b.group_count = truth.group_count;
  for (int r : rows) {
    const int t = truth.labels[static_cast<std::size_t>(r - 1)];
    if (t == 0) continue;
    a.labels.push_back(hard.labels[static_cast<std::size_t>(r - 1)]);
    b.labels.push_back(t);
  }
  if (a.labels.size() < 2) return std::nullopt;
  return adjusted_rand_index(a, b);
}

}  // namespace detail

// Builds one row per candidate. `truth` supplies reference labels for the
// ARI column (0 = no reference for that row); in the classification modes
// the ARI is computed over the rows whose membership was unknown to the fit.
inline std::vector<ReportRow> build_report_rows(
    const VsccReport& report, const Dataset& ds,
    const std::optional<PartialPartition>& truth) {
  std::vector<int> eval_rows;
  if (truth) {
    if (report.mode == PipelineMode::Cluster) {
      for (std::size_t i = 0; i < truth->labels.size(); ++i)
        eval_rows.push_back(static_cast<int>(i) + 1);
    } else {
      eval_rows = report.unknown_rows;
    }
  }

  std::vector<ReportRow> rows;
  rows.reserve(report.candidates.size());
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& cand = report.candidates[i];
    ReportRow row;
    row.relationship = relationship_name(cand.subset.relationship);
    row.n_vars = static_cast<int>(cand.subset.size());
    row.vars = detail::join_names(ds, cand.subset.indices);
    row.G = cand.fit.G;
    row.model = covariance_model_name(cand.fit.model);
    row.bic = cand.fit.bic;
    row.uncertainty = cand.uncertainty;
    if (truth) row.ari = detail::candidate_ari(cand, *truth, eval_rows);
    row.runtime_s = cand.runtime_s;
    row.status = i == report.chosen_index
                     ? "chosen"
                     : (cand.eligible ? "candidate"
                                      : "excluded:" + cand.exclusion_reason);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_report_csv(const std::string& path,
                             const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << kReportHeader << "\n";
  for (const auto& row : rows) {
    out << row.relationship << ',' << row.n_vars << ',' << row.vars << ','
        << row.G << ',' << row.model << ','
        << detail::format_double(row.bic, 6) << ','
        << detail::format_double(row.uncertainty, 6) << ','
        << (row.ari ? detail::format_double(*row.ari, 6) : std::string())
        << ',' << detail::format_double(row.runtime_s, 3) << ','
        << row.status << "\n";
  }
}

// Inverse of write_report_csv up to float formatting; lets the report be
// checked and post-processed without the in-memory objects.
inline std::vector<ReportRow> parse_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kReportHeader)
    throw Error(ErrorCode::ParseError, path + ": bad report header");
  std::vector<ReportRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 10)
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(line_no) + ": expected 10 fields");
    ReportRow row;
    row.relationship = cells[0];
    row.n_vars = std::stoi(cells[1]);
    row.vars = cells[2];
    row.G = std::stoi(cells[3]);
    row.model = cells[4];
    row.bic = std::stod(cells[5]);
    row.uncertainty = std::stod(cells[6]);
    if (!cells[7].empty()) row.ari = std::stod(cells[7]);
    row.runtime_s = std::stod(cells[8]);
    row.status = cells[9];
    rows.push_back(std::move(row));
  }
  return rows;
}

// Scatter data of the chosen two-variable projection: original-scale values
// of the two selected variables plus the fitted hard label per observation.
inline void write_plot_data(const std::string& path, const Dataset& original,
                            const SubsetCandidate& chosen) {
  if (chosen.subset.size() != 2)
    throw Error(ErrorCode::InvalidConfig,
                "plot data needs a 2-variable subset");
  const int xj = chosen.subset.indices[0];
  const int yj = chosen.subset.indices[1];
  const Partition hard = harden(chosen.fit.assignment);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << original.var_names[static_cast<std::size_t>(xj - 1)] << ','
      << original.var_names[static_cast<std::size_t>(yj - 1)] << ",label\n";
  for (Eigen::Index i = 0; i < original.n(); ++i)
    out << original.values(i, xj - 1) << ',' << original.values(i, yj - 1)
        << ',' << hard.labels[static_cast<std::size_t>(i)] << "\n";
}

}  // namespace vscc
