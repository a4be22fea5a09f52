#pragma once

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/error.hpp"
#include "vscc/gmm.hpp"
#include "vscc/preprocess.hpp"
#include "vscc/selection.hpp"

namespace vscc {

// Total model uncertainty n - sum_i max_g z_ig; zero iff every row is 0/1.
inline double uncertainty(const SoftAssignment& soft) {
  validate_soft(soft);
  double kept = 0.0;
  for (Eigen::Index i = 0; i < soft.n(); ++i)
    kept += soft.probs.row(i).maxCoeff();
  return static_cast<double>(soft.n()) - kept;
}

// Same sum restricted to the given rows (1-based); used by the
// classification pipelines, which compare candidates on the rows whose
// membership is actually unknown.
inline double uncertainty_over_rows(const SoftAssignment& soft,
                                    const std::vector<int>& rows) {
  validate_soft(soft);
  double value = 0.0;
  for (int r : rows) {
    if (r < 1 || r > soft.n())
      throw Error(ErrorCode::DimensionMismatch, "row index out of range");
    value += 1.0 - soft.probs.row(r - 1).maxCoeff();
  }
  return value;
}

struct SubsetCandidate {
  VariableSubset subset;
  FittedMixture fit;
  double uncertainty = 0.0;
  bool eligible = true;
  std::string exclusion_reason;  // empty when eligible
  double runtime_s = 0.0;
};

struct StageTimings {
  double standardize_s = 0.0;
  double init_fit_s = 0.0;
  double selection_s = 0.0;
  double refits_s = 0.0;
  double total_s = 0.0;
};

enum class PipelineMode { Cluster, Supervised, SemiSupervised };

inline const char* pipeline_mode_name(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::Cluster: return "cluster";
    case PipelineMode::Supervised: return "supervised";
    case PipelineMode::SemiSupervised: return "semisupervised";
  }
  return "unknown";
}

struct VsccReport {
  PipelineMode mode = PipelineMode::Cluster;
  std::vector<SubsetCandidate> candidates;
  std::size_t chosen_index = 0;
  std::optional<FittedMixture> init_fit;  // full-variable fit, when one exists
  StageTimings timings;
  FitConfig config;
  bool include_full_set = false;
  std::vector<int> unknown_rows;  // 1-based; empty in cluster mode

  const SubsetCandidate& chosen() const { return candidates[chosen_index]; }
};

namespace detail {

inline double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// minimal uncertainty; ties to fewer variables, then lower relationship order
inline void choose_candidate(VsccReport& report) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto& cand = report.candidates[i];
    if (!cand.eligible) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& incumbent = report.candidates[*best];
    const auto key = [](const SubsetCandidate& c) {
      return std::make_tuple(c.uncertainty, c.subset.size(),
                             relationship_order(c.subset.relationship));
    };
    if (key(cand) < key(incumbent)) best = i;
  }
  if (!best)
    throw Error(ErrorCode::AllCandidatesExcluded,
                "every candidate subset was excluded from comparison");
  report.chosen_index = *best;
}

}  // namespace detail

// Unsupervised pipeline: full-data BIC fit for initial labels, stepwise
// selection, one BIC fit per surviving subset, then the minimum-uncertainty
// candidate wins. Candidates whose refit picks G=1 carry no uncertainty
// signal and are excluded (but reported). With include_full_set the
// unreduced fit competes as well.
inline VsccReport run_clustering(const Dataset& ds, const FitConfig& cfg,
                                 bool include_full_set = true) {
  const auto t0 = std::chrono::steady_clock::now();
  VsccReport report;
  report.mode = PipelineMode::Cluster;
  report.config = cfg;
  report.include_full_set = include_full_set;

  const Dataset standardized = standardize(ds);
  report.timings.standardize_s = detail::seconds_since(t0);

  const auto t_init = std::chrono::steady_clock::now();
  FittedMixture init_fit = select_bic(standardized, cfg);
  report.timings.init_fit_s = detail::seconds_since(t_init);
  if (init_fit.G == 1)
    throw Error(ErrorCode::InitialSolutionHasOneGroup,
                "the initial BIC-best solution has a single component, so "
                "within-group variances carry no signal; rerun with g_min=2 "
                "if group structure is expected");

  const auto t_sel = std::chrono::steady_clock::now();
  const Partition init_labels = harden(init_fit.assignment);
  const auto w = within_group_variances(standardized, init_labels);
  const auto rho = correlation_matrix(standardized);
  const auto selection = select_all(w, rho);
  report.timings.selection_s = detail::seconds_since(t_sel);

  const auto t_refit = std::chrono::steady_clock::now();
  for (const auto& subset : selection.subsets) {
    SubsetCandidate cand;
    cand.subset = subset;
    const auto t_one = std::chrono::steady_clock::now();
    cand.fit = select_bic(select_columns(standardized, subset.indices), cfg);
    cand.runtime_s = detail::seconds_since(t_one);
    cand.uncertainty = uncertainty(cand.fit.assignment);
    if (cand.fit.G == 1) {
      cand.eligible = false;
      cand.exclusion_reason = "refit_selected_G1";
    }
    report.candidates.push_back(std::move(cand));
  }
  report.timings.refits_s = detail::seconds_since(t_refit);

  if (include_full_set) {
    SubsetCandidate full;
    full.subset = VariableSubset{all_columns(ds), Relationship::FullSet};
    full.fit = init_fit;
    full.uncertainty = uncertainty(init_fit.assignment);
    full.runtime_s = report.timings.init_fit_s;
    report.candidates.push_back(std::move(full));
  }
  report.init_fit = std::move(init_fit);

  detail::choose_candidate(report);
  report.timings.total_s = detail::seconds_since(t0);
  return report;
}

namespace detail {

inline void validate_known(const PartialPartition& known, Eigen::Index n,
                           long min_per_class) {
  if (static_cast<Eigen::Index>(known.labels.size()) != n)
    throw Error(ErrorCode::DimensionMismatch,
                "known labels do not match the number of observations");
  if (known.group_count < 2)
    throw Error(ErrorCode::InitialSolutionHasOneGroup,
                "classification needs at least two declared classes");
  std::vector<long> counts(static_cast<std::size_t>(known.group_count), 0);
  for (int l : known.labels) {
    if (l < 0 || l > known.group_count)
      throw Error(ErrorCode::InvalidSpec, "known label outside 0..G");
    if (l > 0) counts[static_cast<std::size_t>(l - 1)]++;
  }
  for (std::size_t g = 0; g < counts.size(); ++g)
    if (counts[g] < min_per_class)
      throw Error(ErrorCode::EmptyKnownGroup,
                  "class " + std::to_string(g + 1) + " has " +
                      std::to_string(counts[g]) +
                      " labeled observations, need at least " +
                      std::to_string(min_per_class));
}

inline std::vector<int> rows_with_label(const PartialPartition& known,
                                        bool labeled) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < known.labels.size(); ++i)
    if ((known.labels[i] != 0) == labeled)
      rows.push_back(static_cast<int>(i) + 1);
  return rows;
}

// shared tail of the two classification pipelines: stepwise selection from
// the given W, one classification fit per subset, choose by uncertainty over
// the unknown rows
inline VsccReport classification_tail(const Dataset& standardized,
                                      const PartialPartition& known,
                                      const FitConfig& cfg,
                                      const WithinGroupVariances& w,
                                      VsccReport&& report,
                                      std::chrono::steady_clock::time_point t0) {
  const auto t_sel = std::chrono::steady_clock::now();
  const auto rho = correlation_matrix(standardized);
  const auto selection = select_all(w, rho);
  report.timings.selection_s = detail::seconds_since(t_sel);
  report.unknown_rows = rows_with_label(known, false);

  const auto t_refit = std::chrono::steady_clock::now();
  for (const auto& subset : selection.subsets) {
    SubsetCandidate cand;
    cand.subset = subset;
    const auto t_one = std::chrono::steady_clock::now();
    cand.fit = fit_classification(select_columns(standardized, subset.indices),
                                  known, cfg);
    cand.runtime_s = detail::seconds_since(t_one);
    cand.uncertainty =
        uncertainty_over_rows(cand.fit.assignment, report.unknown_rows);
    report.candidates.push_back(std::move(cand));
  }
  report.timings.refits_s = detail::seconds_since(t_refit);

  detail::choose_candidate(report);
  report.timings.total_s = detail::seconds_since(t0);
  return std::move(report);
}

}  // namespace detail

// Supervised pipeline: W computed from the labeled rows only, then
// classification fits on each subset. Uncertainty is compared over the
// unlabeled rows (labeled rows are clamped and contribute none).
inline VsccReport run_supervised(const Dataset& ds,
                                 const PartialPartition& known,
                                 const FitConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::validate_known(known, ds.n(), 2);

  VsccReport report;
  report.mode = PipelineMode::Supervised;
  report.config = cfg;

  const Dataset standardized = standardize(ds);
  report.timings.standardize_s = detail::seconds_since(t0);

  const auto labeled_rows = detail::rows_with_label(known, true);
  Partition labeled;
  labeled.group_count = known.group_count;
  for (int r : labeled_rows)
    labeled.labels.push_back(known.labels[static_cast<std::size_t>(r - 1)]);
  const auto w = within_group_variances(select_rows(standardized, labeled_rows),
                                        labeled);

  return detail::classification_tail(standardized, known, cfg, w,
                                     std::move(report), t0);
}

// Semi-supervised pipeline: a full-variable classification fit estimates the
// unknown labels first, and W is computed from known plus hardened estimated
// labels over all rows.
inline VsccReport run_semisupervised(const Dataset& ds,
                                     const PartialPartition& known,
                                     const FitConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::validate_known(known, ds.n(), 2);

  VsccReport report;
  report.mode = PipelineMode::SemiSupervised;
  report.config = cfg;

  const Dataset standardized = standardize(ds);
  report.timings.standardize_s = detail::seconds_since(t0);

  const auto t_init = std::chrono::steady_clock::now();
  FittedMixture init_fit = fit_classification(standardized, known, cfg);
  report.timings.init_fit_s = detail::seconds_since(t_init);

  const Partition estimated = harden(init_fit.assignment);
  Partition combined;
  combined.group_count = known.group_count;
  combined.labels.resize(known.labels.size());
  for (std::size_t i = 0; i < known.labels.size(); ++i)
    combined.labels[i] =
        known.labels[i] != 0 ? known.labels[i] : estimated.labels[i];
  report.init_fit = std::move(init_fit);

  const auto w = within_group_variances(standardized, combined);
  return detail::classification_tail(standardized, known, cfg, w,
                                     std::move(report), t0);
}

}  // namespace vscc
