#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/error.hpp"
#include "vscc/metrics.hpp"
#include "vscc/rng.hpp"

namespace vscc {

struct SimSpec {
  int groups = 4;
  int n_per_group_min = 100;
  int n_per_group_max = 150;
  int p_signal = 10;
  int p_noise = 5;
  double separation = 0.7;  // in (0, 1]
  std::uint64_t seed = 1;

  int p() const { return p_signal + p_noise; }
};

inline void validate_spec(const SimSpec& spec) {
  if (spec.groups < 2)
    throw Error(ErrorCode::InvalidSpec, "need at least 2 groups");
  if (spec.n_per_group_min < 2 || spec.n_per_group_max < spec.n_per_group_min)
    throw Error(ErrorCode::InvalidSpec, "bad per-group size range");
  if (spec.p_signal < 1)
    throw Error(ErrorCode::InvalidSpec, "need at least 1 signal variable");
  if (spec.p_noise < 0)
    throw Error(ErrorCode::InvalidSpec, "noise dimension must be >= 0");
  if (!(spec.separation > 0.0 && spec.separation <= 1.0))
    throw Error(ErrorCode::InvalidSpec, "separation must lie in (0, 1]");
}

struct SimInstance {
  Dataset dataset;
  Partition truth;
  std::vector<int> signal_indices;  // 1-based columns carrying group structure
};

// Per-dimension group-mean gap. Group means in each signal dimension are a
// random permutation of {0, u, 2u, ...}, so every pair of groups differs in
// every signal dimension by at least u and the pairwise mean distance in the
// signal subspace is at least u * sqrt(p_signal). Group standard deviations
// are at most sqrt(1.5), so u = separation * 4 * sqrt(1.5) / (0.7 * sqrt(p_s))
// keeps subspace distances >= 4 pooled standard deviations at separation 0.7,
// shrinking linearly to overlap as separation -> 0.
inline double separation_gap(double separation, int p_signal) {
  return separation * (4.0 * std::sqrt(1.5) / 0.7) /
         std::sqrt(static_cast<double>(p_signal));
}

// Gaussian groups on the signal block, standard-normal noise block,
// deterministic in the seed.
inline SimInstance generate(const SimSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed);

  const int G = spec.groups;
  std::vector<int> sizes(static_cast<std::size_t>(G));
  for (auto& s : sizes)
    s = rng.uniform_int(spec.n_per_group_min, spec.n_per_group_max);
  const long n = std::accumulate(sizes.begin(), sizes.end(), 0L);

  // group means: an independent shuffled ladder per signal dimension
  const double gap = separation_gap(spec.separation, spec.p_signal);
  Eigen::MatrixXd means(G, spec.p_signal);
  for (int j = 0; j < spec.p_signal; ++j) {
    std::vector<int> ladder(static_cast<std::size_t>(G));
    std::iota(ladder.begin(), ladder.end(), 0);
    rng.shuffle(ladder);
    for (int g = 0; g < G; ++g)
      means(g, j) = gap * static_cast<double>(ladder[static_cast<std::size_t>(g)]);
  }

  // random diagonal covariances keep the planted Bayes rule tractable
  Eigen::MatrixXd group_sd(G, spec.p_signal);
  for (int g = 0; g < G; ++g)
    for (int j = 0; j < spec.p_signal; ++j)
      group_sd(g, j) = std::sqrt(rng.uniform(0.5, 1.5));

  SimInstance out;
  out.dataset.values.resize(n, spec.p());
  out.truth.group_count = G;
  out.truth.labels.reserve(static_cast<std::size_t>(n));

  Eigen::Index row = 0;
  for (int g = 0; g < G; ++g) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(g)]; ++i, ++row) {
      for (int j = 0; j < spec.p_signal; ++j)
        out.dataset.values(row, j) =
            means(g, j) + group_sd(g, j) * rng.normal();
      for (int j = spec.p_signal; j < spec.p(); ++j)
        out.dataset.values(row, j) = rng.normal();
      out.truth.labels.push_back(g + 1);
    }
  }

  out.dataset.var_names.reserve(static_cast<std::size_t>(spec.p()));
  for (int j = 1; j <= spec.p(); ++j)
    out.dataset.var_names.push_back("V" + std::to_string(j));
  for (int j = 1; j <= spec.p_signal; ++j) out.signal_indices.push_back(j);
  return out;
}

// What a pipeline under study reports for one replicate.
struct PipelineOutcome {
  Partition labels;
  int n_vars = 0;
  Relationship relationship = Relationship::FullSet;
};

using Pipeline =
    std::function<PipelineOutcome(const SimInstance&, std::uint64_t seed)>;

struct RepResult {
  int rep_index = 0;  // 1-based
  double ari = 0.0;
  double runtime_s = 0.0;
  int n_vars_chosen = 0;
  Relationship relationship = Relationship::FullSet;
  std::string status = "ok";  // or "error:<code>"
};

struct StudySummary {
  double mean_ari = 0.0;
  double sd_ari = 0.0;
  double mean_runtime_s = 0.0;
  std::vector<RepResult> reps;
};

namespace detail {

inline RepResult run_replicate(const SimSpec& spec, int rep_index,
                               const Pipeline& pipeline) {
  SimSpec rep_spec = spec;
  rep_spec.seed = derive_seed(spec.seed,
                              {0x5eedULL, static_cast<std::uint64_t>(rep_index)});
  RepResult result;
  result.rep_index = rep_index;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SimInstance instance = generate(rep_spec);
    const auto outcome = pipeline(instance, rep_spec.seed);
    result.ari = adjusted_rand_index(outcome.labels, instance.truth);
    result.n_vars_chosen = outcome.n_vars;
    result.relationship = outcome.relationship;
  } catch (const Error& e) {
    // scored as ARI 0, like G=1 initializations in the reference studies
    result.ari = 0.0;
    result.status = std::string("error:") + error_code_name(e.code());
  }
  result.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

}  // namespace detail

// Runs the pipeline over n_reps independently generated replicates with
// derived seeds. Replicates execute concurrently; results are gathered in
// replicate order, so the summary does not depend on scheduling. Pipeline
// errors become ARI-0 failure rows.
inline StudySummary replicate_study(const SimSpec& spec, int n_reps,
                                    const Pipeline& pipeline) {
  validate_spec(spec);
  if (n_reps < 1)
    throw Error(ErrorCode::InvalidSpec, "need at least one replicate");

  StudySummary summary;
  summary.reps.resize(static_cast<std::size_t>(n_reps));

  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(n_reps)));
  std::vector<std::future<RepResult>> futures;
  futures.reserve(static_cast<std::size_t>(n_reps));
  for (int rep = 1; rep <= n_reps; ++rep) {
    if (workers == 1) {
      summary.reps[static_cast<std::size_t>(rep - 1)] =
          detail::run_replicate(spec, rep, pipeline);
    } else {
      futures.push_back(std::async(std::launch::async, [&spec, rep,
                                                        &pipeline] {
        return detail::run_replicate(spec, rep, pipeline);
      }));
      if (futures.size() == workers || rep == n_reps) {
        for (auto& f : futures) {
          RepResult r = f.get();
          summary.reps[static_cast<std::size_t>(r.rep_index - 1)] =
              std::move(r);
        }
        futures.clear();
      }
    }
  }

  double sum = 0.0, sum_sq = 0.0, time_sum = 0.0;
  for (const auto& rep : summary.reps) {
    sum += rep.ari;
    sum_sq += rep.ari * rep.ari;
    time_sum += rep.runtime_s;
  }
  const double n = static_cast<double>(n_reps);
  summary.mean_ari = sum / n;
  const double var =
      n > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)) : 0.0;
  summary.sd_ari = std::sqrt(var);
  summary.mean_runtime_s = time_sum / n;
  return summary;
}

}  // namespace vscc
