#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/error.hpp"
#include "vscc/rng.hpp"

namespace vscc {

// Covariance structure: volume axis (spherical/diagonal/full) crossed with
// whether components share one matrix or vary.
enum class CovarianceModel {
  SphericalEqual = 0,
  SphericalVarying = 1,
  DiagonalEqual = 2,
  DiagonalVarying = 3,
  FullEqual = 4,
  FullVarying = 5,
};

inline constexpr std::array<CovarianceModel, 6> all_covariance_models{
    CovarianceModel::SphericalEqual,  CovarianceModel::SphericalVarying,
    CovarianceModel::DiagonalEqual,   CovarianceModel::DiagonalVarying,
    CovarianceModel::FullEqual,       CovarianceModel::FullVarying,
};

inline const char* covariance_model_name(CovarianceModel m) {
  switch (m) {
    case CovarianceModel::SphericalEqual: return "spherical_equal";
    case CovarianceModel::SphericalVarying: return "spherical_varying";
    case CovarianceModel::DiagonalEqual: return "diagonal_equal";
    case CovarianceModel::DiagonalVarying: return "diagonal_varying";
    case CovarianceModel::FullEqual: return "full_equal";
    case CovarianceModel::FullVarying: return "full_varying";
  }
  return "unknown";
}

inline CovarianceModel covariance_model_from_name(const std::string& name) {
  for (auto m : all_covariance_models)
    if (name == covariance_model_name(m)) return m;
  throw Error(ErrorCode::InvalidConfig, "unknown covariance model: " + name);
}

// Free parameters: (G-1) mixing + G*p means + covariance parameters.
inline int free_parameter_count(CovarianceModel model, int G, int p) {
  int cov = 0;
  switch (model) {
    case CovarianceModel::SphericalEqual: cov = 1; break;
    case CovarianceModel::SphericalVarying: cov = G; break;
    case CovarianceModel::DiagonalEqual: cov = p; break;
    case CovarianceModel::DiagonalVarying: cov = G * p; break;
    case CovarianceModel::FullEqual: cov = p * (p + 1) / 2; break;
    case CovarianceModel::FullVarying: cov = G * p * (p + 1) / 2; break;
  }
  return (G - 1) + G * p + cov;
}

struct FitConfig {
  int g_min = 1;
  int g_max = 9;
  std::vector<CovarianceModel> models{all_covariance_models.begin(),
                                      all_covariance_models.end()};
  int max_iter = 500;
  double rel_tol = 1e-8;
  int n_restarts = 10;
  std::uint64_t seed = 1;
  double ridge = 1e-6;
};

inline void validate_config(const FitConfig& cfg) {
  if (cfg.g_min < 1 || cfg.g_max < cfg.g_min)
    throw Error(ErrorCode::InvalidConfig, "need 1 <= g_min <= g_max");
  if (cfg.models.empty())
    throw Error(ErrorCode::InvalidConfig, "model list is empty");
  if (cfg.max_iter < 1)
    throw Error(ErrorCode::InvalidConfig, "max_iter must be >= 1");
  if (!(cfg.rel_tol > 0.0))
    throw Error(ErrorCode::InvalidConfig, "rel_tol must be > 0");
  if (cfg.n_restarts < 1)
    throw Error(ErrorCode::InvalidConfig, "n_restarts must be >= 1");
  if (cfg.ridge < 0.0)
    throw Error(ErrorCode::InvalidConfig, "ridge must be >= 0");
}

struct FittedMixture {
  Eigen::VectorXd weights;               // G, sums to 1
  Eigen::MatrixXd means;                 // G x p
  std::vector<Eigen::MatrixXd> covariances;  // G matrices, p x p, SPD
  double loglik = 0.0;
  double bic = 0.0;
  SoftAssignment assignment;
  CovarianceModel model = CovarianceModel::FullVarying;
  int G = 0;
  int free_parameters = 0;
  std::vector<double> loglik_trace;  // per EM iteration of the winning run
};

namespace detail {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

struct MixtureParams {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  std::vector<Eigen::MatrixXd> covs;
  std::vector<Eigen::MatrixXd> chol;     // lower factors
  std::vector<double> logdet;
};

// Cholesky with escalating diagonal ridge; cov is updated in place when a
// ridge was needed so the stored matrix stays consistent with the factor.
inline bool cholesky_with_ridge(Eigen::MatrixXd& cov, double ridge,
                                Eigen::MatrixXd& L, double& logdet) {
  double bump = ridge;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      L = llt.matrixL();
      logdet = 0.0;
      bool ok = true;
      for (Eigen::Index j = 0; j < L.rows(); ++j) {
        if (!(L(j, j) > 0.0) || !std::isfinite(L(j, j))) ok = false;
        logdet += std::log(L(j, j));
      }
      logdet *= 2.0;
      if (ok && std::isfinite(logdet)) return true;
    }
    if (bump <= 0.0) return false;
    cov.diagonal().array() += bump;
    bump *= 10.0;
  }
  return false;
}

inline bool factorize(MixtureParams& params, double ridge) {
  const std::size_t G = params.covs.size();
  params.chol.assign(G, Eigen::MatrixXd());
  params.logdet.assign(G, 0.0);
  for (std::size_t g = 0; g < G; ++g)
    if (!cholesky_with_ridge(params.covs[g], ridge, params.chol[g],
                             params.logdet[g]))
      return false;
  return true;
}

// n x G matrix of log(pi_g) + log N(x_i | mu_g, Sigma_g)
inline Eigen::MatrixXd weighted_log_density(const Eigen::MatrixXd& X,
                                            const MixtureParams& params) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const Eigen::Index G = params.weights.size();
  Eigen::MatrixXd out(n, G);
  for (Eigen::Index g = 0; g < G; ++g) {
    const Eigen::MatrixXd centered =
        X.rowwise() - params.means.row(g);
    const Eigen::MatrixXd solved =
        params.chol[static_cast<std::size_t>(g)]
            .triangularView<Eigen::Lower>()
            .solve(centered.transpose());
    const double base = std::log(params.weights(g)) -
                        0.5 * (static_cast<double>(p) * kLogTwoPi +
                               params.logdet[static_cast<std::size_t>(g)]);
    out.col(g) =
        (-0.5 * solved.colwise().squaredNorm().transpose().array() + base)
            .matrix();
  }
  return out;
}

struct EStep {
  Eigen::MatrixXd resp;
  double loglik = 0.0;
};

// Posterior responsibilities via log-sum-exp. When `known` is non-null,
// rows with a known label are clamped to their 0/1 row and contribute
// log(pi_g f_g) instead of the mixture log-sum.
inline EStep e_step(const Eigen::MatrixXd& X, const MixtureParams& params,
                    const std::vector<int>* known) {
  const Eigen::MatrixXd logs = weighted_log_density(X, params);
  EStep out;
  out.resp.resize(logs.rows(), logs.cols());
  out.loglik = 0.0;
  for (Eigen::Index i = 0; i < logs.rows(); ++i) {
    if (known && (*known)[static_cast<std::size_t>(i)] != 0) {
      const int g = (*known)[static_cast<std::size_t>(i)] - 1;
      out.resp.row(i).setZero();
      out.resp(i, g) = 1.0;
      out.loglik += logs(i, g);
      continue;
    }
    const double mx = logs.row(i).maxCoeff();
    const double sum = (logs.row(i).array() - mx).exp().sum();
    const double lse = mx + std::log(sum);
    out.resp.row(i) = (logs.row(i).array() - lse).exp();
    out.loglik += lse;
  }
  return out;
}

// Maximum-likelihood update under the covariance structure. Returns nullopt
// when a component collapsed or a factorization could not be repaired.
inline std::optional<MixtureParams> m_step(const Eigen::MatrixXd& X,
                                           const Eigen::MatrixXd& resp,
                                           CovarianceModel model,
                                           double ridge) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const Eigen::Index G = resp.cols();

  MixtureParams params;
  params.weights.resize(G);
  params.means.resize(G, p);
  params.covs.assign(static_cast<std::size_t>(G), Eigen::MatrixXd());

  const Eigen::VectorXd ng = resp.colwise().sum();
  for (Eigen::Index g = 0; g < G; ++g) {
    if (!(ng(g) > 1e-8)) return std::nullopt;  // collapsed component
    params.weights(g) = ng(g) / static_cast<double>(n);
    params.means.row(g) = (resp.col(g).transpose() * X) / ng(g);
  }

  std::vector<Eigen::MatrixXd> scatter(static_cast<std::size_t>(G));
  const bool full = model == CovarianceModel::FullEqual ||
                    model == CovarianceModel::FullVarying;
  for (Eigen::Index g = 0; g < G; ++g) {
    const Eigen::MatrixXd centered = X.rowwise() - params.means.row(g);
    if (full) {
      scatter[static_cast<std::size_t>(g)] =
          centered.transpose() *
          (centered.array().colwise() * resp.col(g).array()).matrix();
    } else {
      // diagonal second moments only
      scatter[static_cast<std::size_t>(g)] =
          (centered.array().square().colwise() * resp.col(g).array())
              .colwise()
              .sum()
              .matrix()
              .transpose();  // p x 1
    }
  }

  auto spherical_of = [&](const Eigen::MatrixXd& diag_sums, double denom) {
    return Eigen::MatrixXd::Identity(p, p) *
           (diag_sums.sum() / (denom * static_cast<double>(p)));
  };
  auto diagonal_of = [&](const Eigen::MatrixXd& diag_sums, double denom) {
    return Eigen::MatrixXd((diag_sums / denom).col(0).asDiagonal());
  };

  switch (model) {
    case CovarianceModel::SphericalVarying:
      for (Eigen::Index g = 0; g < G; ++g)
        params.covs[static_cast<std::size_t>(g)] =
            spherical_of(scatter[static_cast<std::size_t>(g)], ng(g));
      break;
    case CovarianceModel::SphericalEqual: {
      Eigen::MatrixXd pooled = scatter[0];
      for (Eigen::Index g = 1; g < G; ++g)
        pooled += scatter[static_cast<std::size_t>(g)];
      const Eigen::MatrixXd shared =
          spherical_of(pooled, static_cast<double>(n));
      for (auto& c : params.covs) c = shared;
      break;
    }
    case CovarianceModel::DiagonalVarying:
      for (Eigen::Index g = 0; g < G; ++g)
        params.covs[static_cast<std::size_t>(g)] =
            diagonal_of(scatter[static_cast<std::size_t>(g)], ng(g));
      break;
    case CovarianceModel::DiagonalEqual: {
      Eigen::MatrixXd pooled = scatter[0];
      for (Eigen::Index g = 1; g < G; ++g)
        pooled += scatter[static_cast<std::size_t>(g)];
      const Eigen::MatrixXd shared =
          diagonal_of(pooled, static_cast<double>(n));
      for (auto& c : params.covs) c = shared;
      break;
    }
    case CovarianceModel::FullVarying:
      for (Eigen::Index g = 0; g < G; ++g)
        params.covs[static_cast<std::size_t>(g)] =
            scatter[static_cast<std::size_t>(g)] / ng(g);
      break;
    case CovarianceModel::FullEqual: {
      Eigen::MatrixXd pooled = scatter[0];
      for (Eigen::Index g = 1; g < G; ++g)
        pooled += scatter[static_cast<std::size_t>(g)];
      const Eigen::MatrixXd shared = pooled / static_cast<double>(n);
      for (auto& c : params.covs) c = shared;
      break;
    }
  }

  if (!factorize(params, ridge)) return std::nullopt;
  return params;
}

// k-means++ seeding plus a short Lloyd refinement; returns hard labels
inline std::vector<int> kmeans_init(const Eigen::MatrixXd& X, int G,
                                    Rng& rng) {
  const Eigen::Index n = X.rows();
  std::vector<Eigen::RowVectorXd> centers;
  centers.reserve(static_cast<std::size_t>(G));
  centers.push_back(X.row(rng.uniform_int(0, static_cast<int>(n) - 1)));

  std::vector<double> d2(static_cast<std::size_t>(n),
                         std::numeric_limits<double>::infinity());
  for (int c = 1; c < G; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (X.row(i) - centers.back()).squaredNorm();
      auto& slot = d2[static_cast<std::size_t>(i)];
      slot = std::min(slot, d);
      total += slot;
    }
    if (total > 0.0) {
      centers.push_back(X.row(static_cast<Eigen::Index>(rng.categorical(d2))));
    } else {
      centers.push_back(X.row(rng.uniform_int(0, static_cast<int>(n) - 1)));
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < 10; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (X.row(i) - centers[0]).squaredNorm();
      for (int g = 1; g < G; ++g) {
        const double d = (X.row(i) - centers[static_cast<std::size_t>(g)])
                             .squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = g;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) changed = true;
      labels[static_cast<std::size_t>(i)] = best;
    }
    for (int g = 0; g < G; ++g) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(X.cols());
      long count = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (labels[static_cast<std::size_t>(i)] == g) {
          sum += X.row(i);
          ++count;
        }
      if (count > 0) {
        centers[static_cast<std::size_t>(g)] =
            sum / static_cast<double>(count);
      } else {
        // relocate an empty cluster onto the worst-fitted point
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d =
              (X.row(i) -
               centers[static_cast<std::size_t>(
                   labels[static_cast<std::size_t>(i)])])
                  .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers[static_cast<std::size_t>(g)] = X.row(far);
        labels[static_cast<std::size_t>(far)] = g;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return labels;
}

struct EmOutcome {
  MixtureParams params;
  Eigen::MatrixXd resp;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  bool ok = false;
};

// Alternates E and M until the relative log-likelihood change falls under
// rel_tol. Entry is either initial responsibilities or initial parameters.
inline EmOutcome run_em(const Eigen::MatrixXd& X,
                        const std::optional<Eigen::MatrixXd>& resp0,
                        std::optional<MixtureParams> params0,
                        CovarianceModel model, const FitConfig& cfg,
                        const std::vector<int>* known) {
  EmOutcome out;
  std::optional<MixtureParams> params = std::move(params0);
  if (!params) {
    params = m_step(X, *resp0, model, cfg.ridge);
    if (!params) return out;
  }

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    EStep step = e_step(X, *params, known);
    if (!std::isfinite(step.loglik)) return out;
    out.trace.push_back(step.loglik);
    out.resp = std::move(step.resp);
    out.loglik = step.loglik;
    if (iter > 0 &&
        std::abs(step.loglik - prev) <=
            cfg.rel_tol * (1.0 + std::abs(step.loglik)))
      break;
    prev = step.loglik;
    auto next = m_step(X, out.resp, model, cfg.ridge);
    if (!next) return out;
    params = std::move(next);
  }
  out.params = std::move(*params);
  out.ok = true;
  return out;
}

inline FittedMixture finalize_fit(const Dataset& ds, EmOutcome&& run,
                                  CovarianceModel model, int G) {
  FittedMixture fit;
  fit.weights = std::move(run.params.weights);
  fit.means = std::move(run.params.means);
  fit.covariances = std::move(run.params.covs);
  fit.loglik = run.loglik;
  fit.model = model;
  fit.G = G;
  fit.free_parameters =
      free_parameter_count(model, G, static_cast<int>(ds.p()));
  fit.bic = 2.0 * fit.loglik -
            static_cast<double>(fit.free_parameters) *
                std::log(static_cast<double>(ds.n()));
  fit.assignment = SoftAssignment{std::move(run.resp)};
  fit.loglik_trace = std::move(run.trace);
  return fit;
}

}  // namespace detail

// One EM fit at fixed (G, model); best of cfg.n_restarts runs by final
// log-likelihood. G=1 is the closed-form single-Gaussian fit.
inline FittedMixture fit_em(const Dataset& ds, int G, CovarianceModel model,
                            const FitConfig& cfg) {
  validate_config(cfg);
  if (G < 1) throw Error(ErrorCode::InvalidConfig, "G must be >= 1");
  if (ds.n() <= G)
    throw Error(ErrorCode::TooFewObservations,
                "need n > G, got n = " + std::to_string(ds.n()) +
                    " with G = " + std::to_string(G));

  const Eigen::MatrixXd& X = ds.values;
  detail::EmOutcome best;
  const int restarts = (G == 1) ? 1 : cfg.n_restarts;
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd resp0 = Eigen::MatrixXd::Zero(ds.n(), G);
    if (G == 1) {
      resp0.setOnes();
    } else {
      Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(G),
                                     static_cast<std::uint64_t>(model),
                                     static_cast<std::uint64_t>(r)}));
      const auto labels = detail::kmeans_init(X, G, rng);
      for (Eigen::Index i = 0; i < ds.n(); ++i)
        resp0(i, labels[static_cast<std::size_t>(i)]) = 1.0;
    }
    auto run = detail::run_em(X, resp0, std::nullopt, model, cfg, nullptr);
    if (run.ok && run.loglik > best.loglik) best = std::move(run);
  }
  if (!best.ok)
    throw Error(ErrorCode::DegenerateFit,
                "all restarts collapsed for G = " + std::to_string(G) +
                    ", model " + covariance_model_name(model));
  return detail::finalize_fit(ds, std::move(best), model, G);
}

// Exhaustive (G, model) grid, returning the fit with maximal BIC. Cells that
// degenerate are skipped; ties resolve to the smaller G, then the earlier
// model in cfg.models.
inline FittedMixture select_bic(const Dataset& ds, const FitConfig& cfg) {
  validate_config(cfg);
  std::optional<FittedMixture> best;
  for (int G = cfg.g_min; G <= cfg.g_max; ++G) {
    if (ds.n() <= G) break;
    for (CovarianceModel model : cfg.models) {
      FittedMixture fit;
      try {
        fit = fit_em(ds, G, model, cfg);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateFit) continue;
        throw;
      }
      if (!best || fit.bic > best->bic) best = std::move(fit);
    }
  }
  if (!best)
    throw Error(ErrorCode::AllFitsFailed,
                "no (G, model) cell produced a usable fit");
  return *std::move(best);
}

// Model-based classification: EM with the labeled rows' responsibilities
// clamped to their 0/1 rows; G is fixed to the declared group count and the
// covariance model is chosen by BIC.
inline FittedMixture fit_classification(const Dataset& ds,
                                        const PartialPartition& known,
                                        const FitConfig& cfg) {
  validate_config(cfg);
  const int G = known.group_count;
  if (G < 1) throw Error(ErrorCode::InvalidConfig, "declared G must be >= 1");
  if (static_cast<Eigen::Index>(known.labels.size()) != ds.n())
    throw Error(ErrorCode::DimensionMismatch,
                "known labels do not match the number of observations");
  if (ds.n() <= G)
    throw Error(ErrorCode::TooFewObservations,
                "need n > G for classification");

  std::vector<long> counts(static_cast<std::size_t>(G), 0);
  for (int l : known.labels) {
    if (l < 0 || l > G)
      throw Error(ErrorCode::InvalidSpec, "known label outside 0..G");
    if (l > 0) counts[static_cast<std::size_t>(l - 1)]++;
  }
  for (std::size_t g = 0; g < counts.size(); ++g)
    if (counts[g] == 0)
      throw Error(ErrorCode::EmptyKnownGroup,
                  "group " + std::to_string(g + 1) +
                      " has no labeled observations");

  const Eigen::MatrixXd& X = ds.values;
  const Eigen::Index p = ds.p();
  const long known_total =
      std::accumulate(counts.begin(), counts.end(), 0L);

  // deterministic start: labeled group means, pooled labeled covariance
  detail::MixtureParams init;
  init.weights.resize(G);
  init.means = Eigen::MatrixXd::Zero(G, p);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const int l = known.labels[static_cast<std::size_t>(i)];
    if (l > 0) init.means.row(l - 1) += X.row(i);
  }
  for (int g = 0; g < G; ++g) {
    init.weights(g) = static_cast<double>(counts[static_cast<std::size_t>(g)]) /
                      static_cast<double>(known_total);
    init.means.row(g) /= static_cast<double>(counts[static_cast<std::size_t>(g)]);
  }
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const int l = known.labels[static_cast<std::size_t>(i)];
    if (l > 0) {
      const Eigen::RowVectorXd d = X.row(i) - init.means.row(l - 1);
      pooled += d.transpose() * d;
    }
  }
  pooled /= static_cast<double>(known_total);
  pooled.diagonal().array() += std::max(cfg.ridge, 1e-10);
  init.covs.assign(static_cast<std::size_t>(G), pooled);

  std::optional<FittedMixture> best;
  for (CovarianceModel model : cfg.models) {
    detail::MixtureParams start = init;
    if (!detail::factorize(start, cfg.ridge)) continue;
    auto run = detail::run_em(X, std::nullopt, std::move(start), model, cfg,
                              &known.labels);
    if (!run.ok) continue;
    FittedMixture fit = detail::finalize_fit(ds, std::move(run), model, G);
    if (!best || fit.bic > best->bic) best = std::move(fit);
  }
  if (!best)
    throw Error(ErrorCode::DegenerateFit,
                "classification EM collapsed under every covariance model");
  return *std::move(best);
}

}  // namespace vscc
