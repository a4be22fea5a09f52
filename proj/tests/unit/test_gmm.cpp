#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "vscc/gmm.hpp"
#include "vscc/metrics.hpp"
#include "vscc/rng.hpp"

using namespace vscc;

namespace {

FitConfig quick_config(int g_min, int g_max, std::uint64_t seed = 1,
                       int restarts = 5) {
  FitConfig cfg;
  cfg.g_min = g_min;
  cfg.g_max = g_max;
  cfg.seed = seed;
  cfg.n_restarts = restarts;
  return cfg;
}

void require_monotone_trace(const FittedMixture& fit) {
  for (std::size_t t = 1; t < fit.loglik_trace.size(); ++t)
    REQUIRE(fit.loglik_trace[t] >= fit.loglik_trace[t - 1] - 1e-8);
}

// MLE covariance of the whole sample (denominator n)
Eigen::MatrixXd mle_covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("free parameter counts match the analytic formulas") {
  for (int G : {1, 2, 3})
    for (int p : {1, 2, 5}) {
      const int base = (G - 1) + G * p;
      REQUIRE(free_parameter_count(CovarianceModel::SphericalEqual, G, p) ==
              base + 1);
      REQUIRE(free_parameter_count(CovarianceModel::SphericalVarying, G, p) ==
              base + G);
      REQUIRE(free_parameter_count(CovarianceModel::DiagonalEqual, G, p) ==
              base + p);
      REQUIRE(free_parameter_count(CovarianceModel::DiagonalVarying, G, p) ==
              base + G * p);
      REQUIRE(free_parameter_count(CovarianceModel::FullEqual, G, p) ==
              base + p * (p + 1) / 2);
      REQUIRE(free_parameter_count(CovarianceModel::FullVarying, G, p) ==
              base + G * p * (p + 1) / 2);
    }
  // frozen spot checks
  REQUIRE(free_parameter_count(CovarianceModel::FullVarying, 3, 5) == 62);
  REQUIRE(free_parameter_count(CovarianceModel::SphericalEqual, 1, 1) == 2);
  REQUIRE(free_parameter_count(CovarianceModel::DiagonalVarying, 2, 5) == 21);
}

TEST_CASE("G=1 reduces to the closed-form single Gaussian fit") {
  const auto ds = fixtures::single_cloud(60, 3, 41);
  const auto cfg = quick_config(1, 1);

  const Eigen::MatrixXd full_cov = mle_covariance(ds.values);
  const Eigen::VectorXd diag = full_cov.diagonal();

  struct Case {
    CovarianceModel model;
    double logdet;
  };
  const double spherical_logdet =
      3.0 * std::log(diag.sum() / 3.0);
  const double diagonal_logdet = diag.array().log().sum();
  const double full_logdet = std::log(full_cov.determinant());
  const std::vector<Case> cases{
      {CovarianceModel::SphericalEqual, spherical_logdet},
      {CovarianceModel::SphericalVarying, spherical_logdet},
      {CovarianceModel::DiagonalEqual, diagonal_logdet},
      {CovarianceModel::DiagonalVarying, diagonal_logdet},
      {CovarianceModel::FullEqual, full_logdet},
      {CovarianceModel::FullVarying, full_logdet},
  };
  for (const auto& c : cases) {
    const auto fit = fit_em(ds, 1, c.model, cfg);
    const double expected = oracle::single_gaussian_loglik(60, 3, c.logdet);
    REQUIRE_THAT(fit.loglik, Catch::Matchers::WithinAbs(expected, 1e-6));
    REQUIRE((fit.assignment.probs.array() == 1.0).all());
    const double expected_bic =
        2.0 * expected -
        free_parameter_count(c.model, 1, 3) * std::log(60.0);
    REQUIRE_THAT(fit.bic, Catch::Matchers::WithinAbs(expected_bic, 1e-6));
  }
}

TEST_CASE("well-separated planted clouds are recovered exactly") {
  Partition truth;
  const auto ds = fixtures::planted_two_clouds(100, 2, 5.0, 42, &truth);
  const auto fit =
      fit_em(ds, 2, CovarianceModel::SphericalVarying, quick_config(2, 2));
  REQUIRE(adjusted_rand_index(harden(fit.assignment), truth) == 1.0);
  require_monotone_trace(fit);
}

TEST_CASE("EM log-likelihood is monotone on varied fixtures") {
  const auto cfg = quick_config(2, 2, 5, 3);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto easy = fixtures::planted_two_clouds(40, 3, 3.0, seed);
    const auto hard = fixtures::planted_two_clouds(40, 3, 0.7, seed + 100);
    const auto noise = fixtures::single_cloud(50, 2, seed + 200);
    for (const auto* ds : {&easy, &hard, &noise})
      for (auto model : all_covariance_models)
        require_monotone_trace(fit_em(*ds, 2, model, cfg));
  }
}

TEST_CASE("posterior rows sum to one") {
  const auto ds = fixtures::planted_two_clouds(30, 2, 1.5, 43);
  const auto fit =
      fit_em(ds, 3, CovarianceModel::DiagonalVarying, quick_config(3, 3));
  for (Eigen::Index i = 0; i < fit.assignment.n(); ++i)
    REQUIRE_THAT(fit.assignment.probs.row(i).sum(),
                 Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("assignment is the posterior of the stored parameters") {
  const auto ds = fixtures::planted_two_clouds(40, 2, 2.0, 44);
  const auto fit =
      fit_em(ds, 2, CovarianceModel::FullVarying, quick_config(2, 2));
  // recompute responsibilities directly from the stored parameters
  const Eigen::Index n = ds.n();
  Eigen::MatrixXd logs(n, fit.G);
  for (int g = 0; g < fit.G; ++g) {
    const Eigen::MatrixXd cov = fit.covariances[static_cast<std::size_t>(g)];
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    REQUIRE(llt.info() == Eigen::Success);  // SPD invariant
    const Eigen::MatrixXd L = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < L.rows(); ++j) logdet += 2.0 * std::log(L(j, j));
    const Eigen::MatrixXd centered = ds.values.rowwise() - fit.means.row(g);
    const Eigen::MatrixXd solved =
        L.triangularView<Eigen::Lower>().solve(centered.transpose());
    const double two_pi = 2.0 * 3.141592653589793238462643383279502884;
    logs.col(g) =
        (-0.5 * (solved.colwise().squaredNorm().transpose().array() +
                 2.0 * std::log(two_pi) + logdet) +
         std::log(fit.weights(g)))
            .matrix();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logs.row(i).maxCoeff();
    const double lse = mx + std::log((logs.row(i).array() - mx).exp().sum());
    for (int g = 0; g < fit.G; ++g)
      REQUIRE_THAT(fit.assignment.probs(i, g),
                   Catch::Matchers::WithinAbs(std::exp(logs(i, g) - lse),
                                              1e-8));
  }
}

TEST_CASE("weights form a simplex with positive entries") {
  const auto ds = fixtures::planted_two_clouds(50, 2, 2.5, 45);
  for (auto model : all_covariance_models) {
    const auto fit = fit_em(ds, 2, model, quick_config(2, 2));
    REQUIRE_THAT(fit.weights.sum(), Catch::Matchers::WithinAbs(1.0, 1e-9));
    REQUIRE(fit.weights.minCoeff() > 0.0);
  }
}

TEST_CASE("select_bic prefers one component for a single cloud") {
  const auto ds = fixtures::single_cloud(120, 2, 46);
  const auto fit = select_bic(ds, quick_config(1, 3));
  REQUIRE(fit.G == 1);
}

TEST_CASE("select_bic finds the planted two clusters") {
  Partition truth;
  const auto ds = fixtures::planted_two_clouds(100, 2, 5.0, 47, &truth);
  const auto fit = select_bic(ds, quick_config(1, 5));
  REQUIRE(fit.G == 2);
  REQUIRE(adjusted_rand_index(harden(fit.assignment), truth) == 1.0);
}

TEST_CASE("select_bic is deterministic given the seed") {
  const auto ds = fixtures::planted_two_clouds(60, 3, 2.0, 48);
  const auto cfg = quick_config(1, 4, 99);
  const auto a = select_bic(ds, cfg);
  const auto b = select_bic(ds, cfg);
  REQUIRE(a.G == b.G);
  REQUIRE(a.model == b.model);
  REQUIRE(a.loglik == b.loglik);  // bit identical
  REQUIRE(a.bic == b.bic);
}

TEST_CASE("observation order only permutes the assignment rows") {
  Partition truth;
  const auto ds = fixtures::planted_two_clouds(60, 2, 5.0, 49, &truth);
  // reverse the rows
  Dataset reversed = ds;
  reversed.values = ds.values.colwise().reverse().eval();
  const auto cfg = quick_config(2, 2);
  const auto fit_a = fit_em(ds, 2, CovarianceModel::FullVarying, cfg);
  const auto fit_b = fit_em(reversed, 2, CovarianceModel::FullVarying, cfg);

  // same optimum up to component relabeling
  std::vector<int> order_a{0, 1}, order_b{0, 1};
  if (fit_a.means(0, 0) > fit_a.means(1, 0)) std::swap(order_a[0], order_a[1]);
  if (fit_b.means(0, 0) > fit_b.means(1, 0)) std::swap(order_b[0], order_b[1]);
  for (int k = 0; k < 2; ++k) {
    REQUIRE_THAT(fit_a.weights(order_a[k]),
                 Catch::Matchers::WithinAbs(fit_b.weights(order_b[k]), 1e-6));
    REQUIRE((fit_a.means.row(order_a[k]) - fit_b.means.row(order_b[k]))
                .cwiseAbs()
                .maxCoeff() < 1e-6);
  }
  REQUIRE_THAT(fit_a.loglik, Catch::Matchers::WithinAbs(fit_b.loglik, 1e-6));
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    for (int k = 0; k < 2; ++k)
      REQUIRE_THAT(fit_a.assignment.probs(i, order_a[k]),
                   Catch::Matchers::WithinAbs(
                       fit_b.assignment.probs(ds.n() - 1 - i, order_b[k]),
                       1e-6));
}

TEST_CASE("too few observations is rejected") {
  const auto ds = fixtures::single_cloud(3, 2, 50);
  REQUIRE_THROWS_MATCHES(
      fit_em(ds, 3, CovarianceModel::SphericalEqual, quick_config(3, 3)),
      Error,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("TooFewObservations")));
}

TEST_CASE("fully labeled classification is the per-group MLE") {
  Partition truth;
  const auto ds = fixtures::planted_two_clouds(30, 2, 3.0, 51, &truth);
  PartialPartition known{truth.labels, 2};
  auto cfg = quick_config(2, 2);
  cfg.models = {CovarianceModel::FullVarying};
  cfg.ridge = 0.0;  // exact MLE comparison
  const auto fit = fit_classification(ds, known, cfg);

  for (int g = 0; g < 2; ++g) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < truth.labels.size(); ++i)
      if (truth.labels[i] == g + 1) rows.push_back(static_cast<int>(i));
    Eigen::MatrixXd block(rows.size(), 2);
    for (std::size_t k = 0; k < rows.size(); ++k)
      block.row(static_cast<Eigen::Index>(k)) = ds.values.row(rows[k]);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    REQUIRE((fit.means.row(g) - mean).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd cov = mle_covariance(block);
    REQUIRE((fit.covariances[static_cast<std::size_t>(g)] - cov)
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    REQUIRE_THAT(fit.weights(g),
                 Catch::Matchers::WithinAbs(
                     static_cast<double>(rows.size()) / ds.n(), 1e-12));
  }
  // hard labels in, hard labels out
  REQUIRE(harden(fit.assignment).labels == truth.labels);
}

TEST_CASE("half-labeled planted data classifies the rest perfectly") {
  Partition truth;
  const auto ds = fixtures::planted_two_clouds(100, 2, 5.0, 52, &truth);
  PartialPartition known;
  known.group_count = 2;
  known.labels = truth.labels;
  for (std::size_t i = 0; i < known.labels.size(); i += 2) known.labels[i] = 0;

  const auto fit = fit_classification(ds, known, quick_config(2, 2));
  const auto hard = harden(fit.assignment);

  Partition est_unknown, truth_unknown;
  est_unknown.group_count = truth_unknown.group_count = 2;
  for (std::size_t i = 0; i < known.labels.size(); ++i) {
    if (known.labels[i] != 0) {
      // clamped rows stay clamped
      REQUIRE(fit.assignment.probs(static_cast<Eigen::Index>(i),
                                   known.labels[i] - 1) == 1.0);
      continue;
    }
    est_unknown.labels.push_back(hard.labels[i]);
    truth_unknown.labels.push_back(truth.labels[i]);
  }
  REQUIRE(adjusted_rand_index(est_unknown, truth_unknown) == 1.0);
}

TEST_CASE("a declared group without labels is rejected") {
  const auto ds = fixtures::planted_two_clouds(10, 2, 3.0, 53);
  PartialPartition known;
  known.group_count = 2;
  known.labels.assign(20, 0);
  for (std::size_t i = 0; i < 5; ++i) known.labels[i] = 1;  // group 2 empty
  REQUIRE_THROWS_MATCHES(
      fit_classification(ds, known, quick_config(2, 2)), Error,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("EmptyKnownGroup")));
}
