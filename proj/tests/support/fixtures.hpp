#pragma once

// Shared deterministic fixtures for the test suites.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/rng.hpp"

namespace fixtures {

// Two well-separated spherical clouds at -center and +center on every
// coordinate, unit variance, balanced. Separation is large enough that the
// Bayes error is far below 1/n.
inline vscc::Dataset planted_two_clouds(int n_per_group, int p, double center,
                                        std::uint64_t seed,
                                        vscc::Partition* truth = nullptr) {
  vscc::Rng rng(seed);
  const int n = 2 * n_per_group;
  Eigen::MatrixXd values(n, p);
  if (truth) {
    truth->group_count = 2;
    truth->labels.clear();
  }
  for (int i = 0; i < n; ++i) {
    const int g = i < n_per_group ? 0 : 1;
    const double mu = g == 0 ? -center : center;
    for (int j = 0; j < p; ++j) values(i, j) = mu + rng.normal();
    if (truth) truth->labels.push_back(g + 1);
  }
  std::vector<std::string> names;
  for (int j = 1; j <= p; ++j) names.push_back("V" + std::to_string(j));
  return vscc::Dataset{values, names};
}

// Two clouds separated on the first two variables only; remaining columns
// are pure standard-normal noise.
inline vscc::Dataset planted_signal_noise(int n_per_group, int p_noise,
                                          double center, std::uint64_t seed,
                                          vscc::Partition* truth = nullptr) {
  vscc::Rng rng(seed);
  const int n = 2 * n_per_group;
  const int p = 2 + p_noise;
  Eigen::MatrixXd values(n, p);
  if (truth) {
    truth->group_count = 2;
    truth->labels.clear();
  }
  for (int i = 0; i < n; ++i) {
    const int g = i < n_per_group ? 0 : 1;
    const double mu = g == 0 ? -center : center;
    for (int j = 0; j < 2; ++j) values(i, j) = mu + rng.normal();
    for (int j = 2; j < p; ++j) values(i, j) = rng.normal();
    if (truth) truth->labels.push_back(g + 1);
  }
  std::vector<std::string> names;
  for (int j = 1; j <= p; ++j) names.push_back("V" + std::to_string(j));
  return vscc::Dataset{values, names};
}

// One standard-normal cloud (no group structure).
inline vscc::Dataset single_cloud(int n, int p, std::uint64_t seed) {
  vscc::Rng rng(seed);
  Eigen::MatrixXd values(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) values(i, j) = rng.normal();
  std::vector<std::string> names;
  for (int j = 1; j <= p; ++j) names.push_back("V" + std::to_string(j));
  return vscc::Dataset{values, names};
}

}  // namespace fixtures
