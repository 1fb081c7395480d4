#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cfee/problem.hpp"
#include "cfee/projection.hpp"
#include "cfee/scenario.hpp"

namespace cfee::testing {

struct Instance {
  Scenario scenario;
  PowerModel power;
  Eigen::VectorXd targets;
  ProblemData pd;
};

inline Instance make_instance(int M, int K, int N, int tau_p, std::uint64_t seed,
                              double se_target = 1.0) {
  ScenarioConfig c;
  c.M = M;
  c.K = K;
  c.N = N;
  c.tau_p = tau_p;
  c.seed = seed;
  Instance in;
  in.scenario = generate_scenario(c);
  in.power = PowerModel::uniform(M);
  in.targets = Eigen::VectorXd::Constant(K, se_target);
  in.pd = precompute(in.scenario, in.power, in.targets);
  return in;
}

/// SE of each user when every AP serves that user alone at full power. No
/// power allocation gives user k more, so a target above entry k is out of reach.
inline Eigen::VectorXd lone_user_se(const ProblemData& pd) {
  Eigen::VectorXd se(pd.K);
  for (int k = 0; k < pd.K; ++k) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pd.M) * pd.K);
    for (int m = 0; m < pd.M; ++m) theta[static_cast<Eigen::Index>(m) * pd.K + k] = std::sqrt(1.0 / pd.N);
    se[k] = se_per_user_theta(theta, pd)[k];
  }
  return se;
}

/// First `count` seeds from `first` on whose instances every user could reach
/// `margin` times the target on its own.
inline std::vector<std::uint64_t> reachable_seeds(int M, int K, int N, int tau_p, double se_target,
                                                  int count, std::uint64_t first = 1,
                                                  double margin = 1.5) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t seed = first; static_cast<int>(seeds.size()) < count; ++seed) {
    const auto in = make_instance(M, K, N, tau_p, seed, se_target);
    if (lone_user_se(in.pd).minCoeff() >= margin * se_target) seeds.push_back(seed);
  }
  return seeds;
}

/// Strictly positive point with every block norm in [0.2 r, 0.95 r].
inline Eigen::VectorXd random_interior(int M, int K, int N, Rng& rng) {
  const double r = std::sqrt(1.0 / N);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(M) * K);
  for (int m = 0; m < M; ++m) {
    Eigen::VectorXd dir(K);
    for (int k = 0; k < K; ++k) dir[k] = 0.05 + rng.uniform();
    const double radius = r * (0.2 + 0.75 * rng.uniform());
    theta.segment(static_cast<Eigen::Index>(m) * K, K) = dir.normalized() * radius;
  }
  return theta;
}

inline Eigen::VectorXd random_interior(const ProblemData& pd, Rng& rng) {
  return random_interior(pd.M, pd.K, pd.N, rng);
}

inline Eigen::VectorXd random_normal(Eigen::Index n, double scale, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace cfee::testing
