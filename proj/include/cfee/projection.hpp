#pragma once

#include <Eigen/Dense>

#include "cfee/problem.hpp"

namespace cfee {

/// Per-AP power balls of radius sqrt(1/N) intersected with the nonnegative
/// orthant.
struct FeasibleSetSpec {
  int M = 0;
  int K = 0;
  int N = 1;

  double radius() const;
  static FeasibleSetSpec of(const ProblemData& pd) { return {pd.M, pd.K, pd.N}; }
};

/// Euclidean projection, block by block: clamp negatives, then rescale onto
/// the ball iff the clamped norm exceeds the radius.
ThetaVector project(const Eigen::VectorXd& u, const FeasibleSetSpec& spec);

struct FeasibilityReport {
  bool feasible = true;
  int worst_block = 0;  ///< AP with the largest violation
  /// max over m of max(||theta_m||^2 - 1/N, -min_k theta_mk); negative when
  /// strictly interior.
  double worst_violation = 0.0;
  double min_entry = 0.0;
};

FeasibilityReport is_feasible(const ThetaVector& theta, const FeasibleSetSpec& spec,
                              double tol = 1e-12);

}  // namespace cfee
