#pragma once

#include <Eigen/Dense>

#include "cfee/problem.hpp"

namespace cfee {

/// Penalty weight of the QoS loss. The SE targets themselves are part of
/// ProblemData (they fix the thresholds a_k).
struct PenaltyParams {
  double xi = 0.0;
};

struct ObjectiveEval {
  double f_xi = 0.0;         ///< ee_term - xi * penalty_sum
  double ee_term = 0.0;      ///< B * u / v
  double penalty_sum = 0.0;  ///< sum_k max(0, g_k)^2
  double violation = 0.0;    ///< max_k max(0, g_k)
  double power_w = 0.0;      ///< v(theta)
  Eigen::VectorXd se;        ///< u_k
  Eigen::VectorXd g_values;
};

struct ObjectiveWithGradient {
  ObjectiveEval value;
  Eigen::VectorXd gradient;
};

/// QoS residuals g_k = a_k sqrt(d_k) - c_kk; g_k <= 0 iff u_k >= S_o,k.
Eigen::VectorXd eval_g(const ThetaVector& theta, const ProblemData& pd);

ObjectiveEval eval_objective(const ThetaVector& theta, const ProblemData& pd,
                             const PenaltyParams& pp);

Eigen::VectorXd grad_objective(const ThetaVector& theta, const ProblemData& pd,
                               const PenaltyParams& pp);

/// Value and gradient from one pass over the link statistics.
ObjectiveWithGradient evaluate(const ThetaVector& theta, const ProblemData& pd,
                               const PenaltyParams& pp);

/// Gradient of the power denominator v(theta).
Eigen::VectorXd grad_power(const ThetaVector& theta, const ProblemData& pd);

/// Gradient of a single QoS residual g_k.
Eigen::VectorXd grad_g(const ThetaVector& theta, const ProblemData& pd, int k);

struct LipschitzBound {
  double rate_part = 0.0;     ///< L1: grad(u) / v
  double power_part = 0.0;    ///< L2: u grad(v) / v^2
  double penalty_part = 0.0;  ///< L3: xi * sum_k grad(Psi_k)
  double total() const { return rate_part + power_part + penalty_part; }
};

/// Global Lipschitz constant of grad f_xi over the feasible set, assembled
/// from per-user bounds. Very conservative; meant as a certificate and as the
/// fixed-step fallback, not as a practical step size.
LipschitzBound conservative_lipschitz_bound(const ProblemData& pd, const PenaltyParams& pp);

}  // namespace cfee
