#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfee/problem.hpp"
#include "cfee/scenario.hpp"

namespace cfee::oracle {

struct OracleReport {
  std::string quantity;
  double reference = 0.0;
  double candidate = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool relative = true;  ///< which error the tolerance applies to
  bool pass = false;
};

OracleReport compare(std::string quantity, double reference, double candidate, double tolerance,
                     bool relative = true);

/// Render as one aligned log line.
std::string to_string(const OracleReport& r);

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Central differences with h_i = h_rel (1 + |x_i|). When x_i < h_i and
/// nonnegative_domain is set the step is clamped to x_i, and a forward
/// difference is used at x_i = 0.
Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& x,
                            double h_rel = 1e-6, bool nonnegative_domain = true);

/// Dense transcription of the penalized EE problem built straight from the
/// scenario statistics. Shares no evaluation code with the library: the
/// pilot-contamination tensor is materialized in full and every sum is
/// written out in (m, k) coordinates.
class ReferenceModel {
 public:
  ReferenceModel(const Scenario& scenario, const PowerModel& power,
                 const Eigen::VectorXd& se_targets);

  int M() const { return M_; }
  int K() const { return K_; }
  int N() const { return N_; }
  double radius() const;

  Eigen::VectorXd se(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd residuals(const Eigen::VectorXd& theta) const;  ///< g_k
  double power_w(const Eigen::VectorXd& theta) const;
  double ee(const Eigen::VectorXd& theta) const;
  double penalized(const Eigen::VectorXd& theta, double xi) const;

 private:
  double theta_at(const Eigen::VectorXd& theta, int m, int k) const { return theta[m * K_ + k]; }

  int M_, K_, N_;
  double rho_, prelog_, bandwidth_, p_down_, p_fix_;
  Eigen::MatrixXd beta_;
  Eigen::VectorXd inv_alpha_, a_;
  // tg_[(k * K + kp) * M + m]: coherent gain of user kp's signal at user k.
  std::vector<double> tg_;
};

/// Nearest point of a per-AP uniform lattice (spacing `resolution`) inside
/// the ball of radius sqrt(1/N) intersected with the orthant. Block size K
/// must be at most 3; throws std::invalid_argument otherwise. Ties go to the
/// lexicographically smallest lattice index.
Eigen::VectorXd grid_project(const Eigen::VectorXd& u, int M, int K, int N, double resolution);

struct GridOptimum {
  Eigen::VectorXd theta;
  double value = 0.0;
  long long evaluated = 0;  ///< lattice points passing the filter
};

/// Exhaustive maximization of `objective` over the lattice of the feasible
/// set (M K <= 3). Points where `accept` returns false are skipped. Ties go
/// to the first lattice point in enumeration order.
GridOptimum grid_maximize(const ScalarFunction& objective, int M, int K, int N, double resolution,
                          const std::function<bool(const Eigen::VectorXd&)>& accept = {});

}  // namespace cfee::oracle
