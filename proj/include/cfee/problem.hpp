#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cfee/scenario.hpp"

namespace cfee {

/// Decision variable theta_mk = sqrt(eta_mk * gamma_mk), stacked per AP:
/// entry (m, k) lives at m * K + k, so AP m owns the contiguous block
/// segment(m * K, K).
using ThetaVector = Eigen::VectorXd;

inline Eigen::Index theta_index(int m, int k, int K) {
  return static_cast<Eigen::Index>(m) * K + k;
}

/// Per-AP hardware and backhaul power parameters.
struct PowerModel {
  Eigen::VectorXd alpha;  ///< amplifier efficiency
  Eigen::VectorXd p_tc;   ///< circuit power per antenna (W)
  Eigen::VectorXd p_0;    ///< fixed backhaul power (W)
  Eigen::VectorXd p_bt;   ///< traffic-dependent backhaul power (W per bit/s)

  static PowerModel uniform(int M, double alpha = 0.4, double p_tc = 0.2,
                            double p_0 = 0.825, double p_bt = 0.25e-9);
};

/// gamma-tilde_{k'k}: the coherent-interference coefficients a user k
/// receives from a user k' sharing its pilot.
struct PilotPair {
  int interferer = 0;
  Eigen::VectorXd coeff;  ///< length M
};

/// Immutable coefficient set of the theta-form problem.
struct ProblemData {
  int M = 0;
  int K = 0;
  int N = 0;
  int tau_c = 0;
  int tau_p = 0;
  double bandwidth_hz = 0.0;
  double rho_d = 0.0;
  double noise_w = 0.0;
  double prelog = 0.0;  ///< (tau_c - tau_p) / tau_c

  /// pairs[k] lists every k' sharing user k's pilot; pairs[k][0] is k itself.
  std::vector<std::vector<PilotPair>> pairs;
  Eigen::MatrixXd beta;   ///< M x K, diagonal entries of B_k
  Eigen::MatrixXd gamma;  ///< M x K
  Eigen::MatrixXd kappa;  ///< M x K, sqrt(beta)
  std::vector<int> pilot_of;

  Eigen::VectorXd se_targets;  ///< S_o per user (bit/s/Hz)
  Eigen::VectorXd a;           ///< QoS thresholds
  PowerModel power;
  double p_fix = 0.0;  ///< sum_m (N p_tc + p_0)

  std::size_t stored_pair_count() const;
};

/// Throws std::invalid_argument on tau_p >= tau_c, non-positive targets or a
/// power model of the wrong size.
ProblemData precompute(const Scenario& scenario, const PowerModel& power,
                       const Eigen::VectorXd& se_targets);

ThetaVector eta_to_theta(const Eigen::MatrixXd& eta, const Eigen::MatrixXd& gamma);
Eigen::MatrixXd theta_to_eta(const ThetaVector& theta, const Eigen::MatrixXd& gamma);

/// Scalars every SE, penalty and gradient evaluation is built from.
/// c[k][j] = gamma-tilde_{k'k}^T A_{k'} theta for k' = pairs[k][j].interferer.
struct LinkStatistics {
  Eigen::VectorXd block_power;            ///< ||theta_m||^2
  std::vector<std::vector<double>> c;
  Eigen::VectorXd coherent;               ///< c_kk
  Eigen::VectorXd pilot_interference;     ///< sum_{k' != k} c_{k'k}^2
  Eigen::VectorXd noncoherent;            ///< sum_{k'} ||kappa_k o A_{k'} theta||^2
  Eigen::VectorXd signal;                 ///< n_k
  Eigen::VectorXd disturbance;            ///< d_k (includes the +1 noise term)
};

LinkStatistics link_statistics(const ThetaVector& theta, const ProblemData& pd);

Eigen::VectorXd se_per_user_theta(const ThetaVector& theta, const ProblemData& pd);

/// Closed-form SE evaluated directly in eta coordinates from the scenario's
/// beta and gamma. Shares no code with se_per_user_theta.
Eigen::VectorXd se_per_user_eta(const Eigen::MatrixXd& eta, const Scenario& scenario);

/// Denominator v(theta); with include_traffic the load-dependent backhaul
/// power is added (reporting only, never optimized).
double total_power_w(const ThetaVector& theta, const ProblemData& pd,
                     bool include_traffic = false);

/// B * sum_k u_k / v (bit/Joule).
double energy_efficiency(const ThetaVector& theta, const ProblemData& pd);

}  // namespace cfee
