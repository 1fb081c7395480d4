#include "cfee/objective.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace cfee {

namespace {

ObjectiveEval assemble_value(const LinkStatistics& ls, const ProblemData& pd,
                             const PenaltyParams& pp) {
  ObjectiveEval e;
  e.se.resize(pd.K);
  e.g_values.resize(pd.K);
  for (int k = 0; k < pd.K; ++k) {
    e.se[k] = pd.prelog * std::log2(1.0 + ls.signal[k] / ls.disturbance[k]);
    e.g_values[k] = pd.a[k] * std::sqrt(ls.disturbance[k]) - ls.coherent[k];
    const double gp = std::max(0.0, e.g_values[k]);
    e.penalty_sum += gp * gp;
    e.violation = std::max(e.violation, gp);
  }
  e.power_w = pd.p_fix + pd.rho_d * pd.noise_w * pd.N *
                             (ls.block_power.array() / pd.power.alpha.array()).sum();
  assert(e.power_w >= pd.p_fix);
  e.ee_term = pd.bandwidth_hz * e.se.sum() / e.power_w;
  e.f_xi = e.ee_term - pp.xi * e.penalty_sum;
  return e;
}

}  // namespace

Eigen::VectorXd eval_g(const ThetaVector& theta, const ProblemData& pd) {
  const auto ls = link_statistics(theta, pd);
  Eigen::VectorXd g(pd.K);
  for (int k = 0; k < pd.K; ++k) {
    g[k] = pd.a[k] * std::sqrt(ls.disturbance[k]) - ls.coherent[k];
  }
  return g;
}

ObjectiveEval eval_objective(const ThetaVector& theta, const ProblemData& pd,
                             const PenaltyParams& pp) {
  return assemble_value(link_statistics(theta, pd), pd, pp);
}

Eigen::VectorXd grad_objective(const ThetaVector& theta, const ProblemData& pd,
                               const PenaltyParams& pp) {
  return evaluate(theta, pd, pp).gradient;
}

// The gradient is assembled through the chain rule on the link scalars:
// every A_{k'}^T gamma-tilde gamma-tilde^T A_{k'} theta product is a scatter of
// the scalar c_{k'k} times gamma-tilde_{k'k}, and every A^T B_k A theta product
// collapses into a per-AP scale of theta_m because it only involves
// ||theta_m||^2. Cost is O(M * stored pairs + M K).
ObjectiveWithGradient evaluate(const ThetaVector& theta, const ProblemData& pd,
                               const PenaltyParams& pp) {
  const auto ls = link_statistics(theta, pd);
  ObjectiveWithGradient out;
  out.value = assemble_value(ls, pd, pp);
  const auto& e = out.value;

  const double rho = pd.rho_d;
  const double N = pd.N;
  const double B = pd.bandwidth_hz;
  const double v = e.power_w;
  const double u = e.se.sum();
  const double dF_du = B / v;
  const double dF_dv = -B * u / (v * v);
  const double inv_ln2 = 1.0 / std::numbers::ln2;

  out.gradient = Eigen::VectorXd::Zero(theta.size());
  Eigen::Map<Eigen::MatrixXd> grad(out.gradient.data(), pd.K, pd.M);
  Eigen::Map<const Eigen::MatrixXd> blocks(theta.data(), pd.K, pd.M);

  // Weight on d_k (through the noncoherent term) collected per user.
  Eigen::VectorXd lambda_d(pd.K);
  for (int k = 0; k < pd.K; ++k) {
    const double n = ls.signal[k];
    const double d = ls.disturbance[k];
    const double du_dn = pd.prelog * inv_ln2 / (n + d);
    const double du_dd = -pd.prelog * inv_ln2 * n / (d * (n + d));
    const double gp = std::max(0.0, e.g_values[k]);
    // dF/dg_k = -2 xi max(0, g_k); dg/dd = a / (2 sqrt(d)); dg/dc_kk = -1.
    const double dF_dg = -2.0 * pp.xi * gp;
    const double lam_n = dF_du * du_dn;
    const double lam_d = dF_du * du_dd + dF_dg * pd.a[k] / (2.0 * std::sqrt(d));
    lambda_d[k] = lam_d;

    const auto& pairs = pd.pairs[k];
    const auto& c = ls.c[k];
    const double w_self = lam_n * 2.0 * rho * N * N * c[0] - dF_dg;
    grad.row(k) += w_self * pairs[0].coeff.transpose();
    for (std::size_t j = 1; j < pairs.size(); ++j) {
      const double w = lam_d * 2.0 * rho * N * N * c[j];
      grad.row(pairs[j].interferer) += w * pairs[j].coeff.transpose();
    }
  }

  // d(noncoherent_k)/d theta_mj = 2 beta_mk theta_mj and dv/d theta_mj =
  // 2 rho N0 N theta_mj / alpha_m: both are per-AP scalings of theta_m.
  const Eigen::VectorXd ap_scale =
      2.0 * rho * N * (pd.beta * lambda_d) +
      (dF_dv * 2.0 * rho * pd.noise_w * N) * pd.power.alpha.cwiseInverse();
  grad += blocks * ap_scale.asDiagonal();
  return out;
}

Eigen::VectorXd grad_power(const ThetaVector& theta, const ProblemData& pd) {
  Eigen::VectorXd g(theta.size());
  for (int m = 0; m < pd.M; ++m) {
    g.segment(m * pd.K, pd.K) =
        (2.0 * pd.rho_d * pd.noise_w * pd.N / pd.power.alpha[m]) * theta.segment(m * pd.K, pd.K);
  }
  return g;
}

Eigen::VectorXd grad_g(const ThetaVector& theta, const ProblemData& pd, int k) {
  const auto ls = link_statistics(theta, pd);
  const double rho = pd.rho_d;
  const double N = pd.N;
  const double d = ls.disturbance[k];
  const double scale = pd.a[k] / (2.0 * std::sqrt(d));

  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  Eigen::Map<Eigen::MatrixXd> grad(g.data(), pd.K, pd.M);
  Eigen::Map<const Eigen::MatrixXd> blocks(theta.data(), pd.K, pd.M);
  const auto& pairs = pd.pairs[k];
  grad.row(k) -= pairs[0].coeff.transpose();
  for (std::size_t j = 1; j < pairs.size(); ++j) {
    grad.row(pairs[j].interferer) +=
        scale * 2.0 * rho * N * N * ls.c[k][j] * pairs[j].coeff.transpose();
  }
  grad += blocks * (scale * 2.0 * rho * N * pd.beta.col(k)).asDiagonal();
  return g;
}

}  // namespace cfee
