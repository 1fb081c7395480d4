// Conservative Lipschitz constant of grad f_xi over the feasible set.
//
// The bound is built bottom-up from four composition rules, each applied on
// the feasible set where ||theta|| <= R = sqrt(M / N):
//   sum:       Lip(f1 + f2)  <= L1 + L2
//   product:   Lip(f1 * f2)  <= sup|f1| L2 + sup||f2|| L1
//   quotient:  Lip(f1 / f2)  <= L1 / c + sup||f1|| L2 / c^2   (|f2| >= c)
//   gradient:  Lip(h)        <= sup||grad h||                 (convex domain)
// Per user k the building blocks are
//   n_k = rho N^2 c_kk^2                      grad n_k = C_n theta
//   d_k = rho N^2 sum_{k'!=k} c_{k'k}^2 + rho N sum_m beta_mk ||theta_m||^2 + 1
//                                            grad d_k = C_d theta
// where C_n is rank one with eigenvalue 2 rho N^2 ||gt_kk||^2 and C_d is block
// diagonal over k' with blocks 2 rho N^2 gt gt^T + 2 rho N diag(beta_.k), so
// lambda_max(C_d) <= 2 rho N^2 max_{k'!=k} ||gt_{k'k}||^2 + 2 rho N max_m beta_mk.
// On the feasible set c_{k'k}^2 <= ||gt_{k'k}||^2 R^2, which instantiates the
// upper bounds n_max and d_max.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfee/objective.hpp"

namespace cfee {

LipschitzBound conservative_lipschitz_bound(const ProblemData& pd, const PenaltyParams& pp) {
  const double rho = pd.rho_d;
  const double N = pd.N;
  const double R = std::sqrt(static_cast<double>(pd.M) / N);
  const double R2 = R * R;
  const double log_scale = pd.prelog / std::numbers::ln2;

  double sum_lip_grad_u = 0.0;    // sum_k Lip(grad u_k)
  double sum_bound_grad_u = 0.0;  // sum_k sup ||grad u_k||
  double sum_bound_u = 0.0;       // sum_k sup u_k
  double penalty = 0.0;

  for (int k = 0; k < pd.K; ++k) {
    const auto& pairs = pd.pairs[k];
    const double self_norm2 = pairs[0].coeff.squaredNorm();
    double cross_norm2_sum = 0.0;
    double cross_norm2_max = 0.0;
    for (std::size_t j = 1; j < pairs.size(); ++j) {
      const double s = pairs[j].coeff.squaredNorm();
      cross_norm2_sum += s;
      cross_norm2_max = std::max(cross_norm2_max, s);
    }
    const double beta_sum = pd.beta.col(k).sum();
    const double beta_max = pd.beta.col(k).maxCoeff();

    const double lam_n = 2.0 * rho * N * N * self_norm2;
    const double lam_d = 2.0 * rho * N * N * cross_norm2_max + 2.0 * rho * N * beta_max;
    const double n_max = rho * N * N * self_norm2 * R2;
    const double d_max = rho * N * N * cross_norm2_sum * R2 + rho * beta_sum + 1.0;
    const double lip_n = lam_n * R;
    const double lip_d = lam_d * R;

    // grad n / (n + d): quotient with denominator >= 1.
    const double lip_t1 = lam_n + lam_n * R * (lip_n + lip_d);
    // n grad d / ((n + d) d): product numerator, product denominator >= 1.
    const double num_bound = n_max * lam_d * R;
    const double num_lip = n_max * lam_d + lam_d * R * lip_n;
    const double den_lip = (n_max + d_max) * lip_d + d_max * (lip_n + lip_d);
    const double lip_t2 = num_lip + num_bound * den_lip;

    sum_lip_grad_u += log_scale * (lip_t1 + lip_t2);
    // n / (n + d) <= 1 and d >= 1 bound each term of grad u_k.
    sum_bound_grad_u += log_scale * (lam_n * R + lam_d * R);
    sum_bound_u += pd.prelog * std::log2(1.0 + n_max);

    // g_k = a sqrt(d) - c_kk and grad g_k = a grad d / (2 sqrt d) - A_k^T gt_kk.
    const double a = pd.a[k];
    const double g_bound = a * std::sqrt(d_max);
    const double grad_g_bound = a * lam_d * R / 2.0 + std::sqrt(self_norm2);
    const double lip_g = grad_g_bound;
    const double lip_grad_g = a * (lam_d / 2.0 + lam_d * R * lam_d * R / 4.0);
    // grad Psi_k = 2 max(0, g) grad g; max(0, .) is 1-Lipschitz.
    penalty += g_bound * lip_grad_g + grad_g_bound * lip_g;
  }

  // v = P_fix + rho N0 N sum_m ||theta_m||^2 / alpha_m.
  const double p_fix = pd.p_fix;
  const double lam_v = 2.0 * rho * pd.noise_w * N / pd.power.alpha.minCoeff();
  const double grad_v_bound = lam_v * R;
  const double lip_v = grad_v_bound;
  const double lip_grad_v = lam_v;
  const double v_bound = p_fix + rho * pd.noise_w * pd.power.alpha.cwiseInverse().sum();
  const double B = pd.bandwidth_hz;

  LipschitzBound L;
  // grad u / v with v >= P_fix.
  L.rate_part = B * (sum_lip_grad_u / p_fix + sum_bound_grad_u * lip_v / (p_fix * p_fix));
  // u grad v / v^2 with v^2 >= P_fix^2 and Lip(v^2) <= 2 sup(v) Lip(v).
  const double num_lip = sum_bound_u * lip_grad_v + grad_v_bound * sum_bound_grad_u;
  const double num_bound = sum_bound_u * grad_v_bound;
  const double p2 = p_fix * p_fix;
  L.power_part = B * (num_lip / p2 + num_bound * 2.0 * v_bound * lip_v / (p2 * p2));
  L.penalty_part = 2.0 * pp.xi * penalty;
  return L;
}

}  // namespace cfee
