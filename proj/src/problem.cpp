#include "cfee/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace cfee {

PowerModel PowerModel::uniform(int M, double alpha, double p_tc, double p_0, double p_bt) {
  PowerModel pm;
  pm.alpha = Eigen::VectorXd::Constant(M, alpha);
  pm.p_tc = Eigen::VectorXd::Constant(M, p_tc);
  pm.p_0 = Eigen::VectorXd::Constant(M, p_0);
  pm.p_bt = Eigen::VectorXd::Constant(M, p_bt);
  return pm;
}

std::size_t ProblemData::stored_pair_count() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.size();
  return n;
}

ProblemData precompute(const Scenario& scenario, const PowerModel& power,
                       const Eigen::VectorXd& se_targets) {
  const auto& cfg = scenario.config;
  if (cfg.tau_p >= cfg.tau_c) throw std::invalid_argument("precompute: tau_p must be < tau_c");
  if (se_targets.size() != cfg.K) throw std::invalid_argument("precompute: need K SE targets");
  if ((se_targets.array() <= 0.0).any())
    throw std::invalid_argument("precompute: SE targets must be positive");
  if (power.alpha.size() != cfg.M || power.p_tc.size() != cfg.M || power.p_0.size() != cfg.M ||
      power.p_bt.size() != cfg.M)
    throw std::invalid_argument("precompute: power model must have M entries");
  if ((power.alpha.array() <= 0.0).any() || (power.alpha.array() > 1.0).any())
    throw std::invalid_argument("precompute: amplifier efficiency must lie in (0, 1]");

  ProblemData pd;
  pd.M = cfg.M;
  pd.K = cfg.K;
  pd.N = cfg.N;
  pd.tau_c = cfg.tau_c;
  pd.tau_p = cfg.tau_p;
  pd.bandwidth_hz = cfg.bandwidth_hz;
  pd.rho_d = scenario.rho_d;
  pd.noise_w = noise_power_w(cfg.bandwidth_hz, cfg.noise_figure_db);
  pd.prelog = static_cast<double>(cfg.tau_c - cfg.tau_p) / cfg.tau_c;
  pd.beta = scenario.beta;
  pd.gamma = scenario.gamma;
  pd.kappa = scenario.beta.array().sqrt();
  pd.pilot_of = scenario.pilot_of;
  pd.se_targets = se_targets;
  pd.power = power;

  pd.pairs.resize(pd.K);
  for (int k = 0; k < pd.K; ++k) {
    auto tilde = [&](int kp) {
      PilotPair pp;
      pp.interferer = kp;
      pp.coeff = pd.gamma.col(kp).array().sqrt() * pd.beta.col(k).array() /
                 pd.beta.col(kp).array();
      return pp;
    };
    pd.pairs[k].push_back(tilde(k));
    for (int kp = 0; kp < pd.K; ++kp) {
      if (kp != k && pd.pilot_of[kp] == pd.pilot_of[k]) pd.pairs[k].push_back(tilde(kp));
    }
  }

  const double N = pd.N;
  const double exponent = pd.tau_c / static_cast<double>(pd.tau_c - pd.tau_p);
  pd.a.resize(pd.K);
  for (int k = 0; k < pd.K; ++k) {
    pd.a[k] = std::sqrt((std::exp2(se_targets[k] * exponent) - 1.0) / (pd.rho_d * N * N));
  }
  pd.p_fix = (N * power.p_tc + power.p_0).sum();
  return pd;
}

ThetaVector eta_to_theta(const Eigen::MatrixXd& eta, const Eigen::MatrixXd& gamma) {
  if ((eta.array() < 0.0).any()) throw std::domain_error("eta_to_theta: negative eta");
  const int M = static_cast<int>(eta.rows());
  const int K = static_cast<int>(eta.cols());
  ThetaVector theta(static_cast<Eigen::Index>(M) * K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) theta[theta_index(m, k, K)] = std::sqrt(eta(m, k) * gamma(m, k));
  }
  return theta;
}

Eigen::MatrixXd theta_to_eta(const ThetaVector& theta, const Eigen::MatrixXd& gamma) {
  if ((theta.array() < 0.0).any()) throw std::domain_error("theta_to_eta: negative theta");
  const int M = static_cast<int>(gamma.rows());
  const int K = static_cast<int>(gamma.cols());
  Eigen::MatrixXd eta(M, K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const double t = theta[theta_index(m, k, K)];
      eta(m, k) = t * t / gamma(m, k);
    }
  }
  return eta;
}

LinkStatistics link_statistics(const ThetaVector& theta, const ProblemData& pd) {
  const int M = pd.M;
  const int K = pd.K;
  const double rho = pd.rho_d;
  const double N = pd.N;
  // View theta as K x M so that column m is AP m's block.
  Eigen::Map<const Eigen::MatrixXd> blocks(theta.data(), K, M);

  LinkStatistics ls;
  ls.block_power = blocks.colwise().squaredNorm().transpose();
  ls.c.resize(K);
  ls.coherent.resize(K);
  ls.pilot_interference.resize(K);
  ls.noncoherent = pd.beta.transpose() * ls.block_power;
  ls.signal.resize(K);
  ls.disturbance.resize(K);

  for (int k = 0; k < K; ++k) {
    const auto& pairs = pd.pairs[k];
    auto& ck = ls.c[k];
    ck.resize(pairs.size());
    double interference = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      ck[j] = pairs[j].coeff.dot(blocks.row(pairs[j].interferer).transpose());
      if (j > 0) interference += ck[j] * ck[j];
    }
    ls.coherent[k] = ck[0];
    ls.pilot_interference[k] = interference;
    ls.signal[k] = rho * N * N * ck[0] * ck[0];
    ls.disturbance[k] = rho * N * N * interference + rho * N * ls.noncoherent[k] + 1.0;
  }
  return ls;
}

Eigen::VectorXd se_per_user_theta(const ThetaVector& theta, const ProblemData& pd) {
  const auto ls = link_statistics(theta, pd);
  Eigen::VectorXd u(pd.K);
  for (int k = 0; k < pd.K; ++k) {
    u[k] = pd.prelog * std::log2(1.0 + ls.signal[k] / ls.disturbance[k]);
  }
  return u;
}

Eigen::VectorXd se_per_user_eta(const Eigen::MatrixXd& eta, const Scenario& scenario) {
  const auto& cfg = scenario.config;
  const int M = cfg.M;
  const int K = cfg.K;
  const double N = cfg.N;
  const double rho = scenario.rho_d;
  const auto& beta = scenario.beta;
  const auto& gamma = scenario.gamma;

  Eigen::VectorXd se(K);
  for (int k = 0; k < K; ++k) {
    double desired = 0.0;
    double coherent_interf = 0.0;
    double beamforming_uncertainty = 0.0;
    for (int kp = 0; kp < K; ++kp) {
      const double corr = scenario.pilot_of[kp] == scenario.pilot_of[k] ? 1.0 : 0.0;
      // gamma-bar_{k'k}^T eta-bar_{k'}
      double gbar_eta = 0.0;
      // ||kappa_{k'k} o eta-bar_{k'}||^2
      double kappa_eta = 0.0;
      for (int m = 0; m < M; ++m) {
        gbar_eta += corr * gamma(m, kp) * beta(m, k) / beta(m, kp) * std::sqrt(eta(m, kp));
        kappa_eta += gamma(m, kp) * beta(m, k) * eta(m, kp);
      }
      if (kp == k) {
        desired = gbar_eta * gbar_eta;
      } else {
        coherent_interf += gbar_eta * gbar_eta;
      }
      beamforming_uncertainty += kappa_eta;
    }
    const double sinr = rho * N * N * desired /
                        (rho * N * N * coherent_interf + rho * N * beamforming_uncertainty + 1.0);
    se[k] = (cfg.tau_c - cfg.tau_p) / static_cast<double>(cfg.tau_c) * std::log2(1.0 + sinr);
  }
  return se;
}

double total_power_w(const ThetaVector& theta, const ProblemData& pd, bool include_traffic) {
  Eigen::Map<const Eigen::MatrixXd> blocks(theta.data(), pd.K, pd.M);
  const Eigen::VectorXd block_power = blocks.colwise().squaredNorm().transpose();
  double v = pd.p_fix + pd.rho_d * pd.noise_w * pd.N *
                            (block_power.array() / pd.power.alpha.array()).sum();
  if (include_traffic) {
    const double rate = pd.bandwidth_hz * se_per_user_theta(theta, pd).sum();
    v += rate * pd.power.p_bt.sum();
  }
  return v;
}

double energy_efficiency(const ThetaVector& theta, const ProblemData& pd) {
  return pd.bandwidth_hz * se_per_user_theta(theta, pd).sum() / total_power_w(theta, pd);
}

}  // namespace cfee
