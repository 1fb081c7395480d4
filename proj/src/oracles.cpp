#include "cfee/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cfee::oracle {

OracleReport compare(std::string quantity, double reference, double candidate, double tolerance,
                     bool relative) {
  OracleReport r;
  r.quantity = std::move(quantity);
  r.reference = reference;
  r.candidate = candidate;
  r.abs_error = std::abs(candidate - reference);
  r.rel_error = reference != 0.0 ? r.abs_error / std::abs(reference) : r.abs_error;
  r.tolerance = tolerance;
  r.relative = relative;
  r.pass = (relative ? r.rel_error : r.abs_error) <= tolerance;
  return r;
}

std::string to_string(const OracleReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << (r.pass ? "PASS " : "FAIL ") << r.quantity << "  ref=" << r.reference
     << " got=" << r.candidate << " " << (r.relative ? "rel" : "abs") << "_err="
     << (r.relative ? r.rel_error : r.abs_error) << " tol=" << r.tolerance;
  return os.str();
}

Eigen::VectorXd fd_gradient(const ScalarFunction& f, const Eigen::VectorXd& x, double h_rel,
                            bool nonnegative_domain) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = h_rel * (1.0 + std::abs(x[i]));
    const double xi = x[i];
    if (nonnegative_domain && xi <= 0.0) {
      p[i] = xi + h;
      const double fp = f(p);
      p[i] = xi;
      g[i] = (fp - f(p)) / h;
      continue;
    }
    if (nonnegative_domain) h = std::min(h, xi);
    p[i] = xi + h;
    const double fp = f(p);
    p[i] = xi - h;
    const double fm = f(p);
    p[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

ReferenceModel::ReferenceModel(const Scenario& scenario, const PowerModel& power,
                               const Eigen::VectorXd& se_targets) {
  const auto& c = scenario.config;
  M_ = c.M;
  K_ = c.K;
  N_ = c.N;
  rho_ = scenario.rho_d;
  prelog_ = 1.0 - static_cast<double>(c.tau_p) / c.tau_c;
  bandwidth_ = c.bandwidth_hz;
  // rho_d * N0 is the radiated power per AP.
  p_down_ = c.p_down_w;
  p_fix_ = 0.0;
  for (int m = 0; m < M_; ++m) p_fix_ += N_ * power.p_tc[m] + power.p_0[m];
  beta_ = scenario.beta;
  inv_alpha_ = power.alpha.cwiseInverse();

  a_.resize(K_);
  for (int k = 0; k < K_; ++k) {
    const double sinr_min = std::pow(2.0, se_targets[k] / prelog_) - 1.0;
    a_[k] = std::sqrt(sinr_min / (rho_ * N_ * N_));
  }

  tg_.assign(static_cast<std::size_t>(K_) * K_ * M_, 0.0);
  for (int k = 0; k < K_; ++k) {
    for (int kp = 0; kp < K_; ++kp) {
      if (scenario.pilot_of[k] != scenario.pilot_of[kp]) continue;
      for (int m = 0; m < M_; ++m) {
        tg_[(static_cast<std::size_t>(k) * K_ + kp) * M_ + m] =
            std::sqrt(scenario.gamma(m, kp)) * scenario.beta(m, k) / scenario.beta(m, kp);
      }
    }
  }
}

double ReferenceModel::radius() const { return std::sqrt(1.0 / N_); }

Eigen::VectorXd ReferenceModel::se(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd out(K_);
  for (int k = 0; k < K_; ++k) {
    double desired = 0.0;
    double interference = 0.0;
    for (int kp = 0; kp < K_; ++kp) {
      double coherent = 0.0;
      for (int m = 0; m < M_; ++m) {
        coherent += tg_[(static_cast<std::size_t>(k) * K_ + kp) * M_ + m] * theta_at(theta, m, kp);
      }
      if (kp == k) {
        desired = coherent * coherent;
      } else {
        interference += coherent * coherent;
      }
    }
    double leakage = 0.0;
    for (int m = 0; m < M_; ++m) {
      for (int kp = 0; kp < K_; ++kp) leakage += beta_(m, k) * theta_at(theta, m, kp) * theta_at(theta, m, kp);
    }
    const double n2 = static_cast<double>(N_) * N_;
    const double sinr = rho_ * n2 * desired / (rho_ * n2 * interference + rho_ * N_ * leakage + 1.0);
    out[k] = prelog_ * std::log(1.0 + sinr) / std::log(2.0);
  }
  return out;
}

Eigen::VectorXd ReferenceModel::residuals(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g(K_);
  const double n2 = static_cast<double>(N_) * N_;
  for (int k = 0; k < K_; ++k) {
    double own = 0.0;
    double interference = 0.0;
    for (int kp = 0; kp < K_; ++kp) {
      double coherent = 0.0;
      for (int m = 0; m < M_; ++m) {
        coherent += tg_[(static_cast<std::size_t>(k) * K_ + kp) * M_ + m] * theta_at(theta, m, kp);
      }
      if (kp == k) {
        own = coherent;
      } else {
        interference += coherent * coherent;
      }
    }
    double leakage = 0.0;
    for (int m = 0; m < M_; ++m) {
      for (int kp = 0; kp < K_; ++kp) leakage += beta_(m, k) * theta_at(theta, m, kp) * theta_at(theta, m, kp);
    }
    g[k] = a_[k] * std::sqrt(rho_ * n2 * interference + rho_ * N_ * leakage + 1.0) - own;
  }
  return g;
}

double ReferenceModel::power_w(const Eigen::VectorXd& theta) const {
  double radiated = 0.0;
  for (int m = 0; m < M_; ++m) {
    double block = 0.0;
    for (int k = 0; k < K_; ++k) block += theta_at(theta, m, k) * theta_at(theta, m, k);
    radiated += block * inv_alpha_[m];
  }
  return p_fix_ + p_down_ * N_ * radiated;
}

double ReferenceModel::ee(const Eigen::VectorXd& theta) const {
  return bandwidth_ * se(theta).sum() / power_w(theta);
}

double ReferenceModel::penalized(const Eigen::VectorXd& theta, double xi) const {
  double penalty = 0.0;
  const auto g = residuals(theta);
  for (int k = 0; k < K_; ++k) {
    const double v = std::max(0.0, g[k]);
    penalty += v * v;
  }
  return ee(theta) - xi * penalty;
}

namespace {

// Lattice coordinates are exact multiples i * res; the squared-radius test
// carries a relative slack so that boundary lattice points are kept.
bool inside(double sq, double r2) { return sq <= r2 * (1.0 + 1e-12); }

int lattice_max(double r, double res) {
  int n = static_cast<int>(std::floor(r / res + 1e-9));
  while (n > 0 && !inside((n * res) * (n * res), r * r)) --n;
  return n;
}

// Nearest lattice index in [0, n] to the scalar target.
int nearest_index(double target, double res, int n) {
  const double idx = std::round(target / res);
  return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(n)));
}

Eigen::VectorXd project_block(const Eigen::VectorXd& u, double r, double res) {
  const int K = static_cast<int>(u.size());
  const double r2 = r * r;
  const int n = lattice_max(r, res);
  Eigen::VectorXd best = Eigen::VectorXd::Zero(K);
  double best_d = std::numeric_limits<double>::infinity();
  if (K == 1) {
    best[0] = nearest_index(u[0], res, n) * res;
    return best;
  }
  if (K == 2) {
    for (int i = 0; i <= n; ++i) {
      const double x = i * res;
      const double rest = r2 - x * x;
      const int nj = rest <= 0.0 ? 0 : lattice_max(std::sqrt(rest), res);
      if (!inside(x * x, r2)) break;
      const int j = nearest_index(u[1], res, nj);
      const double y = j * res;
      const double d = (x - u[0]) * (x - u[0]) + (y - u[1]) * (y - u[1]);
      if (d < best_d) {
        best_d = d;
        best << x, y;
      }
    }
    return best;
  }
  for (int i = 0; i <= n; ++i) {
    const double x = i * res;
    if (!inside(x * x, r2)) break;
    for (int j = 0; j <= n; ++j) {
      const double y = j * res;
      const double rest = r2 - x * x - y * y;
      if (!inside(x * x + y * y, r2)) break;
      const int nl = rest <= 0.0 ? 0 : lattice_max(std::sqrt(rest), res);
      const int l = nearest_index(u[2], res, nl);
      const double z = l * res;
      const double d = (x - u[0]) * (x - u[0]) + (y - u[1]) * (y - u[1]) + (z - u[2]) * (z - u[2]);
      if (d < best_d) {
        best_d = d;
        best << x, y, z;
      }
    }
  }
  return best;
}

}  // namespace

Eigen::VectorXd grid_project(const Eigen::VectorXd& u, int M, int K, int N, double resolution) {
  if (K < 1 || K > 3) throw std::invalid_argument("grid_project: block size must be 1, 2 or 3");
  if (M < 1 || N < 1 || !(resolution > 0.0)) throw std::invalid_argument("grid_project: bad sizes");
  if (u.size() != static_cast<Eigen::Index>(M) * K)
    throw std::invalid_argument("grid_project: size mismatch");
  const double r = std::sqrt(1.0 / N);
  Eigen::VectorXd out(u.size());
  for (int m = 0; m < M; ++m) out.segment(m * K, K) = project_block(u.segment(m * K, K), r, resolution);
  return out;
}

namespace {

// All lattice points of one block, in lexicographic order.
std::vector<Eigen::VectorXd> block_lattice(int K, double r, double res) {
  std::vector<Eigen::VectorXd> pts;
  const double r2 = r * r;
  const int n = lattice_max(r, res);
  Eigen::VectorXd p(K);
  std::function<void(int, double)> rec = [&](int dim, double used) {
    if (dim == K) {
      pts.push_back(p);
      return;
    }
    for (int i = 0; i <= n; ++i) {
      const double x = i * res;
      if (!inside(used + x * x, r2)) break;
      p[dim] = x;
      rec(dim + 1, used + x * x);
    }
  };
  rec(0, 0.0);
  return pts;
}

}  // namespace

GridOptimum grid_maximize(const ScalarFunction& objective, int M, int K, int N, double resolution,
                          const std::function<bool(const Eigen::VectorXd&)>& accept) {
  if (M < 1 || K < 1 || M * K > 3) throw std::invalid_argument("grid_maximize: need M K <= 3");
  if (N < 1 || !(resolution > 0.0)) throw std::invalid_argument("grid_maximize: bad sizes");
  const auto lattice = block_lattice(K, std::sqrt(1.0 / N), resolution);
  const auto count = static_cast<long long>(lattice.size());

  GridOptimum best;
  best.value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta(M * K);
  std::vector<long long> idx(M, 0);
  long long total = 1;
  for (int m = 0; m < M; ++m) total *= count;
  for (long long flat = 0; flat < total; ++flat) {
    long long rem = flat;
    for (int m = M - 1; m >= 0; --m) {
      theta.segment(m * K, K) = lattice[static_cast<std::size_t>(rem % count)];
      rem /= count;
    }
    if (accept && !accept(theta)) continue;
    ++best.evaluated;
    const double v = objective(theta);
    if (v > best.value) {
      best.value = v;
      best.theta = theta;
    }
  }
  return best;
}

}  // namespace cfee::oracle
