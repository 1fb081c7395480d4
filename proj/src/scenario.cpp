#include "cfee/scenario.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cfee {

namespace {

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid scenario config: " + what);
}

}  // namespace

double Rng::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t Rng::index(std::size_t n) {
  // Rejection sampling keeps the result unbiased for any n.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % n);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(splitmix(master) ^ a) ^ b);
}

void ScenarioConfig::validate() const {
  require(M >= 1, "M must be >= 1");
  require(K >= 1, "K must be >= 1");
  require(N >= 1, "N must be >= 1");
  require(tau_p >= 1, "tau_p must be >= 1");
  require(tau_p < tau_c, "tau_p must be < tau_c");
  require(d0_km > 0.0 && d0_km < d1_km && d1_km < area_side_km,
          "need 0 < d0 < d1 < area side");
  require(sigma_sh_db >= 0.0, "sigma_sh_db must be >= 0");
  require(bandwidth_hz > 0.0 && p_down_w > 0.0 && p_pilot_w > 0.0,
          "bandwidth and powers must be positive");
}

Placement place_nodes(const ScenarioConfig& config, Rng& rng) {
  Placement p;
  const double D = config.area_side_km;
  auto draw = [&] {
    const double x = rng.uniform() * D;
    const double y = rng.uniform() * D;
    return Point{x, y};
  };
  p.ap_xy.reserve(config.M);
  p.user_xy.reserve(config.K);
  for (int m = 0; m < config.M; ++m) p.ap_xy.push_back(draw());
  for (int k = 0; k < config.K; ++k) p.user_xy.push_back(draw());
  return p;
}

double wrapped_distance(const Point& a, const Point& b, double side_km) {
  auto axis = [side_km](double u, double v) {
    const double d = std::abs(u - v);
    return std::min(d, side_km - d);
  };
  return std::hypot(axis(a.x, b.x), axis(a.y, b.y));
}

double path_loss_db(double d_km, const ScenarioConfig& config) {
  if (!(d_km > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  const double L = config.L_db;
  const double d0 = config.d0_km;
  const double d1 = config.d1_km;
  if (d_km > d1) return -L - 35.0 * std::log10(d_km);
  if (d_km > d0) return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d_km);
  return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
}

Eigen::MatrixXd compute_beta(const ScenarioConfig& config,
                             const Eigen::MatrixXd& distances_km, Rng& rng) {
  Eigen::MatrixXd beta(distances_km.rows(), distances_km.cols());
  for (Eigen::Index k = 0; k < distances_km.cols(); ++k) {
    for (Eigen::Index m = 0; m < distances_km.rows(); ++m) {
      const double d = distances_km(m, k);
      // Draw unconditionally so the stream does not depend on geometry.
      const double z = rng.normal();
      double db = path_loss_db(d, config);
      if (d > config.d1_km) db += config.sigma_sh_db * z;
      beta(m, k) = std::pow(10.0, db / 10.0);
    }
  }
  return beta;
}

std::vector<int> assign_pilots(int K, int tau_p, Rng& rng) {
  if (tau_p < 1) throw std::invalid_argument("assign_pilots: tau_p must be >= 1");
  std::vector<int> pilot_of(K);
  if (tau_p >= K) {
    std::vector<int> pilots(tau_p);
    std::iota(pilots.begin(), pilots.end(), 0);
    shuffle(pilots, rng);
    for (int k = 0; k < K; ++k) pilot_of[k] = pilots[k];
  } else {
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (int i = 0; i < K; ++i) pilot_of[order[i]] = i % tau_p;
  }
  return pilot_of;
}

Eigen::MatrixXd compute_gamma(int tau_p, double rho_p,
                              const Eigen::MatrixXd& beta,
                              const std::vector<int>& pilot_of) {
  const Eigen::Index M = beta.rows();
  const Eigen::Index K = beta.cols();
  const double tp = tau_p * rho_p;
  Eigen::MatrixXd gamma(M, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index m = 0; m < M; ++m) {
      double contaminated = 0.0;
      for (Eigen::Index kp = 0; kp < K; ++kp) {
        if (pilot_of[kp] == pilot_of[k]) contaminated += beta(m, kp);
      }
      gamma(m, k) = tp * beta(m, k) * beta(m, k) / (tp * contaminated + 1.0);
    }
  }
  return gamma;
}

double noise_power_w(double bandwidth_hz, double noise_figure_db) {
  return kBoltzmann * kNoiseTemperatureK * bandwidth_hz *
         std::pow(10.0, noise_figure_db / 10.0);
}

Scenario generate_scenario(const ScenarioConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Scenario s;
  s.config = config;
  auto placement = place_nodes(config, rng);
  s.ap_xy = std::move(placement.ap_xy);
  s.user_xy = std::move(placement.user_xy);

  Eigen::MatrixXd dist(config.M, config.K);
  for (int m = 0; m < config.M; ++m) {
    for (int k = 0; k < config.K; ++k) {
      // Co-located nodes would hit the log singularity; they fall in the
      // flat d <= d0 branch anyway.
      dist(m, k) = std::max(wrapped_distance(s.ap_xy[m], s.user_xy[k], config.area_side_km),
                            1e-9);
    }
  }
  s.beta = compute_beta(config, dist, rng);
  s.pilot_of = assign_pilots(config.K, config.tau_p, rng);

  const double n0 = noise_power_w(config.bandwidth_hz, config.noise_figure_db);
  s.rho_d = config.p_down_w / n0;
  s.rho_p = config.p_pilot_w / n0;
  s.gamma = compute_gamma(config.tau_p, s.rho_p, s.beta, s.pilot_of);
  return s;
}

}  // namespace cfee
