#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace cfee {

/// Planar position in kilometres.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Seedable random stream. Uniform and Gaussian variates are derived from the
/// raw 64-bit engine output by hand so realizations are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal (Box-Muller, no cached second variate).
  double normal();
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Stateless 64-bit mixer used to derive independent seeds from
/// (master seed, sweep point, realization).
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

struct ScenarioConfig {
  int M = 100;                 ///< access points
  int K = 40;                  ///< users
  int N = 1;                   ///< antennas per AP
  double area_side_km = 1.0;   ///< square side D
  double d0_km = 0.01;         ///< three-slope breakpoints
  double d1_km = 0.05;
  double L_db = 140.7;
  double sigma_sh_db = 8.0;
  int tau_c = 200;
  int tau_p = 40;
  double bandwidth_hz = 20e6;
  double p_down_w = 1.0;
  double p_pilot_w = 0.2;
  double noise_figure_db = 9.0;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// One network realization and its large-scale statistics. Matrices are M x K.
struct Scenario {
  ScenarioConfig config;
  std::vector<Point> ap_xy;
  std::vector<Point> user_xy;
  Eigen::MatrixXd beta;
  Eigen::MatrixXd gamma;
  std::vector<int> pilot_of;
  double rho_d = 0.0;
  double rho_p = 0.0;
};

struct Placement {
  std::vector<Point> ap_xy;
  std::vector<Point> user_xy;
};

inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kNoiseTemperatureK = 290.0;

/// APs first, then users; each point consumes two uniforms (x then y).
Placement place_nodes(const ScenarioConfig& config, Rng& rng);

/// Distance on the torus [0, D)^2 (wrap-around topology).
double wrapped_distance(const Point& a, const Point& b, double side_km);

/// Three-slope path loss in dB, distance in km. Throws std::domain_error for
/// d <= 0.
double path_loss_db(double d_km, const ScenarioConfig& config);

/// beta_mk = 10^((PL + sigma_sh * z) / 10). One normal draw is consumed per
/// (m, k) in column-major order; shadowing only applies beyond d1.
Eigen::MatrixXd compute_beta(const ScenarioConfig& config,
                             const Eigen::MatrixXd& distances_km, Rng& rng);

/// Orthogonal pilots when tau_p >= K (random permutation), otherwise
/// round-robin over a random user order.
std::vector<int> assign_pilots(int K, int tau_p, Rng& rng);

/// MMSE estimate quality with binary pilot correlation.
Eigen::MatrixXd compute_gamma(int tau_p, double rho_p,
                              const Eigen::MatrixXd& beta,
                              const std::vector<int>& pilot_of);

double noise_power_w(double bandwidth_hz, double noise_figure_db);

/// Full pipeline: placement, distances, beta, pilots, gamma.
Scenario generate_scenario(const ScenarioConfig& config);

}  // namespace cfee
