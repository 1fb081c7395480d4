#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cfee/scenario.hpp"

using namespace cfee;

TEST_SUITE("scenario") {

TEST_CASE("wrapped distance on the unit torus") {
  CHECK(wrapped_distance({0, 0}, {0, 0}, 1.0) == 0.0);
  CHECK(wrapped_distance({0.05, 0}, {0.95, 0}, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(wrapped_distance({0, 0}, {0.5, 0.5}, 1.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(wrapped_distance({0.2, 0.9}, {0.7, 0.1}, 1.0) ==
        doctest::Approx(wrapped_distance({0.7, 0.1}, {0.2, 0.9}, 1.0)));

  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Point a{rng.uniform(), rng.uniform()};
    const Point b{rng.uniform(), rng.uniform()};
    CHECK(wrapped_distance(a, b, 1.0) <= std::sqrt(0.5) + 1e-15);
  }
}

TEST_CASE("three-slope path loss") {
  const ScenarioConfig c;
  CHECK(path_loss_db(0.1, c) == doctest::Approx(-105.7).epsilon(1e-12));
  CHECK(path_loss_db(0.005, c) == doctest::Approx(-81.18455).epsilon(1e-6));
  // Both outer branches meet at d1 because 15 + 20 = 35.
  const double slope1 = -c.L_db - 35.0 * std::log10(c.d1_km);
  CHECK(path_loss_db(c.d1_km, c) == doctest::Approx(slope1).epsilon(1e-14));
  CHECK(path_loss_db(std::nextafter(c.d1_km, 1.0), c) == doctest::Approx(slope1).epsilon(1e-12));
  // Flat below d0.
  CHECK(path_loss_db(0.001, c) == path_loss_db(c.d0_km, c));
  CHECK_THROWS_AS(path_loss_db(0.0, c), std::domain_error);
  CHECK_THROWS_AS(path_loss_db(-1.0, c), std::domain_error);
}

TEST_CASE("large-scale fading") {
  ScenarioConfig c;
  c.sigma_sh_db = 0.0;
  Rng rng(1);
  const Eigen::MatrixXd d = Eigen::MatrixXd::Constant(1, 1, 0.1);
  CHECK(compute_beta(c, d, rng)(0, 0) == doctest::Approx(2.6915348e-11).epsilon(1e-7));

  SUBCASE("log-normal shadowing has zero mean in dB") {
    ScenarioConfig s;
    Rng r(11);
    const Eigen::MatrixXd far = Eigen::MatrixXd::Constant(1, 100000, 0.1);
    const Eigen::MatrixXd beta = compute_beta(s, far, r);
    const double mean_db = (10.0 * beta.array().log10()).mean() - path_loss_db(0.1, s);
    CHECK(std::abs(mean_db) < 0.1);
  }

  SUBCASE("shadowing only beyond d1") {
    ScenarioConfig s;
    Rng r(5);
    const Eigen::MatrixXd near = Eigen::MatrixXd::Constant(3, 3, 0.03);
    const Eigen::MatrixXd beta = compute_beta(s, near, r);
    const double expected = std::pow(10.0, path_loss_db(0.03, s) / 10.0);
    CHECK((beta.array() == expected).all());
  }

  SUBCASE("reproducible") {
    Rng a(9), b(9);
    const Eigen::MatrixXd dist = Eigen::MatrixXd::Constant(4, 3, 0.2);
    CHECK(compute_beta(c, dist, a) == compute_beta(c, dist, b));
  }
}

TEST_CASE("node placement") {
  ScenarioConfig c;
  c.M = 1000;
  c.K = 200;
  Rng rng(42);
  const auto p = place_nodes(c, rng);
  REQUIRE(p.ap_xy.size() == 1000);
  REQUIRE(p.user_xy.size() == 200);
  double sx = 0, sy = 0;
  for (const auto& q : p.ap_xy) {
    CHECK(q.x >= 0.0);
    CHECK(q.x < 1.0);
    CHECK(q.y >= 0.0);
    CHECK(q.y < 1.0);
    sx += q.x;
    sy += q.y;
  }
  CHECK(std::abs(sx / 1000 - 0.5) < 0.05);
  CHECK(std::abs(sy / 1000 - 0.5) < 0.05);
  double ux = 0, uy = 0;
  for (const auto& q : p.user_xy) {
    ux += q.x;
    uy += q.y;
  }
  CHECK(std::abs(ux / 200 - 0.5) < 0.05);
  CHECK(std::abs(uy / 200 - 0.5) < 0.05);

  Rng again(42);
  const auto p2 = place_nodes(c, again);
  CHECK(p2.ap_xy.front().x == p.ap_xy.front().x);
  CHECK(p2.user_xy.back().y == p.user_xy.back().y);
}

TEST_CASE("pilot assignment") {
  Rng rng(7);
  {
    const auto p = assign_pilots(4, 4, rng);
    CHECK(std::set<int>(p.begin(), p.end()).size() == 4);
  }
  {
    const auto p = assign_pilots(5, 2, rng);
    std::map<int, int> counts;
    for (int x : p) counts[x]++;
    REQUIRE(counts.size() == 2);
    CHECK(std::max(counts[0], counts[1]) == 3);
    CHECK(std::min(counts[0], counts[1]) == 2);
  }
  {
    const auto p = assign_pilots(40, 40, rng);
    CHECK(std::set<int>(p.begin(), p.end()).size() == 40);
  }
  for (int K : {3, 7, 17}) {
    for (int tau : {1, 2, 5}) {
      const auto p = assign_pilots(K, tau, rng);
      std::map<int, int> counts;
      for (int x : p) {
        CHECK(x >= 0);
        CHECK(x < tau);
        counts[x]++;
      }
      int lo = K, hi = 0;
      for (auto [_, n] : counts) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("channel estimate quality") {
  const Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(2, 2, 1e-9);
  CHECK(compute_gamma(10, 0.0, beta, {0, 1}).isZero());

  const Eigen::MatrixXd single = Eigen::MatrixXd::Constant(1, 1, 1e-6);
  const double ratio = compute_gamma(1, 1e12, single, {0})(0, 0) / single(0, 0);
  CHECK(ratio > 0.999999);
  CHECK(ratio < 1.0);

  const Eigen::MatrixXd shared = Eigen::MatrixXd::Constant(1, 2, 1e-8);
  const auto g = compute_gamma(5, 1e10, shared, {0, 0});
  CHECK(g(0, 0) < shared(0, 0) / 2);
  CHECK(g(0, 1) < shared(0, 1) / 2);
}

TEST_CASE("noise normalization") {
  CHECK(noise_power_w(20e6, 9.0) == doctest::Approx(6.3607e-13).epsilon(1e-4));
  CHECK(noise_power_w(1.0, 0.0) == doctest::Approx(4.00388e-21).epsilon(1e-5));
  CHECK(1.0 / noise_power_w(20e6, 9.0) == doctest::Approx(1.5721e12).epsilon(1e-4));
}

TEST_CASE("generated scenarios") {
  ScenarioConfig c;
  c.M = 30;
  c.K = 12;
  c.tau_p = 5;
  c.seed = 17;
  const auto s = generate_scenario(c);
  CHECK((s.beta.array() > 0.0).all());
  CHECK((s.gamma.array() > 0.0).all());
  CHECK((s.gamma.array() < s.beta.array()).all());
  CHECK(s.rho_d == doctest::Approx(c.p_down_w / noise_power_w(c.bandwidth_hz, c.noise_figure_db)));

  const auto again = generate_scenario(c);
  CHECK(again.beta == s.beta);
  CHECK(again.gamma == s.gamma);
  CHECK(again.pilot_of == s.pilot_of);

  c.seed = 18;
  CHECK(generate_scenario(c).beta != s.beta);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    ScenarioConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.M = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.tau_p = 200; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.tau_p = 0; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.d1_km = 0.005; }).validate(), std::invalid_argument);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.bandwidth_hz = 0; }).validate(), std::invalid_argument);
  CHECK_NOTHROW(ScenarioConfig{}.validate());
}

TEST_CASE("seed mixing") {
  CHECK(mix_seed(1, 0, 0) != mix_seed(1, 0, 1));
  CHECK(mix_seed(1, 0, 1) != mix_seed(1, 1, 0));
  CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
  CHECK(mix_seed(2, 2, 3) != mix_seed(1, 2, 3));
}

}
