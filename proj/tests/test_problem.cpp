#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cfee/oracles.hpp"
#include "cfee/problem.hpp"
#include "support.hpp"

using namespace cfee;
using cfee::testing::make_instance;
using cfee::testing::random_interior;

namespace {

// Single AP, single user scenario with hand-picked statistics.
Scenario single_link(double beta, double gamma, double rho, int N = 1) {
  Scenario s;
  s.config.M = 1;
  s.config.K = 1;
  s.config.N = N;
  s.config.tau_p = 40;
  s.config.tau_c = 200;
  s.ap_xy = {{0, 0}};
  s.user_xy = {{0.1, 0}};
  s.beta = Eigen::MatrixXd::Constant(1, 1, beta);
  s.gamma = Eigen::MatrixXd::Constant(1, 1, gamma);
  s.pilot_of = {0};
  s.rho_d = rho;
  s.rho_p = rho;
  return s;
}

}  // namespace

TEST_SUITE("problem") {

TEST_CASE("coefficient precomputation") {
  const auto s = single_link(2e-9, 1.5e-9, 1.0);
  const auto pd = precompute(s, PowerModel::uniform(1), Eigen::VectorXd::Constant(1, 1.0));
  REQUIRE(pd.pairs.size() == 1);
  REQUIRE(pd.pairs[0].size() == 1);
  CHECK(pd.pairs[0][0].coeff[0] == doctest::Approx(std::sqrt(1.5e-9)).epsilon(1e-15));
  CHECK(pd.a[0] == doctest::Approx(std::sqrt(std::pow(2.0, 1.25) - 1.0)).epsilon(1e-14));
  CHECK(pd.a[0] == doctest::Approx(1.1741).epsilon(1e-4));
  CHECK(pd.prelog == doctest::Approx(0.8));

  const auto orth = make_instance(6, 5, 1, 5, 3);
  CHECK(orth.pd.stored_pair_count() == 5);
  const auto reuse = make_instance(6, 5, 1, 2, 3);
  // Pilot groups of sizes 3 and 2 store 9 + 4 ordered pairs.
  CHECK(reuse.pd.stored_pair_count() == 13);
}

TEST_CASE("precompute rejects bad inputs") {
  auto s = single_link(2e-9, 1e-9, 1.0);
  const auto pm = PowerModel::uniform(1);
  CHECK_THROWS_AS(precompute(s, pm, Eigen::VectorXd::Constant(2, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(precompute(s, pm, Eigen::VectorXd::Constant(1, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(precompute(s, PowerModel::uniform(2), Eigen::VectorXd::Constant(1, 1.0)),
                  std::invalid_argument);
  s.config.tau_p = 200;
  CHECK_THROWS_AS(precompute(s, pm, Eigen::VectorXd::Constant(1, 1.0)), std::invalid_argument);
}

TEST_CASE("P_fix of the default power model") {
  const auto in = make_instance(100, 4, 1, 4, 1);
  CHECK(in.pd.p_fix == doctest::Approx(102.5).epsilon(1e-14));
}

TEST_CASE("change of variables") {
  const auto in = make_instance(7, 4, 2, 2, 8);
  Rng rng(2);
  Eigen::MatrixXd eta(7, 4);
  for (int m = 0; m < 7; ++m)
    for (int k = 0; k < 4; ++k) eta(m, k) = rng.uniform() / (2.0 * 4.0 * in.pd.gamma(m, k));
  const auto theta = eta_to_theta(eta, in.pd.gamma);
  CHECK((theta_to_eta(theta, in.pd.gamma) - eta).cwiseAbs().maxCoeff() <=
        1e-15 * eta.cwiseAbs().maxCoeff());
  CHECK(eta_to_theta(Eigen::MatrixXd::Zero(7, 4), in.pd.gamma).isZero());

  // eta_mk = 1 / (N K gamma_mk) puts every block on the boundary.
  Eigen::MatrixXd full(7, 4);
  for (int m = 0; m < 7; ++m)
    for (int k = 0; k < 4; ++k) full(m, k) = 1.0 / (2.0 * 4.0 * in.pd.gamma(m, k));
  const auto boundary = eta_to_theta(full, in.pd.gamma);
  for (int m = 0; m < 7; ++m) CHECK(boundary.segment(m * 4, 4).squaredNorm() == doctest::Approx(0.5));

  CHECK_THROWS_AS(eta_to_theta(-eta, in.pd.gamma), std::domain_error);
  CHECK_THROWS_AS(theta_to_eta(-theta, in.pd.gamma), std::domain_error);
}

TEST_CASE("spectral efficiency") {
  SUBCASE("zero power gives zero rate") {
    const auto in = make_instance(5, 3, 1, 2, 4);
    CHECK(se_per_user_theta(Eigen::VectorXd::Zero(15), in.pd).isZero());
    CHECK(se_per_user_eta(Eigen::MatrixXd::Zero(5, 3), in.scenario).isZero());
  }

  SUBCASE("single link closed form") {
    const double beta = 3e-10, gamma = 2e-10, rho = 1.5e12;
    for (int N : {1, 2}) {
      const auto s = single_link(beta, gamma, rho, N);
      const auto pd = precompute(s, PowerModel::uniform(1), Eigen::VectorXd::Constant(1, 1.0));
      const double t = 0.4;
      const double expected =
          0.8 * std::log2(1.0 + rho * N * N * gamma * t * t / (rho * N * beta * t * t + 1.0));
      CHECK(se_per_user_theta(Eigen::VectorXd::Constant(1, t), pd)[0] ==
            doctest::Approx(expected).epsilon(1e-14));
      Eigen::MatrixXd eta = Eigen::MatrixXd::Constant(1, 1, t * t / gamma);
      CHECK(se_per_user_eta(eta, s)[0] == doctest::Approx(expected).epsilon(1e-13));
    }
  }

  SUBCASE("eta and theta coordinates agree") {
    Rng rng(5);
    for (auto [M, K, N, tau] : {std::tuple{8, 4, 1, 2}, {8, 4, 2, 3}, {12, 6, 1, 6}, {10, 5, 2, 1}}) {
      const auto in = make_instance(M, K, N, tau, 100 + M * K);
      for (int i = 0; i < 100; ++i) {
        const auto theta = random_interior(in.pd, rng);
        const auto a = se_per_user_theta(theta, in.pd);
        const auto b = se_per_user_eta(theta_to_eta(theta, in.pd.gamma), in.scenario);
        CHECK(((a - b).array().abs() / b.array()).maxCoeff() <= 1e-10);
      }
    }
  }

  SUBCASE("more interference lowers every other user's rate") {
    const auto in = make_instance(8, 4, 1, 2, 9);
    Rng rng(6);
    const auto theta = random_interior(in.pd, rng);
    const auto base = se_per_user_theta(theta, in.pd);
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd louder = theta;
      for (int m = 0; m < 8; ++m)
        for (int j = 0; j < 4; ++j)
          if (j != k) louder[theta_index(m, j, 4)] *= 2.0;
      CHECK(se_per_user_theta(louder, in.pd)[k] < base[k]);
    }
  }

  SUBCASE("relabeling access points") {
    const auto in = make_instance(9, 4, 1, 2, 12);
    Rng rng(8);
    const auto theta = random_interior(in.pd, rng);
    std::vector<int> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[0], perm[4]);
    Scenario s = in.scenario;
    Eigen::VectorXd t2(theta.size());
    for (int m = 0; m < 9; ++m) {
      s.beta.row(m) = in.scenario.beta.row(perm[m]);
      s.gamma.row(m) = in.scenario.gamma.row(perm[m]);
      t2.segment(m * 4, 4) = theta.segment(perm[m] * 4, 4);
    }
    const auto pd2 = precompute(s, in.power, in.targets);
    const auto a = se_per_user_theta(theta, in.pd);
    const auto b = se_per_user_theta(t2, pd2);
    CHECK(((a - b).array().abs() / a.array()).maxCoeff() <= 1e-13);
  }

  SUBCASE("sparse pair storage matches a dense reference") {
    const auto in = make_instance(6, 3, 1, 3, 21);
    const oracle::ReferenceModel ref(in.scenario, in.power, in.targets);
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
      const auto theta = random_interior(in.pd, rng);
      const auto a = se_per_user_theta(theta, in.pd);
      const auto b = ref.se(theta);
      CHECK(((a - b).array().abs() / b.array()).maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("power and energy efficiency") {
  const auto in = make_instance(8, 4, 1, 2, 31);
  const auto& pd = in.pd;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(32);
  CHECK(total_power_w(zero, pd) == pd.p_fix);
  CHECK(energy_efficiency(zero, pd) == 0.0);

  // Full power: every AP radiates p_down through efficiency 0.4.
  const Eigen::VectorXd full = Eigen::VectorXd::Constant(32, std::sqrt(1.0 / 4.0));
  CHECK(total_power_w(full, pd) - pd.p_fix ==
        doctest::Approx(2.5 * 8 * in.scenario.config.p_down_w).epsilon(1e-12));

  Rng rng(4);
  const oracle::ReferenceModel ref(in.scenario, in.power, in.targets);
  for (int i = 0; i < 50; ++i) {
    const auto theta = random_interior(pd, rng);
    const double v = total_power_w(theta, pd);
    CHECK(v > pd.p_fix);
    const double sum_rate = pd.bandwidth_hz * se_per_user_theta(theta, pd).sum();
    CHECK(energy_efficiency(theta, pd) * v == doctest::Approx(sum_rate).epsilon(1e-14));
    CHECK(energy_efficiency(theta, pd) == doctest::Approx(ref.ee(theta)).epsilon(1e-12));
    const double traffic = total_power_w(theta, pd, true) - v;
    CHECK(traffic == doctest::Approx(sum_rate * pd.power.p_bt.sum()).epsilon(1e-12));
  }
}

}
