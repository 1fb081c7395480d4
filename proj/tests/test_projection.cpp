#include <doctest.h>

#include <cmath>

#include "cfee/oracles.hpp"
#include "cfee/projection.hpp"
#include "support.hpp"

using namespace cfee;
using cfee::testing::random_normal;

TEST_SUITE("projection") {

TEST_CASE("closed-form examples") {
  const FeasibleSetSpec one{1, 2, 1};
  Eigen::VectorXd u(2);
  u << 3, 4;
  const auto p = project(u, one);
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-15));
  u << -1, -2;
  CHECK(project(u, one).isZero());
  u << 0.3, 0.4;
  CHECK(project(u, one) == u);
  u << -0.5, 2.0;
  const auto q = project(u, one);
  CHECK(q[0] == 0.0);
  CHECK(q[1] == doctest::Approx(1.0));

  const FeasibleSetSpec two{1, 2, 4};
  u << 3, 4;
  CHECK(project(u, two).norm() == doctest::Approx(0.5));
  CHECK_THROWS_AS(project(Eigen::VectorXd::Zero(3), one), std::invalid_argument);
}

TEST_CASE("feasibility report") {
  const FeasibleSetSpec spec{3, 2, 2};
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(6, 0.5);  // block norm^2 = 0.5 = 1/N
  CHECK(is_feasible(theta, spec, 0.0).feasible);
  theta[3] = -1e-3;
  const auto rep = is_feasible(theta, spec, 1e-6);
  CHECK_FALSE(rep.feasible);
  CHECK(rep.worst_block == 1);
  CHECK(rep.min_entry == -1e-3);
  theta[3] = 0.5;
  theta[4] = 0.6;
  const auto over = is_feasible(theta, spec);
  CHECK_FALSE(over.feasible);
  CHECK(over.worst_block == 2);
  CHECK(over.worst_violation == doctest::Approx(0.11));
}

TEST_CASE("projection properties on random inputs") {
  Rng rng(2024);
  for (auto spec : {FeasibleSetSpec{5, 3, 1}, FeasibleSetSpec{4, 6, 2}, FeasibleSetSpec{1, 1, 1},
                    FeasibleSetSpec{10, 4, 8}}) {
    const Eigen::Index n = static_cast<Eigen::Index>(spec.M) * spec.K;
    for (int i = 0; i < 2500; ++i) {
      const double scale = i % 3 == 0 ? 0.1 : (i % 3 == 1 ? 1.0 : 10.0);
      const auto u = random_normal(n, scale, rng);
      const auto v = random_normal(n, scale, rng);
      const auto pu = project(u, spec);
      REQUIRE(is_feasible(pu, spec, 1e-15).feasible);
      REQUIRE(project(pu, spec) == pu);
      REQUIRE((pu - project(v, spec)).norm() <= (u - v).norm() * (1 + 1e-15));
      // Blocks are projected independently.
      for (int m = 0; m < spec.M; ++m) {
        const FeasibleSetSpec single{1, spec.K, spec.N};
        REQUIRE(project(Eigen::VectorXd(u.segment(m * spec.K, spec.K)), single) ==
                pu.segment(m * spec.K, spec.K));
      }
    }
  }
}

TEST_CASE("optimal against a dense lattice") {
  Rng rng(5);
  for (int K : {2, 3}) {
    const double res = K == 2 ? 1e-3 : 5e-3;
    for (int i = 0; i < (K == 2 ? 200 : 40); ++i) {
      const auto u = random_normal(K, 1.5, rng);
      const FeasibleSetSpec spec{1, K, 1 + i % 2};
      const auto p = project(u, spec);
      const auto g = oracle::grid_project(u, 1, K, spec.N, res);
      // Every lattice point is feasible, so none may be closer than the projection.
      CHECK((p - u).norm() <= (g - u).norm() + 1e-9);
      CHECK((g - u).norm() - (p - u).norm() <= 2.0 * std::sqrt(K) * res);
    }
  }
}

}
