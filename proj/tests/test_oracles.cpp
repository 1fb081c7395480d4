#include <doctest.h>

#include <cmath>

#include "cfee/oracles.hpp"

using namespace cfee;

TEST_SUITE("oracles") {

TEST_CASE("finite differences") {
  Eigen::VectorXd c(3);
  c << 1.5, -2.0, 0.25;
  Eigen::VectorXd x(3);
  x << 0.3, 0.7, 2.0;
  const auto g = oracle::fd_gradient([&](const Eigen::VectorXd& v) { return c.dot(v); }, x);
  CHECK((g - c).lpNorm<Eigen::Infinity>() <= 1e-10);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  const auto q = oracle::fd_gradient([](const Eigen::VectorXd& v) { return v.squaredNorm(); }, ones);
  CHECK((q - Eigen::VectorXd::Constant(2, 2.0)).lpNorm<Eigen::Infinity>() <= 1e-8);

  // At the orthant boundary the step is one-sided.
  Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
  const auto s = oracle::fd_gradient(
      [](const Eigen::VectorXd& v) { return v[0] < 0 ? NAN : std::sqrt(v[0] + 1.0); }, z);
  CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("lattice projection") {
  Eigen::VectorXd u(2);
  u << 0.3, 0.4;
  CHECK((oracle::grid_project(u, 1, 2, 1, 1e-3) - u).norm() <= 1e-3);
  u << 3, 4;
  Eigen::VectorXd expected(2);
  expected << 0.6, 0.8;
  CHECK((oracle::grid_project(u, 1, 2, 1, 1e-3) - expected).norm() <= 2e-3);
  Eigen::VectorXd neg(3);
  neg << -1, -2, -0.5;
  CHECK(oracle::grid_project(neg, 1, 3, 1, 1e-2).isZero());
  Eigen::VectorXd two_blocks(4);
  two_blocks << 3, 4, -1, 0.2;
  const auto p = oracle::grid_project(two_blocks, 2, 2, 1, 1e-3);
  CHECK(p[2] == 0.0);
  CHECK(p[3] == doctest::Approx(0.2).epsilon(1e-9));
  CHECK_THROWS_AS(oracle::grid_project(Eigen::VectorXd::Zero(4), 1, 4, 1, 1e-2),
                  std::invalid_argument);
}

TEST_CASE("lattice maximization") {
  auto concave = [](const Eigen::VectorXd& x) { return -(x[0] - 0.3) * (x[0] - 0.3); };
  const auto best = oracle::grid_maximize(concave, 1, 1, 1, 1e-3);
  CHECK(std::abs(best.theta[0] - 0.3) <= 1e-3);

  auto bumpy = [](const Eigen::VectorXd& x) {
    return std::sin(7.3 * x[0]) * std::cos(3.1 * x[1]) - 0.2 * x[0];
  };
  double prev = -INFINITY;
  for (double res : {0.08, 0.04, 0.02, 0.01}) {
    const auto r = oracle::grid_maximize(bumpy, 2, 1, 1, res);
    CHECK(r.value >= prev);
    prev = r.value;
  }

  // Filtered points are skipped.
  const auto filtered = oracle::grid_maximize(
      concave, 1, 1, 1, 1e-3, [](const Eigen::VectorXd& x) { return x[0] >= 0.5; });
  CHECK(filtered.theta[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(oracle::grid_maximize(concave, 2, 2, 1, 0.1), std::invalid_argument);
}

TEST_CASE("reports") {
  const auto ok = oracle::compare("x", 2.0, 2.0 + 1e-7, 1e-6);
  CHECK(ok.pass);
  CHECK(ok.rel_error == doctest::Approx(5e-8));
  const auto bad = oracle::compare("y", 1.0, 1.1, 0.05, false);
  CHECK_FALSE(bad.pass);
  CHECK(bad.abs_error == doctest::Approx(0.1));
  CHECK(oracle::to_string(bad).rfind("FAIL", 0) == 0);
}

}
