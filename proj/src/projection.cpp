#include "cfee/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfee {

double FeasibleSetSpec::radius() const { return std::sqrt(1.0 / N); }

ThetaVector project(const Eigen::VectorXd& u, const FeasibleSetSpec& spec) {
  if (u.size() != static_cast<Eigen::Index>(spec.M) * spec.K)
    throw std::invalid_argument("project: size mismatch");
  const double r = spec.radius();
  ThetaVector theta = u.cwiseMax(0.0);
  for (int m = 0; m < spec.M; ++m) {
    auto block = theta.segment(static_cast<Eigen::Index>(m) * spec.K, spec.K);
    const double norm = block.norm();
    if (norm > r) {
      // Step the scale down until the rounded norm is within r, so that a
      // projected point is a fixed point of the projection.
      const Eigen::VectorXd clamped = block;
      double scale = r / norm;
      block = clamped * scale;
      while (block.norm() > r) {
        scale = std::nextafter(scale, 0.0);
        block = clamped * scale;
      }
    }
  }
  return theta;
}

FeasibilityReport is_feasible(const ThetaVector& theta, const FeasibleSetSpec& spec, double tol) {
  FeasibilityReport rep;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  rep.min_entry = theta.size() > 0 ? theta.minCoeff() : 0.0;
  const double cap = 1.0 / spec.N;
  for (int m = 0; m < spec.M; ++m) {
    const auto block = theta.segment(static_cast<Eigen::Index>(m) * spec.K, spec.K);
    const double violation = std::max(block.squaredNorm() - cap, -block.minCoeff());
    if (violation > rep.worst_violation) {
      rep.worst_violation = violation;
      rep.worst_block = m;
    }
  }
  rep.feasible = rep.worst_violation <= tol;
  return rep;
}

}  // namespace cfee
