#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfee/objective.hpp"
#include "cfee/problem.hpp"
#include "cfee/projection.hpp"

namespace cfee {

enum class StepMode { kBBLineSearch, kFixedFromLipschitz };
enum class StartMode { kUniformFullPower, kUserSupplied };

struct SolverConfig {
  StepMode alpha_mode = StepMode::kBBLineSearch;
  double nu = 0.5;           ///< backtracking shrink
  double delta = 1e-6;       ///< sufficient-increase margin
  double varsigma = 1e-3;    ///< relative progress tolerance of the inner loop
  int inner_window = 10;     ///< progress is measured over this many iterations
  std::optional<double> xi0; ///< initial penalty; adaptive when empty
  double rho_growth = 10.0;  ///< penalty growth per outer round
  double eps_feas = 1e-6;    ///< max_k max(0, g_k) accepted at termination
  double se_tol = 1e-4;      ///< max_k (S_o,k - u_k) accepted at termination
  int max_inner = 2000;
  int max_outer = 30;
  int max_backtracks = 60;
  double fixed_step_fraction = 0.99;  ///< alpha = fraction / L in fixed mode
  double alpha_min = 1e-12;  ///< clip range of BB seeds
  double alpha_max = 1e6;
  StartMode theta0_mode = StartMode::kUniformFullPower;
  ThetaVector theta0;        ///< used with kUserSupplied (projected onto the set)

  /// Throws std::invalid_argument.
  void validate() const;
};

enum class Branch { kStart, kZ, kV };
const char* branch_name(Branch b);

struct IterationRecord {
  int outer = 0;  ///< 1-based penalty round
  int inner = 0;  ///< 0 marks the round's starting point
  double xi = 0.0;
  double f_xi = 0.0;
  double ee_term = 0.0;
  double penalty_sum = 0.0;
  double violation = 0.0;
  double alpha_y = 0.0;
  double alpha_theta = 0.0;
  Branch branch = Branch::kStart;
  int backtracks = 0;
  bool degraded = false;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

struct PowerReport {
  double fixed_w = 0.0;      ///< P_fix
  double transmit_w = 0.0;   ///< amplifier input power
  double traffic_w = 0.0;    ///< load-dependent backhaul (report only)
  double optimized_w = 0.0;  ///< fixed + transmit, the optimized denominator
  double total_w = 0.0;      ///< optimized + traffic
};

struct SolverResult {
  ThetaVector theta_opt;
  Eigen::MatrixXd eta_opt;
  double ee = 0.0;  ///< bit/Joule, traffic-independent denominator
  Eigen::VectorXd se_per_user;
  double violation_final = 0.0;
  double xi_final = 0.0;
  PowerReport power;
  int outer_iters = 0;
  int inner_iters_total = 0;
  int backtracks_total = 0;
  double wall_time_s = 0.0;
  bool converged = false;  ///< stopping rule met
  bool feasible = false;   ///< violation and SE shortfall within tolerance
  std::string status;
  std::vector<IterationRecord> trace;
};

/// Extrapolation y = theta + coef_z (z - theta) + coef_prev (theta - theta_prev).
struct MomentumStep {
  double coef_z = 1.0;
  double coef_prev = 0.0;
  double t_next = 1.0;
};

MomentumStep momentum_update(double t_prev, double t);

/// Step used when the BB quotient is unusable: previous * growth, or the
/// inverse Lipschitz bound when there is no previous step.
struct StepFallback {
  std::optional<double> previous;  ///< last accepted step of the same branch
  double inverse_lipschitz = 0.0;
  double growth = 1.0;             ///< the solver passes 1 / nu
};

struct StepSeed {
  double alpha = 0.0;
  bool fallback = false;
};

/// BB1 quotient s^T s / s^T r. `r` is the change of the gradient of the
/// function being *descended*: for the ascent solver pass the negated change
/// of grad f_xi. Non-positive or non-finite curvature falls back; the result
/// is clipped to [alpha_min, alpha_max].
StepSeed bb_initial_step(const Eigen::VectorXd& s, const Eigen::VectorXd& r,
                         const StepFallback& fallback, double alpha_min = 1e-12,
                         double alpha_max = 1e6);

using SmoothObjective = std::function<ObjectiveWithGradient(const Eigen::VectorXd&)>;
using Projector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct BacktrackResult {
  Eigen::VectorXd point;
  ObjectiveWithGradient eval;
  double alpha = 0.0;  ///< step that produced `point`
  int backtracks = 0;
  bool degraded = false;
};

/// Projected ascent from `base` shrinking alpha by nu until
/// f(z) >= f(base) + delta ||z - base||^2. After max_backtracks the best
/// candidate is returned (or `base` itself when base_in_set and no candidate
/// improves on it) with `degraded` set. Throws std::runtime_error on a
/// non-finite objective.
BacktrackResult backtrack_step(const Eigen::VectorXd& base, const ObjectiveWithGradient& base_eval,
                               double alpha_init, const SolverConfig& cfg,
                               const SmoothObjective& objective, const Projector& projector,
                               bool base_in_set);

struct InnerResult {
  ThetaVector theta;
  ObjectiveWithGradient eval;
  bool converged = false;
  int iterations = 0;
  int backtracks = 0;
  std::vector<IterationRecord> trace;
};

/// Step sizes carried between inner loops.
struct StepMemory {
  std::optional<double> alpha_y;
  std::optional<double> alpha_theta;
  double inverse_lipschitz = 0.0;
};

/// Monotone accelerated projected gradient ascent on a generic smooth
/// objective over a convex set. `outer` and `xi` only label trace rows.
InnerResult apg_inner(const Eigen::VectorXd& theta_start, const SmoothObjective& objective,
                      const Projector& projector, const SolverConfig& cfg, StepMemory& memory,
                      int outer = 1, double xi = 0.0, const IterationCallback& callback = {});

/// Inner loop on f_xi for a fixed penalty.
InnerResult apg_inner(const ThetaVector& theta_start, double xi, const ProblemData& pd,
                      const SolverConfig& cfg, const IterationCallback& callback = {});

/// theta_mk = sqrt(1 / (N K)): every AP at full power, split evenly.
ThetaVector uniform_full_power(const ProblemData& pd);

/// Penalty loop around apg_inner with warm starts and growing xi.
SolverResult solve(const ProblemData& pd, const SolverConfig& cfg,
                   const IterationCallback& callback = {});

}  // namespace cfee
