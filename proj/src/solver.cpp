#include "cfee/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace cfee {

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (!(nu > 0.0 && nu < 1.0)) fail("solver: nu must lie in (0, 1)");
  if (!(delta > 0.0)) fail("solver: delta must be > 0");
  if (!(varsigma > 0.0)) fail("solver: varsigma must be > 0");
  if (inner_window < 1) fail("solver: inner_window must be >= 1");
  if (xi0 && !(*xi0 >= 0.0)) fail("solver: xi0 must be >= 0");
  if (!(rho_growth > 1.0)) fail("solver: rho_growth must be > 1");
  if (!(eps_feas > 0.0)) fail("solver: eps_feas must be > 0");
  if (!(se_tol > 0.0)) fail("solver: se_tol must be > 0");
  if (max_inner < 1 || max_outer < 1 || max_backtracks < 0) fail("solver: bad iteration caps");
  if (!(fixed_step_fraction > 0.0 && fixed_step_fraction < 1.0))
    fail("solver: fixed_step_fraction must lie in (0, 1)");
  if (!(alpha_min > 0.0 && alpha_max >= alpha_min)) fail("solver: bad alpha clip range");
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::kStart: return "start";
    case Branch::kZ: return "z";
    case Branch::kV: return "v";
  }
  return "?";
}

MomentumStep momentum_update(double t_prev, double t) {
  MomentumStep m;
  m.coef_z = t_prev / t;
  m.coef_prev = (t_prev - 1.0) / t;
  m.t_next = (std::sqrt(4.0 * t * t + 1.0) + 1.0) / 2.0;
  return m;
}

StepSeed bb_initial_step(const Eigen::VectorXd& s, const Eigen::VectorXd& r,
                         const StepFallback& fallback, double alpha_min, double alpha_max) {
  StepSeed seed;
  const double sr = s.dot(r);
  const double alpha = s.squaredNorm() / sr;
  if (sr > 0.0 && std::isfinite(alpha) && alpha > 0.0) {
    seed.alpha = alpha;
  } else {
    seed.fallback = true;
    seed.alpha = fallback.previous ? *fallback.previous * fallback.growth : fallback.inverse_lipschitz;
  }
  seed.alpha = std::clamp(seed.alpha, alpha_min, alpha_max);
  return seed;
}

namespace {

void require_finite(const ObjectiveWithGradient& e) {
  if (!std::isfinite(e.value.f_xi)) throw std::runtime_error("solver: non-finite objective value");
}

}  // namespace

BacktrackResult backtrack_step(const Eigen::VectorXd& base, const ObjectiveWithGradient& base_eval,
                               double alpha_init, const SolverConfig& cfg,
                               const SmoothObjective& objective, const Projector& projector,
                               bool base_in_set) {
  const double f_base = base_eval.value.f_xi;
  BacktrackResult best;
  bool have_best = false;
  double alpha = alpha_init;
  for (int attempt = 0; attempt <= cfg.max_backtracks; ++attempt) {
    Eigen::VectorXd z = projector(base + alpha * base_eval.gradient);
    auto e = objective(z);
    require_finite(e);
    const double f_z = e.value.f_xi;
    if (f_z >= f_base + cfg.delta * (z - base).squaredNorm()) {
      return {std::move(z), std::move(e), alpha, attempt, false};
    }
    if (!have_best || f_z > best.eval.value.f_xi) {
      best = {std::move(z), std::move(e), alpha, attempt, true};
      have_best = true;
    }
    alpha *= cfg.nu;
  }
  best.backtracks = cfg.max_backtracks;
  if (base_in_set && f_base >= best.eval.value.f_xi) {
    best.point = base;
    best.eval = base_eval;
  }
  return best;
}

InnerResult apg_inner(const Eigen::VectorXd& theta_start, const SmoothObjective& objective,
                      const Projector& projector, const SolverConfig& cfg, StepMemory& memory,
                      int outer, double xi, const IterationCallback& callback) {
  const bool fixed = cfg.alpha_mode == StepMode::kFixedFromLipschitz;
  const double fixed_alpha = cfg.fixed_step_fraction * memory.inverse_lipschitz;

  InnerResult out;
  Eigen::VectorXd theta = theta_start;
  Eigen::VectorXd theta_prev = theta_start;
  Eigen::VectorXd z = theta_start;
  auto eval_theta = objective(theta);
  require_finite(eval_theta);

  auto record = [&](int inner, Branch branch, double ay, double at, int bt, bool degraded) {
    IterationRecord r;
    r.outer = outer;
    r.inner = inner;
    r.xi = xi;
    r.f_xi = eval_theta.value.f_xi;
    r.ee_term = eval_theta.value.ee_term;
    r.penalty_sum = eval_theta.value.penalty_sum;
    r.violation = eval_theta.value.violation;
    r.alpha_y = ay;
    r.alpha_theta = at;
    r.branch = branch;
    r.backtracks = bt;
    r.degraded = degraded;
    out.trace.push_back(r);
    if (callback) callback(r);
  };
  record(0, Branch::kStart, 0.0, 0.0, 0, false);

  // BB history: previous extrapolation point / z step, and previous monitor base / v step.
  Eigen::VectorXd y_prev, grad_y_prev, grad_z, v, grad_v, v_base, grad_v_base;
  bool have_y_hist = false;
  bool have_v_hist = false;

  std::deque<double> history{eval_theta.value.f_xi};
  double t_prev = 1.0;
  double t = 1.0;

  for (int n = 1; n <= cfg.max_inner; ++n) {
    const auto mom = momentum_update(t_prev, t);
    Eigen::VectorXd y = theta + mom.coef_z * (z - theta) + mom.coef_prev * (theta - theta_prev);
    auto eval_y = objective(y);
    require_finite(eval_y);

    BacktrackResult step_z;
    BacktrackResult step_v;
    if (fixed) {
      Eigen::VectorXd zc = projector(y + fixed_alpha * eval_y.gradient);
      auto ez = objective(zc);
      require_finite(ez);
      step_z = {std::move(zc), std::move(ez), fixed_alpha, 0, false};
      Eigen::VectorXd vc = projector(theta + fixed_alpha * eval_theta.gradient);
      auto ev = objective(vc);
      require_finite(ev);
      // Guard against rounding: an ascent step of size < 1/L cannot decrease f.
      if (ev.value.f_xi < eval_theta.value.f_xi) {
        vc = theta;
        ev = eval_theta;
      }
      step_v = {std::move(vc), std::move(ev), fixed_alpha, 0, false};
    } else {
      // Growing the fallback lets the step recover from a tiny 1/L seed
      // while the curvature stays nonpositive.
      const StepFallback fb_y{memory.alpha_y, memory.inverse_lipschitz, 1.0 / cfg.nu};
      const double ay0 = have_y_hist ? bb_initial_step(z - y_prev, -(grad_z - grad_y_prev), fb_y,
                                                       cfg.alpha_min, cfg.alpha_max)
                                           .alpha
                                     : std::clamp(memory.alpha_y.value_or(memory.inverse_lipschitz),
                                                  cfg.alpha_min, cfg.alpha_max);
      const StepFallback fb_v{memory.alpha_theta, memory.inverse_lipschitz, 1.0 / cfg.nu};
      const double at0 = have_v_hist
                             ? bb_initial_step(v - v_base, -(grad_v - grad_v_base), fb_v,
                                               cfg.alpha_min, cfg.alpha_max)
                                   .alpha
                             : std::clamp(memory.alpha_theta.value_or(memory.inverse_lipschitz),
                                          cfg.alpha_min, cfg.alpha_max);
      // y can leave the set through extrapolation; theta never does.
      step_z = backtrack_step(y, eval_y, ay0, cfg, objective, projector, false);
      step_v = backtrack_step(theta, eval_theta, at0, cfg, objective, projector, true);
      if (!step_z.degraded) memory.alpha_y = step_z.alpha;
      if (!step_v.degraded) memory.alpha_theta = step_v.alpha;
    }
    out.backtracks += step_z.backtracks + step_v.backtracks;

    y_prev = std::move(y);
    grad_y_prev = std::move(eval_y.gradient);
    have_y_hist = true;
    v_base = theta;
    grad_v_base = eval_theta.gradient;
    v = step_v.point;
    grad_v = step_v.eval.gradient;
    have_v_hist = true;
    z = step_z.point;
    grad_z = step_z.eval.gradient;

    const bool take_z = step_z.eval.value.f_xi >= step_v.eval.value.f_xi;
    theta_prev = theta;
    if (take_z) {
      theta = std::move(step_z.point);
      eval_theta = std::move(step_z.eval);
    } else {
      theta = std::move(step_v.point);
      eval_theta = std::move(step_v.eval);
    }
    t_prev = t;
    t = mom.t_next;

    out.iterations = n;
    record(n, take_z ? Branch::kZ : Branch::kV, step_z.alpha, step_v.alpha,
           step_z.backtracks + step_v.backtracks, step_z.degraded || step_v.degraded);

    history.push_back(eval_theta.value.f_xi);
    if (static_cast<int>(history.size()) > cfg.inner_window + 1) history.pop_front();
    if (n >= cfg.inner_window) {
      const double f_now = history.back();
      const double f_old = history.front();
      const double scale = std::abs(f_now);
      if (std::abs(f_now - f_old) <= cfg.varsigma * scale ||
          (scale == 0.0 && f_now == f_old)) {
        out.converged = true;
        break;
      }
    }
  }

  out.theta = std::move(theta);
  out.eval = std::move(eval_theta);
  return out;
}

InnerResult apg_inner(const ThetaVector& theta_start, double xi, const ProblemData& pd,
                      const SolverConfig& cfg, const IterationCallback& callback) {
  const PenaltyParams pp{xi};
  const auto spec = FeasibleSetSpec::of(pd);
  StepMemory memory;
  memory.inverse_lipschitz = 1.0 / conservative_lipschitz_bound(pd, pp).total();
  return apg_inner(
      theta_start, [&](const Eigen::VectorXd& x) { return evaluate(x, pd, pp); },
      [&](const Eigen::VectorXd& x) { return project(x, spec); }, cfg, memory, 1, xi, callback);
}

ThetaVector uniform_full_power(const ProblemData& pd) {
  return ThetaVector::Constant(static_cast<Eigen::Index>(pd.M) * pd.K,
                               std::sqrt(1.0 / (static_cast<double>(pd.N) * pd.K)));
}

namespace {

double se_shortfall(const Eigen::VectorXd& se, const ProblemData& pd) {
  return std::max(0.0, (pd.se_targets - se).maxCoeff());
}

// Penalty weight that makes the penalty commensurate with the EE term at the
// starting point. A feasible start has no violation to compare with, so the
// squared residual at zero power, sum_k a_k^2, serves as the unit.
double adaptive_xi0(const ThetaVector& theta0, const ProblemData& pd) {
  const auto e = eval_objective(theta0, pd, PenaltyParams{0.0});
  const double unit = pd.a.squaredNorm();
  return std::max(1.0, std::abs(e.ee_term) / std::max(e.penalty_sum, unit));
}

}  // namespace

SolverResult solve(const ProblemData& pd, const SolverConfig& cfg,
                   const IterationCallback& callback) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto spec = FeasibleSetSpec::of(pd);

  ThetaVector theta;
  if (cfg.theta0_mode == StartMode::kUserSupplied) {
    if (cfg.theta0.size() != static_cast<Eigen::Index>(pd.M) * pd.K)
      throw std::invalid_argument("solver: theta0 must have M*K entries");
    theta = project(cfg.theta0, spec);
  } else {
    theta = uniform_full_power(pd);
  }

  SolverResult res;
  double xi = cfg.xi0 ? *cfg.xi0 : adaptive_xi0(theta, pd);
  StepMemory memory;
  auto projector = [&](const Eigen::VectorXd& x) { return project(x, spec); };
  double prev_ee = 0.0;
  bool have_prev = false;

  for (int round = 1; round <= cfg.max_outer; ++round) {
    const PenaltyParams pp{xi};
    memory.inverse_lipschitz = 1.0 / conservative_lipschitz_bound(pd, pp).total();
    auto inner = apg_inner(
        theta, [&](const Eigen::VectorXd& x) { return evaluate(x, pd, pp); }, projector, cfg,
        memory, round, xi, callback);

    res.outer_iters = round;
    res.inner_iters_total += inner.iterations;
    res.backtracks_total += inner.backtracks;
    res.trace.insert(res.trace.end(), inner.trace.begin(), inner.trace.end());
    res.xi_final = xi;
    theta = std::move(inner.theta);

    const auto& e = inner.eval.value;
    const bool feasible = e.violation <= cfg.eps_feas && se_shortfall(e.se, pd) <= cfg.se_tol;
    const bool settled = have_prev && std::abs(e.ee_term - prev_ee) <=
                                          cfg.varsigma * std::abs(e.ee_term);
    if (feasible && (inner.converged || settled)) {
      res.converged = true;
      break;
    }
    prev_ee = e.ee_term;
    have_prev = true;
    xi *= cfg.rho_growth;
  }

  const auto e = eval_objective(theta, pd, PenaltyParams{0.0});
  res.theta_opt = theta;
  res.eta_opt = theta_to_eta(theta, pd.gamma);
  res.se_per_user = e.se;
  res.ee = e.ee_term;
  res.violation_final = e.violation;
  res.feasible = e.violation <= cfg.eps_feas && se_shortfall(e.se, pd) <= cfg.se_tol;
  res.power.fixed_w = pd.p_fix;
  res.power.optimized_w = e.power_w;
  res.power.transmit_w = e.power_w - pd.p_fix;
  res.power.traffic_w = total_power_w(theta, pd, true) - e.power_w;
  res.power.total_w = res.power.optimized_w + res.power.traffic_w;
  if (res.converged) {
    res.status = "converged";
  } else if (res.feasible) {
    res.status = "max_outer_feasible";
  } else {
    res.status = "max_outer_infeasible";
  }
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return res;
}

}  // namespace cfee
