// Command-line front end: scenario generation, single solves, sweeps and the
// oracle self-check.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cfee/experiment.hpp"
#include "cfee/objective.hpp"
#include "cfee/oracles.hpp"
#include "cfee/projection.hpp"
#include "cfee/serialization.hpp"
#include "cfee/solver.hpp"

namespace {

using namespace cfee;

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kInternal = 3 };

struct ScenarioFlags {
  std::string config_file;
  std::optional<int> M, K, N, tau_c, tau_p;
  std::optional<double> area, sigma, bandwidth, p_down, p_pilot, nf;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app, bool with_seed = true) {
    app->add_option("--config", config_file, "JSON scenario config (flags override it)");
    app->add_option("-M,--aps", M, "number of access points");
    app->add_option("-K,--users", K, "number of users");
    app->add_option("-N,--antennas", N, "antennas per access point");
    app->add_option("--tau-c", tau_c, "coherence interval (symbols)");
    app->add_option("--tau-p", tau_p, "pilot length (symbols)");
    app->add_option("--area-km", area, "side of the square area (km)");
    app->add_option("--sigma-sh-db", sigma, "shadowing standard deviation (dB)");
    app->add_option("--bandwidth-hz", bandwidth, "bandwidth (Hz)");
    app->add_option("--p-down-w", p_down, "downlink power per AP (W)");
    app->add_option("--p-pilot-w", p_pilot, "pilot power (W)");
    app->add_option("--noise-figure-db", nf, "receiver noise figure (dB)");
    if (with_seed) app->add_option("--seed", seed, "scenario seed");
  }

  ScenarioConfig build() const {
    ScenarioConfig c;
    if (!config_file.empty()) c = scenario_config_from_json(read_json_file(config_file));
    if (M) c.M = *M;
    if (K) c.K = *K;
    if (N) c.N = *N;
    if (tau_c) c.tau_c = *tau_c;
    if (tau_p) c.tau_p = *tau_p;
    if (area) c.area_side_km = *area;
    if (sigma) c.sigma_sh_db = *sigma;
    if (bandwidth) c.bandwidth_hz = *bandwidth;
    if (p_down) c.p_down_w = *p_down;
    if (p_pilot) c.p_pilot_w = *p_pilot;
    if (nf) c.noise_figure_db = *nf;
    if (seed) c.seed = *seed;
    c.validate();
    return c;
  }
};

struct SolverFlags {
  std::string config_file;
  std::string alpha_mode;
  std::optional<double> eps_feas, varsigma, xi0, rho_growth, nu, delta;
  std::optional<int> max_inner, max_outer, max_backtracks;

  void add(CLI::App* app) {
    app->add_option("--solver-config", config_file, "JSON solver settings");
    app->add_option("--alpha-mode", alpha_mode, "step rule")->check(CLI::IsMember({"bb", "fixed"}));
    app->add_option("--eps-feas", eps_feas, "QoS residual tolerance");
    app->add_option("--varsigma", varsigma, "inner relative progress tolerance");
    app->add_option("--xi0", xi0, "initial penalty (adaptive when omitted)");
    app->add_option("--rho-growth", rho_growth, "penalty growth factor");
    app->add_option("--nu", nu, "backtracking shrink");
    app->add_option("--delta", delta, "sufficient-increase margin");
    app->add_option("--max-inner", max_inner, "inner iteration cap");
    app->add_option("--max-outer", max_outer, "penalty round cap");
    app->add_option("--max-backtracks", max_backtracks, "line-search shrink cap");
  }

  SolverConfig build(SolverConfig c = {}) const {
    if (!config_file.empty()) c = solver_config_from_json(read_json_file(config_file), c);
    if (alpha_mode == "fixed") c.alpha_mode = StepMode::kFixedFromLipschitz;
    if (alpha_mode == "bb") c.alpha_mode = StepMode::kBBLineSearch;
    if (eps_feas) c.eps_feas = *eps_feas;
    if (varsigma) c.varsigma = *varsigma;
    if (xi0) c.xi0 = *xi0;
    if (rho_growth) c.rho_growth = *rho_growth;
    if (nu) c.nu = *nu;
    if (delta) c.delta = *delta;
    if (max_inner) c.max_inner = *max_inner;
    if (max_outer) c.max_outer = *max_outer;
    if (max_backtracks) c.max_backtracks = *max_backtracks;
    c.validate();
    return c;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

int cmd_generate(const ScenarioFlags& sf, const std::string& out) {
  const auto scenario = generate_scenario(sf.build());
  emit(out, to_json(scenario).dump(2) + "\n");
  return kOk;
}

struct SolveArgs {
  std::string scenario_file;
  std::string power_file;
  double se_target = 1.0;
  std::string trace_file;
  std::string out_file;
};

int cmd_solve(const ScenarioFlags& sf, const SolverFlags& vf, const SolveArgs& a) {
  const Scenario scenario = a.scenario_file.empty()
                                ? generate_scenario(sf.build())
                                : scenario_from_json(read_json_file(a.scenario_file));
  const Json power_json = a.power_file.empty() ? Json::object() : read_json_file(a.power_file);
  const auto power = power_model_from_json(power_json, scenario.config.M);
  const auto pd =
      precompute(scenario, power, Eigen::VectorXd::Constant(scenario.config.K, a.se_target));
  const auto cfg = vf.build();

  std::ofstream trace_stream;
  if (!a.trace_file.empty()) {
    trace_stream.open(a.trace_file, std::ios::binary);
    if (!trace_stream) throw IoError("cannot write " + a.trace_file);
  }
  const auto res = solve(pd, cfg);
  if (trace_stream.is_open()) emit_convergence_data(res.trace, trace_stream);

  Json j{{"status", res.status},
         {"feasible", res.feasible},
         {"ee_bit_per_joule", res.ee},
         {"se_per_user", to_json(res.se_per_user)},
         {"violation", res.violation_final},
         {"xi_final", res.xi_final},
         {"outer_iters", res.outer_iters},
         {"inner_iters", res.inner_iters_total},
         {"backtracks", res.backtracks_total},
         {"wall_time_s", res.wall_time_s},
         {"power_w",
          {{"fixed", res.power.fixed_w},
           {"transmit", res.power.transmit_w},
           {"optimized", res.power.optimized_w},
           {"traffic", res.power.traffic_w},
           {"total", res.power.total_w}}},
         {"scenario", to_json(scenario.config)},
         {"solver", to_json(cfg)},
         {"theta", to_json(res.theta_opt)},
         {"eta", matrix_to_json(res.eta_opt)}};
  if (!a.out_file.empty()) write_json_file(a.out_file, j);
  std::cerr << fmt::format(
      "{}: EE {:.4f} Mbit/J, sum SE {:.4f} bit/s/Hz, min SE {:.4f}, violation {:.2e}, "
      "{} rounds / {} iterations, {:.3f} s\n",
      res.status, res.ee / 1e6, res.se_per_user.sum(), res.se_per_user.minCoeff(),
      res.violation_final, res.outer_iters, res.inner_iters_total, res.wall_time_s);
  return kOk;
}

struct SweepArgs {
  std::string spec_file;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<int> M, K, N, tau_c, tau_p;
  std::vector<double> se_target;
  std::optional<int> realizations, workers;
  bool no_trace = false;
  bool no_timing = false;
};

int cmd_sweep(const SweepArgs& a, const SolverFlags& vf) {
  ExperimentSpec spec;
  if (!a.spec_file.empty()) spec = experiment_spec_from_json(read_json_file(a.spec_file));
  spec.master_seed = a.seed;
  if (!a.out_dir.empty()) spec.output_dir = a.out_dir;
  if (!a.M.empty()) spec.M = a.M;
  if (!a.K.empty()) spec.K = a.K;
  if (!a.N.empty()) spec.N = a.N;
  if (!a.tau_c.empty()) spec.tau_c = a.tau_c;
  if (!a.tau_p.empty()) spec.tau_p = a.tau_p;
  if (!a.se_target.empty()) spec.se_target = a.se_target;
  if (a.realizations) spec.realizations = *a.realizations;
  if (a.workers) spec.workers = *a.workers;
  if (a.no_trace) spec.emit.trace = false;
  if (a.no_timing) spec.emit.timing = false;
  spec.solver = vf.build(spec.solver);
  spec.validate();

  const auto out = run_experiment(spec);
  int feasible = 0;
  for (const auto& r : out.runs) feasible += r.result.feasible ? 1 : 0;
  std::cerr << fmt::format("{} runs over {} points, {} feasible; results in {}\n", out.runs.size(),
                           out.summary.size(), feasible, spec.output_dir);
  return kOk;
}

// Quick oracle self-check on small random instances.
int cmd_check(std::uint64_t seed) {
  bool ok = true;
  auto report = [&](const oracle::OracleReport& r) {
    std::cout << oracle::to_string(r) << '\n';
    ok = ok && r.pass;
  };

  ScenarioConfig c;
  c.M = 8;
  c.K = 4;
  c.N = 2;
  c.tau_p = 2;
  c.seed = seed;
  const auto scenario = generate_scenario(c);
  const auto power = PowerModel::uniform(c.M);
  const Eigen::VectorXd targets = Eigen::VectorXd::Constant(c.K, 1.0);
  const auto pd = precompute(scenario, power, targets);
  const oracle::ReferenceModel ref(scenario, power, targets);
  const auto spec = FeasibleSetSpec::of(pd);

  Rng rng(mix_seed(seed, 7, 0));
  double worst_grad = 0.0;
  double worst_value = 0.0;
  double worst_se = 0.0;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd theta(pd.M * pd.K);
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] = 0.05 + 0.6 * rng.uniform();
    theta = 0.9 * project(theta, spec);
    for (double xi : {0.0, 1.0, 1e3}) {
      const auto e = evaluate(theta, pd, PenaltyParams{xi});
      const auto fd = oracle::fd_gradient([&](const Eigen::VectorXd& x) { return ref.penalized(x, xi); },
                                          theta);
      worst_grad = std::max(worst_grad, (e.gradient - fd).lpNorm<Eigen::Infinity>() /
                                            fd.lpNorm<Eigen::Infinity>());
      worst_value = std::max(worst_value, std::abs(e.value.f_xi - ref.penalized(theta, xi)) /
                                              std::abs(ref.penalized(theta, xi)));
    }
    const auto eta = theta_to_eta(theta, pd.gamma);
    const auto se_t = se_per_user_theta(theta, pd);
    const auto se_e = se_per_user_eta(eta, scenario);
    worst_se = std::max(worst_se, ((se_t - se_e).array().abs() / se_e.array()).maxCoeff());
  }
  report(oracle::compare("gradient vs finite differences", 0.0, worst_grad, 1e-6, false));
  report(oracle::compare("objective vs dense reference", 0.0, worst_value, 1e-10, false));
  report(oracle::compare("SE eta vs theta coordinates", 0.0, worst_se, 1e-10, false));

  double worst_proj = 0.0;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd u(3);
    for (int j = 0; j < 3; ++j) u[j] = 3.0 * rng.normal();
    const FeasibleSetSpec s3{1, 3, 1};
    const auto p = project(u, s3);
    const auto g = oracle::grid_project(u, 1, 3, 1, 1e-2);
    worst_proj = std::max(worst_proj, (p - u).norm() - (g - u).norm());
  }
  report(oracle::compare("projection optimality vs lattice (excess distance)", 0.0,
                         std::max(0.0, worst_proj), 1e-9, false));

  ScenarioConfig tiny;
  tiny.M = 1;
  tiny.K = 1;
  tiny.tau_p = 1;
  tiny.seed = seed;
  const auto ts = generate_scenario(tiny);
  const auto tp = PowerModel::uniform(1);
  const Eigen::VectorXd tt = Eigen::VectorXd::Constant(1, 0.01);
  const auto tpd = precompute(ts, tp, tt);
  const oracle::ReferenceModel tref(ts, tp, tt);
  SolverConfig cfg;
  cfg.varsigma = 1e-8;
  const auto res = solve(tpd, cfg);
  const auto grid = oracle::grid_maximize([&](const Eigen::VectorXd& x) { return tref.ee(x); }, 1, 1,
                                          1, 1e-4, [&](const Eigen::VectorXd& x) {
                                            return tref.residuals(x).maxCoeff() <= 0.0;
                                          });
  report(oracle::compare("single-link EE vs lattice maximum", grid.value, res.ee, 1e-3));
  return ok ? kOk : kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient power allocation for cell-free massive MIMO"};
  app.require_subcommand(1);

  ScenarioFlags gen_flags;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "generate a scenario and write it as JSON");
  gen_flags.add(gen);
  gen->add_option("-o,--out", gen_out, "output file (stdout by default)");

  ScenarioFlags solve_flags;
  SolverFlags solve_solver;
  SolveArgs solve_args;
  auto* sol = app.add_subcommand("solve", "solve one instance");
  solve_flags.add(sol);
  solve_solver.add(sol);
  sol->add_option("--scenario", solve_args.scenario_file, "scenario JSON from `generate`");
  sol->add_option("--power-model", solve_args.power_file, "JSON power model");
  sol->add_option("--se-target", solve_args.se_target, "per-user SE target (bit/s/Hz)");
  sol->add_option("--trace", solve_args.trace_file, "write the convergence trace CSV here");
  sol->add_option("-o,--out", solve_args.out_file, "write the result JSON here");

  SweepArgs sweep_args;
  SolverFlags sweep_solver;
  auto* sw = app.add_subcommand("sweep", "Monte-Carlo sweep over scenario parameters");
  sw->add_option("--spec", sweep_args.spec_file, "JSON experiment spec");
  sw->add_option("--seed", sweep_args.seed, "master seed")->required();
  sw->add_option("-o,--out-dir", sweep_args.out_dir, "output directory");
  sw->add_option("-M,--aps", sweep_args.M, "list of AP counts");
  sw->add_option("-K,--users", sweep_args.K, "list of user counts");
  sw->add_option("-N,--antennas", sweep_args.N, "list of antenna counts");
  sw->add_option("--tau-c", sweep_args.tau_c, "list of coherence intervals");
  sw->add_option("--tau-p", sweep_args.tau_p, "list of pilot lengths");
  sw->add_option("--se-target", sweep_args.se_target, "list of SE targets");
  sw->add_option("-r,--realizations", sweep_args.realizations, "realizations per point");
  sw->add_option("-j,--workers", sweep_args.workers, "concurrent runs");
  sw->add_flag("--no-trace", sweep_args.no_trace, "skip per-run trace files");
  sw->add_flag("--no-timing", sweep_args.no_timing, "omit wall-time columns");
  sweep_solver.add(sw);

  std::uint64_t check_seed = 1;
  auto* chk = app.add_subcommand("check", "run the oracle self-check");
  chk->add_option("--seed", check_seed, "instance seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_flags, gen_out);
    if (*sol) return cmd_solve(solve_flags, solve_solver, solve_args);
    if (*sw) return cmd_sweep(sweep_args, sweep_solver);
    if (*chk) return cmd_check(check_seed);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
