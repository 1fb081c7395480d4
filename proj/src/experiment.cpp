#include "cfee/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace cfee {

namespace fs = std::filesystem;

void ExperimentSpec::validate() const {
  if (M.empty() || K.empty() || N.empty() || tau_c.empty() || tau_p.empty() || se_target.empty())
    throw std::invalid_argument("experiment: every sweep list must be nonempty");
  if (realizations < 1) throw std::invalid_argument("experiment: realizations must be >= 1");
  if (workers < 1) throw std::invalid_argument("experiment: workers must be >= 1");
  for (double s : se_target) {
    if (!(s > 0.0)) throw std::invalid_argument("experiment: SE targets must be positive");
  }
  for (const auto& p : sweep_points(*this)) point_config(*this, p, 0).validate();
  solver.validate();
  power_model_from_json(power_model, 1);
}

std::size_t ExperimentSpec::point_count() const {
  return M.size() * K.size() * N.size() * tau_c.size() * tau_p.size() * se_target.size();
}

namespace {

template <typename T>
std::vector<T> list_field(const Json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("experiment field '") + key + "': " + e.what());
  }
}

std::string num(double x) { return fmt::format("{:.10g}", x); }

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ExperimentSpec experiment_spec_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment spec must be a JSON object");
  ExperimentSpec s;
  if (j.contains("scenario")) {
    // Sweepable keys may hold lists; strip them before reading the scalar base.
    Json base = j.at("scenario");
    if (!base.is_object()) throw std::invalid_argument("'scenario' must be an object");
    s.M = list_field<int>(base, "M", s.M);
    s.K = list_field<int>(base, "K", s.K);
    s.N = list_field<int>(base, "N", s.N);
    s.tau_c = list_field<int>(base, "tau_c", s.tau_c);
    s.tau_p = list_field<int>(base, "tau_p", s.tau_p);
    for (const char* key : {"M", "K", "N", "tau_c", "tau_p"}) base.erase(key);
    s.base = scenario_config_from_json(base);
  }
  s.se_target = list_field<double>(j, "se_target", s.se_target);
  if (j.contains("realizations")) s.realizations = j.at("realizations").get<int>();
  if (j.contains("master_seed")) s.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("solver")) s.solver = solver_config_from_json(j.at("solver"));
  if (j.contains("power_model")) s.power_model = j.at("power_model");
  if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("workers")) s.workers = j.at("workers").get<int>();
  if (j.contains("emit")) {
    const auto& e = j.at("emit");
    if (e.contains("trace")) s.emit.trace = e.at("trace").get<bool>();
    if (e.contains("summary")) s.emit.summary = e.at("summary").get<bool>();
    if (e.contains("timing")) s.emit.timing = e.at("timing").get<bool>();
  }
  s.validate();
  return s;
}

Json to_json(const ExperimentSpec& s) {
  Json scenario = to_json(s.base);
  scenario.erase("seed");
  scenario["M"] = s.M;
  scenario["K"] = s.K;
  scenario["N"] = s.N;
  scenario["tau_c"] = s.tau_c;
  scenario["tau_p"] = s.tau_p;
  return Json{{"scenario", scenario},
              {"se_target", s.se_target},
              {"realizations", s.realizations},
              {"master_seed", s.master_seed},
              {"solver", to_json(s.solver)},
              {"power_model", s.power_model},
              {"output_dir", s.output_dir},
              {"workers", s.workers},
              {"emit", {{"trace", s.emit.trace}, {"summary", s.emit.summary}, {"timing", s.emit.timing}}}};
}

std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec) {
  std::vector<SweepPoint> pts;
  for (int M : spec.M)
    for (int K : spec.K)
      for (int N : spec.N)
        for (int tc : spec.tau_c)
          for (int tp : spec.tau_p)
            for (double so : spec.se_target) pts.push_back({M, K, N, tc, tp, so});
  return pts;
}

ScenarioConfig point_config(const ExperimentSpec& spec, const SweepPoint& p, std::uint64_t seed) {
  ScenarioConfig c = spec.base;
  c.M = p.M;
  c.K = p.K;
  c.N = p.N;
  c.tau_c = p.tau_c;
  c.tau_p = p.tau_p;
  c.seed = seed;
  return c;
}

void emit_convergence_data(const std::vector<IterationRecord>& trace, std::ostream& out) {
  out << "outer_iter,inner_iter,xi,f_xi,ee_Mbit_per_J,penalty_sum,violation,alpha_y,alpha_theta,"
         "branch\n";
  for (const auto& r : trace) {
    fmt::print(out, "{},{},{:.6e},{:.17g},{:.12g},{:.6e},{:.6e},{:.6e},{:.6e},{}\n", r.outer,
               r.inner, r.xi, r.f_xi, r.ee_term / 1e6, r.penalty_sum, r.violation, r.alpha_y,
               r.alpha_theta, branch_name(r.branch));
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, bool timing, std::ostream& out) {
  out << "M,K,N,tau_c,tau_p,se_target,runs,mean_ee_Mbit_per_J,median_ee_Mbit_per_J,mean_sum_se,"
         "feasibility_rate,mean_inner_iters,mean_outer_iters";
  out << (timing ? ",mean_wall_time_s\n" : "\n");
  for (const auto& r : rows) {
    const auto& c = r.coords;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", c.M, c.K, c.N, c.tau_c, c.tau_p,
                       num(c.se_target), r.runs, num(r.mean_ee_mbit_per_j),
                       num(r.median_ee_mbit_per_j), num(r.mean_sum_se), num(r.feasibility_rate),
                       num(r.mean_inner_iters), num(r.mean_outer_iters));
    out << (timing ? "," + num(r.mean_wall_time_s) + "\n" : "\n");
  }
}

void write_runs_csv(const std::vector<RunRecord>& runs, bool timing, std::ostream& out) {
  out << "point,realization,seed,M,K,N,tau_c,tau_p,se_target,ee_Mbit_per_J,sum_se,min_se,"
         "violation,feasible,status,outer_iters,inner_iters,backtracks";
  out << (timing ? ",wall_time_s\n" : "\n");
  for (const auto& r : runs) {
    const auto& c = r.coords;
    const auto& res = r.result;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{:.6e},{},{},{},{},{}", r.point,
                       r.realization, r.seed, c.M, c.K, c.N, c.tau_c, c.tau_p, num(c.se_target),
                       num(res.ee / 1e6), num(res.se_per_user.sum()),
                       num(res.se_per_user.minCoeff()), res.violation_final, res.feasible ? 1 : 0,
                       res.status, res.outer_iters, res.inner_iters_total, res.backtracks_total);
    out << (timing ? "," + num(res.wall_time_s) + "\n" : "\n");
  }
}

Json run_sidecar(const ExperimentSpec& spec, const RunRecord& run) {
  const auto& res = run.result;
  const auto cfg = point_config(spec, run.coords, run.seed);
  return Json{{"point", run.point},
              {"realization", run.realization},
              {"master_seed", spec.master_seed},
              {"seed", run.seed},
              {"scenario", to_json(cfg)},
              {"se_target", run.coords.se_target},
              {"power_model", spec.power_model},
              {"solver", to_json(spec.solver)},
              {"status", res.status},
              {"feasible", res.feasible},
              {"ee_bit_per_joule", res.ee},
              {"se_per_user", to_json(res.se_per_user)},
              {"violation", res.violation_final},
              {"xi_final", res.xi_final},
              {"outer_iters", res.outer_iters},
              {"inner_iters", res.inner_iters_total},
              {"power_w",
               {{"fixed", res.power.fixed_w},
                {"transmit", res.power.transmit_w},
                {"optimized", res.power.optimized_w},
                {"traffic", res.power.traffic_w},
                {"total", res.power.total_w}}},
              {"theta", to_json(res.theta_opt)}};
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto points = sweep_points(spec);
  const std::size_t R = static_cast<std::size_t>(spec.realizations);
  const std::size_t total = points.size() * R;

  const fs::path root(spec.output_dir);
  ensure_dir(root);
  if (spec.emit.trace) ensure_dir(root / "traces");
  ensure_dir(root / "runs");

  ExperimentOutput out;
  out.runs.resize(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      try {
        RunRecord rec;
        rec.point = job / R;
        rec.realization = static_cast<int>(job % R);
        rec.coords = points[rec.point];
        rec.seed = mix_seed(spec.master_seed, rec.point, static_cast<std::uint64_t>(rec.realization));
        const auto scenario = generate_scenario(point_config(spec, rec.coords, rec.seed));
        const auto power = power_model_from_json(spec.power_model, rec.coords.M);
        const auto pd = precompute(scenario, power,
                                   Eigen::VectorXd::Constant(rec.coords.K, rec.coords.se_target));
        rec.result = solve(pd, spec.solver);
        out.runs[job] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };

  const int n_threads = std::min<int>(spec.workers, static_cast<int>(total));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  for (std::size_t p = 0; p < points.size(); ++p) {
    SummaryRow row;
    row.coords = points[p];
    row.runs = spec.realizations;
    std::vector<double> ees;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& res = out.runs[p * R + r].result;
      ees.push_back(res.ee / 1e6);
      row.mean_sum_se += res.se_per_user.sum();
      row.feasibility_rate += res.feasible ? 1.0 : 0.0;
      row.mean_inner_iters += res.inner_iters_total;
      row.mean_outer_iters += res.outer_iters;
      row.mean_wall_time_s += res.wall_time_s;
    }
    for (double e : ees) row.mean_ee_mbit_per_j += e;
    const double n = static_cast<double>(R);
    row.mean_ee_mbit_per_j /= n;
    row.median_ee_mbit_per_j = median(ees);
    row.mean_sum_se /= n;
    row.feasibility_rate /= n;
    row.mean_inner_iters /= n;
    row.mean_outer_iters /= n;
    row.mean_wall_time_s /= n;
    out.summary.push_back(row);
  }

  for (const auto& run : out.runs) {
    const auto tag = fmt::format("p{}_r{}", run.point, run.realization);
    if (spec.emit.trace) {
      std::ostringstream os;
      emit_convergence_data(run.result.trace, os);
      write_text(root / "traces" / ("trace_" + tag + ".csv"), os.str());
    }
    write_text(root / "runs" / ("run_" + tag + ".json"), run_sidecar(spec, run).dump(2) + "\n");
  }
  if (spec.emit.summary) {
    std::ostringstream os;
    write_summary_csv(out.summary, spec.emit.timing, os);
    write_text(root / "summary.csv", os.str());
  }
  std::ostringstream os;
  write_runs_csv(out.runs, spec.emit.timing, os);
  write_text(root / "runs.csv", os.str());
  return out;
}

}  // namespace cfee
