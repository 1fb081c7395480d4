#include "cfee/serialization.hpp"

#include <fstream>
#include <stdexcept>

namespace cfee {

namespace {

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("field '") + key + "': " + e.what());
  }
}

Eigen::VectorXd broadcast(const Json& j, const char* key, int M, double fallback) {
  if (!j.contains(key)) return Eigen::VectorXd::Constant(M, fallback);
  const auto& v = j.at(key);
  if (v.is_number()) return Eigen::VectorXd::Constant(M, v.get<double>());
  auto out = vector_from_json(v);
  if (out.size() != M)
    throw std::invalid_argument(std::string("power model '") + key + "' needs M entries");
  return out;
}

}  // namespace

ScenarioConfig scenario_config_from_json(const Json& j, ScenarioConfig c) {
  if (!j.is_object()) throw std::invalid_argument("scenario config must be a JSON object");
  read_field(j, "M", c.M);
  read_field(j, "K", c.K);
  read_field(j, "N", c.N);
  read_field(j, "area_side_km", c.area_side_km);
  read_field(j, "d0_km", c.d0_km);
  read_field(j, "d1_km", c.d1_km);
  read_field(j, "L_db", c.L_db);
  read_field(j, "sigma_sh_db", c.sigma_sh_db);
  read_field(j, "tau_c", c.tau_c);
  read_field(j, "tau_p", c.tau_p);
  read_field(j, "bandwidth_hz", c.bandwidth_hz);
  read_field(j, "p_down_w", c.p_down_w);
  read_field(j, "p_pilot_w", c.p_pilot_w);
  read_field(j, "noise_figure_db", c.noise_figure_db);
  read_field(j, "seed", c.seed);
  return c;
}

Json to_json(const ScenarioConfig& c) {
  return Json{{"M", c.M},
              {"K", c.K},
              {"N", c.N},
              {"area_side_km", c.area_side_km},
              {"d0_km", c.d0_km},
              {"d1_km", c.d1_km},
              {"L_db", c.L_db},
              {"sigma_sh_db", c.sigma_sh_db},
              {"tau_c", c.tau_c},
              {"tau_p", c.tau_p},
              {"bandwidth_hz", c.bandwidth_hz},
              {"p_down_w", c.p_down_w},
              {"p_pilot_w", c.p_pilot_w},
              {"noise_figure_db", c.noise_figure_db},
              {"seed", c.seed}};
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(m.row(r))));
  return rows;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("expected a JSON array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a nonempty nested array");
  const auto cols = vector_from_json(j[0]).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    auto row = vector_from_json(j[r]);
    if (row.size() != cols) throw std::invalid_argument("ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Json to_json(const Scenario& s) {
  Json aps = Json::array();
  for (const auto& p : s.ap_xy) aps.push_back({p.x, p.y});
  Json users = Json::array();
  for (const auto& p : s.user_xy) users.push_back({p.x, p.y});
  return Json{{"config", to_json(s.config)},
              {"ap_xy", aps},
              {"user_xy", users},
              {"beta", matrix_to_json(s.beta)},
              {"gamma", matrix_to_json(s.gamma)},
              {"pilot_of", s.pilot_of},
              {"rho_d", s.rho_d},
              {"rho_p", s.rho_p}};
}

Scenario scenario_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("config"))
    throw std::invalid_argument("scenario file needs a 'config' object");
  Scenario s;
  s.config = scenario_config_from_json(j.at("config"));
  s.config.validate();
  const int M = s.config.M;
  const int K = s.config.K;
  try {
    for (const auto& p : j.at("ap_xy")) s.ap_xy.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& p : j.at("user_xy"))
      s.user_xy.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    s.pilot_of = j.at("pilot_of").get<std::vector<int>>();
    s.rho_d = j.at("rho_d").get<double>();
    s.rho_p = j.at("rho_p").get<double>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("scenario file: ") + e.what());
  }
  s.beta = matrix_from_json(j.at("beta"));
  s.gamma = matrix_from_json(j.at("gamma"));
  if (static_cast<int>(s.ap_xy.size()) != M || static_cast<int>(s.user_xy.size()) != K ||
      static_cast<int>(s.pilot_of.size()) != K || s.beta.rows() != M || s.beta.cols() != K ||
      s.gamma.rows() != M || s.gamma.cols() != K)
    throw std::invalid_argument("scenario file: dimensions disagree with config");
  for (int p : s.pilot_of) {
    if (p < 0 || p >= s.config.tau_p) throw std::invalid_argument("scenario file: bad pilot index");
  }
  return s;
}

Json to_json(const PowerModel& p) {
  return Json{{"alpha", to_json(p.alpha)},
              {"p_tc_w", to_json(p.p_tc)},
              {"p_0_w", to_json(p.p_0)},
              {"p_bt_w_per_bps", to_json(p.p_bt)}};
}

PowerModel power_model_from_json(const Json& j, int M) {
  const auto d = PowerModel::uniform(1);
  PowerModel p;
  p.alpha = broadcast(j, "alpha", M, d.alpha[0]);
  p.p_tc = broadcast(j, "p_tc_w", M, d.p_tc[0]);
  p.p_0 = broadcast(j, "p_0_w", M, d.p_0[0]);
  p.p_bt = broadcast(j, "p_bt_w_per_bps", M, d.p_bt[0]);
  return p;
}

SolverConfig solver_config_from_json(const Json& j, SolverConfig c) {
  if (!j.is_object()) throw std::invalid_argument("solver config must be a JSON object");
  if (j.contains("alpha_mode")) {
    const auto mode = j.at("alpha_mode").get<std::string>();
    if (mode == "bb") {
      c.alpha_mode = StepMode::kBBLineSearch;
    } else if (mode == "fixed") {
      c.alpha_mode = StepMode::kFixedFromLipschitz;
    } else {
      throw std::invalid_argument("alpha_mode must be 'bb' or 'fixed'");
    }
  }
  read_field(j, "nu", c.nu);
  read_field(j, "delta", c.delta);
  read_field(j, "varsigma", c.varsigma);
  read_field(j, "inner_window", c.inner_window);
  if (j.contains("xi0") && !j.at("xi0").is_null()) {
    double xi0 = 0.0;
    read_field(j, "xi0", xi0);
    c.xi0 = xi0;
  }
  read_field(j, "rho_growth", c.rho_growth);
  read_field(j, "eps_feas", c.eps_feas);
  read_field(j, "se_tol", c.se_tol);
  read_field(j, "max_inner", c.max_inner);
  read_field(j, "max_outer", c.max_outer);
  read_field(j, "max_backtracks", c.max_backtracks);
  c.validate();
  return c;
}

Json to_json(const SolverConfig& c) {
  return Json{{"alpha_mode", c.alpha_mode == StepMode::kBBLineSearch ? "bb" : "fixed"},
              {"nu", c.nu},
              {"delta", c.delta},
              {"varsigma", c.varsigma},
              {"inner_window", c.inner_window},
              {"xi0", c.xi0 ? Json(*c.xi0) : Json(nullptr)},
              {"rho_growth", c.rho_growth},
              {"eps_feas", c.eps_feas},
              {"se_tol", c.se_tol},
              {"max_inner", c.max_inner},
              {"max_outer", c.max_outer},
              {"max_backtracks", c.max_backtracks}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("cannot parse " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace cfee
