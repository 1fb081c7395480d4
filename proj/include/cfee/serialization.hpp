#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cfee/problem.hpp"
#include "cfee/scenario.hpp"
#include "cfee/solver.hpp"

namespace cfee {

using Json = nlohmann::json;

/// Missing keys keep their defaults; wrong types throw std::invalid_argument.
ScenarioConfig scenario_config_from_json(const Json& j, ScenarioConfig base = {});
Json to_json(const ScenarioConfig& c);

/// Replay format: the config plus every realized quantity, so a scenario can
/// be reloaded without regenerating it. Matrices are stored row-major as
/// nested arrays (M rows of K entries).
Json to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

Json to_json(const PowerModel& p);
/// Scalars broadcast to all M APs; arrays must have M entries.
PowerModel power_model_from_json(const Json& j, int M);

/// Overrides on top of `base`; step mode is "bb" or "fixed".
SolverConfig solver_config_from_json(const Json& j, SolverConfig base = {});
Json to_json(const SolverConfig& c);

Json to_json(const Eigen::VectorXd& v);
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const Json& j);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// File system failure (as opposed to malformed content).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws IoError when the file cannot be opened or written and
/// std::invalid_argument when its content does not parse.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace cfee
