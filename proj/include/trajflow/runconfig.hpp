#pragma once

#include <cstdint>
#include <string>

#include "trajflow/cfm.hpp"
#include "trajflow/flight.hpp"
#include "trajflow/maze.hpp"
#include "trajflow/net.hpp"
#include "trajflow/pursuit.hpp"
#include "trajflow/traj_csv.hpp"

#include <json.hpp>

namespace trajflow {

// Run configuration handling. A user file may set any subset of keys; the
// resolved form fills every default for the chosen domain kind, rejects
// unknown keys and type mismatches, and is what gets persisted next to the
// outputs. Re-running a command from a persisted resolved config reproduces
// the run.

nlohmann::json default_run_config(const std::string& domain_kind);

// Overlay `user` onto the defaults for user["domain"]["kind"] (default
// "pursuit"). Throws ConfigError on unknown keys or mismatched types.
nlohmann::json resolve_run_config(const nlohmann::json& user);

nlohmann::json load_json_file(const std::string& path);  // IoError / ConfigError
void write_json_file(const std::string& path, const nlohmann::json& j);

// Typed views of resolved sections.
MazeSpec maze_from_config(const nlohmann::json& domain);  // loads/parses the grid
PursuitScenario pursuit_from_config(const nlohmann::json& domain);
FlightScenario flight_from_config(const nlohmann::json& domain);
TrainerConfig trainer_from_config(const nlohmann::json& cfg);  // cfg = whole config
NetConfig net_from_config(const nlohmann::json& cfg, int horizon, int state_dim, int context_dim);

// Dataset described by config["domain"], generated with config["seed"].
TrajectoryDataset generate_dataset(const nlohmann::json& resolved_config);

// Prefix relative paths with $TRAJFLOW_OUTPUT_ROOT when it is set.
std::string resolve_output_dir(const std::string& dir);

// The grid used when domain.maze_file is empty.
extern const char* const kBuiltinMaze;

}  // namespace trajflow
