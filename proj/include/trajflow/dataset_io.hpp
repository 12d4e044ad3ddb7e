#pragma once

#include <string>

#include "trajflow/dataset.hpp"

#include <json.hpp>

namespace trajflow {

// A dataset directory holds manifest.json (shape, layout, fitted stats,
// split sizes, provenance), trajectories.csv and contexts.csv. `extra` lands
// in the manifest under its own keys (domain kind, generator config, ...).
void save_dataset_dir(const std::string& dir, const TrajectoryDataset& ds,
                      const nlohmann::json& extra);

TrajectoryDataset load_dataset_dir(const std::string& dir);

nlohmann::json load_dataset_manifest(const std::string& dir);

}  // namespace trajflow
