#pragma once

#include <string>
#include <vector>

#include "trajflow/dataset.hpp"

namespace trajflow {

// Trajectory interchange format: header `traj_id,t,dim_0..dim_{D-1}`, one row
// per observation, rows of one trajectory grouped with strictly increasing t.

void write_trajectories_csv(const std::string& path, const std::vector<Array>& trajs);

struct CsvSchema {
    int past = 0;     // leading states that become the context
    int horizon = 0;  // predicted states
};

// Reads user trajectories and resamples each by linear interpolation in t to
// past + horizon evenly spaced samples. Missing/unknown columns raise
// SchemaError; malformed cells and non-increasing t raise DataError with the
// line number. A file with no data rows gives an empty dataset.
TrajectoryDataset load_trajectory_csv(const std::string& path, const CsvSchema& schema);

}  // namespace trajflow
