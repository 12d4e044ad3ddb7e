#pragma once

#include <cstdint>
#include <vector>

#include "trajflow/dataset.hpp"
#include "trajflow/maze.hpp"
#include "trajflow/metrics.hpp"
#include "trajflow/sampler.hpp"

namespace trajflow {

// Test-split quality sweep shared by the eval and benchmark commands.

struct EvalOptions {
    int num_samples = 8;
    std::size_t max_items = 32;
    std::uint64_t seed = 0;
    bool constrain_endpoints = true;
    int goal_index = -1;
};

struct EvalRow {
    int num_steps = 0;
    double ade = 0.0;
    double min_ade = 0.0;
    std::vector<double> ade_per_step;
    double network_calls_per_sample = 0.0;
    // maze only
    bool has_maze = false;
    double maze_score = 0.0;
    double collision = 0.0;
    // set for every domain: per-dimension errors at a few horizon steps
    std::vector<HorizonError> horizon_errors;
};

// Samples the model on (up to max_items of) the test split at one step count
// and pools the metrics. Raw-unit metrics: samples are denormalized before
// comparison. When `maze` is non-null, goal scores and collision rates are
// added; the per-item reference reward comes from the item's own ground
// truth. Per-item noise seeds derive from opt.seed, so rows are reproducible
// and independent of evaluation order.
EvalRow evaluate_at(const GenerativeModel& model, const TrajectoryDataset& ds,
                    const MazeSpec* maze, const EvalOptions& opt, int num_steps);

// Items the sweep will use: the test split, capped at max_items.
std::vector<std::size_t> eval_items(const TrajectoryDataset& ds, std::size_t max_items);

}  // namespace trajflow
