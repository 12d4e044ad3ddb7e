#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "trajflow/array.hpp"
#include "trajflow/maze.hpp"

namespace trajflow {

// Average displacement error of a set of sampled trajectories against one
// ground truth: the L2 distance per step, averaged over steps and samples.
// `per_step` averages over samples only; `best` is the lowest single-sample
// ADE (the usual multimodal min-over-samples metric).
struct AdeResult {
    double mean = 0.0;
    double best = 0.0;
    std::vector<double> per_step;
};

AdeResult ade(const std::vector<Array>& samples, const Array& truth);

struct HorizonError {
    std::size_t dim = 0;
    std::size_t step = 0;  // horizon index, 0-based
    double mae = 0.0;
    double rmse = 0.0;
};

// Per-dimension MAE / RMSE at selected horizon steps, pooled over samples.
std::vector<HorizonError> mae_rmse_at(const std::vector<Array>& samples, const Array& truth,
                                      const std::vector<std::size_t>& steps);

// Goal-reaching reward of one executed [H x 2] path: one point per step spent
// within one cell radius of the goal, counting only steps before the first
// wall contact. Throws ConfigError if the goal lies in a wall.
double maze_goal_reward(const MazeSpec& maze, const Array& traj,
                        const std::array<double, 2>& goal);

// Reward normalized against a reference path: 100 * reward / expert, clamped
// to [0, 150]. The reference must earn a positive reward.
double maze_score(const MazeSpec& maze, const Array& traj, const std::array<double, 2>& goal,
                  double expert_reward);

// Fraction of sampled paths that touch a wall.
double collision_rate(const MazeSpec& maze, const std::vector<Array>& samples);

// A flat bundle of evaluation outputs with stable serialization: scalars as
// sorted key=value lines, per-step curves as one CSV (step, <name>...).
struct EvalReport {
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> curves;

    void write_scalars(const std::string& path) const;
    void write_curves_csv(const std::string& path) const;
};

}  // namespace trajflow
