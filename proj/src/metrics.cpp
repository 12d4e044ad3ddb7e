#include "trajflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "trajflow/csv.hpp"
#include "trajflow/errors.hpp"

namespace trajflow {

AdeResult ade(const std::vector<Array>& samples, const Array& truth) {
    if (samples.empty()) throw UsageError("ade: no samples");
    if (truth.ndim() != 2) throw ShapeError("ade: truth must be [H x D]");
    const std::size_t h = truth.dim(0), d = truth.dim(1);

    AdeResult res;
    res.per_step.assign(h, 0.0);
    res.best = std::numeric_limits<double>::infinity();
    for (const Array& s : samples) {
        if (!s.same_shape(truth)) {
            throw ShapeError("ade: sample " + shape_str(s.shape()) + " vs truth " +
                             shape_str(truth.shape()));
        }
        double sample_sum = 0.0;
        for (std::size_t r = 0; r < h; ++r) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = s.at(r, c) - truth.at(r, c);
                sq += diff * diff;
            }
            const double dist = std::sqrt(sq);
            res.per_step[r] += dist;
            sample_sum += dist;
        }
        res.best = std::min(res.best, sample_sum / static_cast<double>(h));
    }
    double total = 0.0;
    for (double& v : res.per_step) {
        v /= static_cast<double>(samples.size());
        total += v;
    }
    res.mean = total / static_cast<double>(h);
    return res;
}

std::vector<HorizonError> mae_rmse_at(const std::vector<Array>& samples, const Array& truth,
                                      const std::vector<std::size_t>& steps) {
    if (samples.empty()) throw UsageError("mae_rmse: no samples");
    const std::size_t h = truth.dim(0), d = truth.dim(1);
    std::vector<HorizonError> out;
    for (std::size_t step : steps) {
        if (step >= h) throw DomainError("mae_rmse: step " + std::to_string(step) +
                                         " outside horizon " + std::to_string(h));
        for (std::size_t c = 0; c < d; ++c) {
            HorizonError e;
            e.dim = c;
            e.step = step;
            double abs_sum = 0.0, sq_sum = 0.0;
            for (const Array& s : samples) {
                if (!s.same_shape(truth)) throw ShapeError("mae_rmse: sample shape mismatch");
                const double diff = s.at(step, c) - truth.at(step, c);
                abs_sum += std::abs(diff);
                sq_sum += diff * diff;
            }
            e.mae = abs_sum / static_cast<double>(samples.size());
            e.rmse = std::sqrt(sq_sum / static_cast<double>(samples.size()));
            out.push_back(e);
        }
    }
    return out;
}

double maze_goal_reward(const MazeSpec& maze, const Array& traj,
                        const std::array<double, 2>& goal) {
    const long gr = static_cast<long>(std::floor(goal[1] / maze.cell_size));
    const long gc = static_cast<long>(std::floor(goal[0] / maze.cell_size));
    if (maze.occupied(gr, gc)) {
        throw ConfigError("maze score: goal (" + std::to_string(goal[0]) + ", " +
                          std::to_string(goal[1]) + ") lies in a wall");
    }
    const std::size_t valid = collision_free_prefix(maze, traj);
    double reward = 0.0;
    for (std::size_t i = 0; i < valid; ++i) {
        const double dx = traj.at(i, 0) - goal[0];
        const double dy = traj.at(i, 1) - goal[1];
        if (std::hypot(dx, dy) <= maze.cell_size) reward += 1.0;
    }
    return reward;
}

double maze_score(const MazeSpec& maze, const Array& traj, const std::array<double, 2>& goal,
                  double expert_reward) {
    if (expert_reward <= 0.0) {
        throw ConfigError("maze score: reference reward must be positive");
    }
    const double ratio = maze_goal_reward(maze, traj, goal) / expert_reward;
    return 100.0 * std::clamp(ratio, 0.0, 1.5);
}

double collision_rate(const MazeSpec& maze, const std::vector<Array>& samples) {
    if (samples.empty()) throw UsageError("collision_rate: no samples");
    std::size_t hits = 0;
    for (const Array& s : samples)
        if (trajectory_collides(maze, s)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

void EvalReport::write_scalars(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("report: cannot write " + path);
    for (const auto& [key, value] : scalars) out << key << '=' << format_double(value) << '\n';
    if (!out) throw IoError("report: failed writing " + path);
}

void EvalReport::write_curves_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("report: cannot write " + path);
    std::size_t len = 0;
    for (const auto& [name, curve] : curves) len = std::max(len, curve.size());
    std::vector<std::string> header{"step"};
    for (const auto& [name, curve] : curves) header.push_back(name);
    write_csv_row(out, header);
    for (std::size_t i = 0; i < len; ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (const auto& [name, curve] : curves) {
            row.push_back(i < curve.size() ? format_double(curve[i]) : "");
        }
        write_csv_row(out, row);
    }
    if (!out) throw IoError("report: failed writing " + path);
}

}  // namespace trajflow
