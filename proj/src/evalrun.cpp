#include "trajflow/evalrun.hpp"

#include <algorithm>
#include <cmath>

#include "trajflow/errors.hpp"

namespace trajflow {

std::vector<std::size_t> eval_items(const TrajectoryDataset& ds, std::size_t max_items) {
    std::vector<std::size_t> items = ds.test_idx;
    if (items.size() > max_items) items.resize(max_items);
    return items;
}

EvalRow evaluate_at(const GenerativeModel& model, const TrajectoryDataset& ds,
                    const MazeSpec* maze, const EvalOptions& opt, int num_steps) {
    if (opt.num_samples < 1) throw ConfigError("eval: num_samples must be >= 1");
    const std::vector<std::size_t> items = eval_items(ds, opt.max_items);
    if (items.empty()) throw DataError("eval: dataset has no test items");

    const std::size_t h = static_cast<std::size_t>(ds.horizon);
    const std::size_t d = static_cast<std::size_t>(ds.state_dim);
    const std::vector<std::size_t> mark_steps{0, h / 2, h - 1};

    EvalRow row;
    row.num_steps = num_steps;
    row.ade_per_step.assign(h, 0.0);
    row.has_maze = maze != nullptr;

    const SeededRng seed_root = SeededRng(opt.seed).stream("eval");
    SampleStats stats;

    double ade_sum = 0.0, min_ade_sum = 0.0, score_sum = 0.0;
    std::size_t collided = 0, total_samples = 0;
    std::vector<double> abs_sum(mark_steps.size() * d, 0.0), sq_sum(mark_steps.size() * d, 0.0);

    for (std::size_t item : items) {
        SampleRequest req;
        req.context = ds.normalized_context(item);
        req.num_steps = num_steps;
        req.num_samples = opt.num_samples;
        {
            SeededRng r = seed_root.stream(item);
            req.seed = r.next_u64();
        }
        if (opt.constrain_endpoints && ds.layout.kind == ContextLayout::Kind::endpoints) {
            PlanConstraint c;
            c.goal_index = opt.goal_index;
            const std::size_t len = req.context.size();
            for (std::size_t j = 0; j < d; ++j) {
                c.start.push_back(req.context[j]);
                c.goal.push_back(req.context[len - d + j]);
            }
            req.constraint = std::move(c);
        }

        std::vector<Array> samples = model.sample(req, &stats);
        for (Array& s : samples) s = ds.stats.denormalize(s);
        const Array& truth = ds.trajectories[item];

        const AdeResult a = ade(samples, truth);
        ade_sum += a.mean;
        min_ade_sum += a.best;
        for (std::size_t r = 0; r < h; ++r) row.ade_per_step[r] += a.per_step[r];

        for (const Array& s : samples) {
            for (std::size_t m = 0; m < mark_steps.size(); ++m) {
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = s.at(mark_steps[m], c) - truth.at(mark_steps[m], c);
                    abs_sum[m * d + c] += std::abs(diff);
                    sq_sum[m * d + c] += diff * diff;
                }
            }
        }
        total_samples += samples.size();

        if (maze) {
            const std::array<double, 2> goal{truth.at(h - 1, 0), truth.at(h - 1, 1)};
            const double expert = maze_goal_reward(*maze, truth, goal);
            double item_score = 0.0;
            for (const Array& s : samples) {
                item_score += maze_score(*maze, s, goal, expert);
                if (trajectory_collides(*maze, s)) ++collided;
            }
            score_sum += item_score / static_cast<double>(samples.size());
        }
    }

    const double n_items = static_cast<double>(items.size());
    row.ade = ade_sum / n_items;
    row.min_ade = min_ade_sum / n_items;
    for (double& v : row.ade_per_step) v /= n_items;
    row.network_calls_per_sample =
        static_cast<double>(stats.network_calls) / static_cast<double>(total_samples);
    if (maze) {
        row.maze_score = score_sum / n_items;
        row.collision = static_cast<double>(collided) / static_cast<double>(total_samples);
    }
    for (std::size_t m = 0; m < mark_steps.size(); ++m) {
        for (std::size_t c = 0; c < d; ++c) {
            HorizonError e;
            e.dim = c;
            e.step = mark_steps[m];
            e.mae = abs_sum[m * d + c] / static_cast<double>(total_samples);
            e.rmse = std::sqrt(sq_sum[m * d + c] / static_cast<double>(total_samples));
            row.horizon_errors.push_back(e);
        }
    }
    return row;
}

}  // namespace trajflow
