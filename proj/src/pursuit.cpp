#include "trajflow/pursuit.hpp"

#include <algorithm>
#include <cmath>

#include "trajflow/errors.hpp"

namespace trajflow {

void PursuitScenario::validate() const {
    if (width <= 0.0 || height <= 0.0) throw ConfigError("pursuit: map must have positive size");
    if (hideouts.empty()) throw ConfigError("pursuit: need at least one hideout");
    for (const auto& [x, y] : hideouts) {
        if (x < 0.0 || x > width || y < 0.0 || y > height) {
            throw ConfigError("pursuit: hideout (" + std::to_string(x) + ", " + std::to_string(y) +
                              ") outside the map");
        }
    }
    if (speed <= 0.0) throw ConfigError("pursuit: speed must be positive");
    if (heading_noise < 0.0) throw ConfigError("pursuit: heading_noise must be >= 0");
    if (detection_rate <= 0.0 || detection_rate >= 1.0) {
        throw ConfigError("pursuit: detection_rate must lie strictly between 0 and 1");
    }
    if (horizon < 1 || window < 1) throw ConfigError("pursuit: horizon and window must be positive");
    if (context_slots < 1) throw ConfigError("pursuit: context_slots must be positive");
}

PursuitDataset generate_pursuit_dataset(const PursuitScenario& sc, std::size_t n,
                                        const SeededRng& rng) {
    sc.validate();
    if (n == 0) throw ConfigError("pursuit: dataset size must be positive");

    const std::size_t total = static_cast<std::size_t>(sc.window + sc.horizon);
    const std::size_t slot = 4;  // age, x, y, valid

    PursuitDataset out;
    TrajectoryDataset& ds = out.data;
    ds.horizon = sc.horizon;
    ds.state_dim = 2;
    ds.layout = ContextLayout{ContextLayout::Kind::detections, sc.context_slots, 2};

    std::size_t detections_total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        SeededRng item = rng.stream(i);
        double x = item.uniform(0.2 * sc.width, 0.8 * sc.width);
        double y = item.uniform(0.2 * sc.height, 0.8 * sc.height);
        const auto& target = sc.hideouts[item.uniform_int(sc.hideouts.size())];

        std::vector<std::array<double, 2>> path;
        path.reserve(total + 1);
        path.push_back({x, y});
        for (std::size_t step = 0; step < total; ++step) {
            const double dx = target[0] - x, dy = target[1] - y;
            if (std::hypot(dx, dy) <= sc.speed) {
                // arrived; hole up
                path.push_back({target[0], target[1]});
                x = target[0];
                y = target[1];
                continue;
            }
            const double heading = std::atan2(dy, dx) + sc.heading_noise * item.normal();
            x = std::clamp(x + sc.speed * std::cos(heading), 0.0, sc.width);
            y = std::clamp(y + sc.speed * std::sin(heading), 0.0, sc.height);
            path.push_back({x, y});
        }

        // sensor hits over the observation window
        std::vector<std::size_t> hits;
        for (std::size_t step = 0; step < static_cast<std::size_t>(sc.window); ++step) {
            if (item.uniform() < sc.detection_rate) hits.push_back(step);
        }
        detections_total += hits.size();

        std::vector<double> ctx(static_cast<std::size_t>(sc.context_slots) * slot, 0.0);
        const std::size_t keep = std::min(hits.size(), static_cast<std::size_t>(sc.context_slots));
        for (std::size_t k = 0; k < keep; ++k) {
            const std::size_t step = hits[hits.size() - 1 - k];  // newest first
            ctx[k * slot + 0] = static_cast<double>(sc.window - step) / sc.window;
            ctx[k * slot + 1] = path[step][0];
            ctx[k * slot + 2] = path[step][1];
            ctx[k * slot + 3] = 1.0;
        }

        Array traj({static_cast<std::size_t>(sc.horizon), 2});
        for (int h = 0; h < sc.horizon; ++h) {
            const auto& p = path[static_cast<std::size_t>(sc.window + h)];
            traj.at(static_cast<std::size_t>(h), 0) = p[0];
            traj.at(static_cast<std::size_t>(h), 1) = p[1];
        }
        ds.trajectories.push_back(std::move(traj));
        ds.contexts.push_back(std::move(ctx));
    }

    out.realized_detection_rate =
        static_cast<double>(detections_total) / (static_cast<double>(n) * sc.window);
    ds.finalize();
    return out;
}

}  // namespace trajflow
