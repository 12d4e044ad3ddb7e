#include "trajflow/flight.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "trajflow/errors.hpp"

namespace trajflow {

void FlightScenario::validate() const {
    if (horizon < 1) throw ConfigError("flight: horizon must be positive");
    if (past < 0) throw ConfigError("flight: past must be >= 0");
    if (min_events < 0 || max_events < min_events) {
        throw ConfigError("flight: need 0 <= min_events <= max_events");
    }
    if (speed <= 0.0) throw ConfigError("flight: speed must be positive");
    if (alt_hi < alt_lo) throw ConfigError("flight: altitude range is inverted");
    if (turn_rate <= 0.0 || climb_accel <= 0.0) {
        throw ConfigError("flight: turn_rate and climb_accel must be positive");
    }
}

TrajectoryDataset generate_flight_dataset(const FlightScenario& sc, std::size_t n,
                                          const SeededRng& rng) {
    sc.validate();
    if (n == 0) throw ConfigError("flight: dataset size must be positive");

    const std::size_t total = static_cast<std::size_t>(sc.past + sc.horizon);
    TrajectoryDataset ds;
    ds.horizon = sc.horizon;
    ds.state_dim = 3;
    ds.layout = ContextLayout{ContextLayout::Kind::history, sc.past, 3};

    for (std::size_t i = 0; i < n; ++i) {
        SeededRng item = rng.stream(i);
        double lon = sc.lon0 + item.uniform(-sc.spawn_radius, sc.spawn_radius);
        double lat = sc.lat0 + item.uniform(-sc.spawn_radius, sc.spawn_radius);
        double alt = item.uniform(sc.alt_lo, sc.alt_hi);
        double heading = item.uniform(0.0, 2.0 * std::numbers::pi);
        double target_heading = heading;
        double climb = 0.0, target_climb = 0.0;

        const int n_events =
            sc.min_events +
            static_cast<int>(item.uniform_int(static_cast<std::uint64_t>(sc.max_events -
                                                                          sc.min_events) + 1));
        std::set<std::size_t> event_steps;
        while (static_cast<int>(event_steps.size()) < n_events && total > 1) {
            event_steps.insert(1 + item.uniform_int(total - 1));
        }

        std::vector<std::array<double, 3>> states;
        states.reserve(total);
        for (std::size_t step = 0; step < total; ++step) {
            if (event_steps.count(step)) {
                target_heading = heading + item.uniform(-2.0, 2.0);
                target_climb = item.uniform(-sc.climb_limit, sc.climb_limit);
            }
            const double dh =
                std::clamp(target_heading - heading, -sc.turn_rate, sc.turn_rate);
            heading += dh;
            const double dc = std::clamp(target_climb - climb, -sc.climb_accel, sc.climb_accel);
            climb += dc;
            lon += sc.speed * std::cos(heading);
            lat += sc.speed * std::sin(heading);
            alt += climb;
            states.push_back({lon, lat, alt});
        }

        std::vector<double> ctx;
        ctx.reserve(static_cast<std::size_t>(sc.past) * 3);
        for (int p = 0; p < sc.past; ++p) {
            const auto& s = states[static_cast<std::size_t>(p)];
            ctx.insert(ctx.end(), {s[0], s[1], s[2]});
        }

        Array traj({static_cast<std::size_t>(sc.horizon), 3});
        for (int h = 0; h < sc.horizon; ++h) {
            const auto& s = states[static_cast<std::size_t>(sc.past + h)];
            traj.at(static_cast<std::size_t>(h), 0) = s[0];
            traj.at(static_cast<std::size_t>(h), 1) = s[1];
            traj.at(static_cast<std::size_t>(h), 2) = s[2];
        }
        ds.trajectories.push_back(std::move(traj));
        ds.contexts.push_back(std::move(ctx));
    }
    ds.finalize();
    return ds;
}

}  // namespace trajflow
