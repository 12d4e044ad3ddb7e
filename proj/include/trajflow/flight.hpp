#pragma once

#include <cstddef>

#include "trajflow/dataset.hpp"
#include "trajflow/rng.hpp"

namespace trajflow {

// Synthetic 3-D cruise segments (lon, lat, altitude). Each episode flies at
// constant horizontal speed; a few random events retarget heading and climb
// rate, approached with bounded turn/climb acceleration so tracks stay smooth.
// The context is a short window of past states; the target is the next
// stretch.
struct FlightScenario {
    int horizon = 32;  // predicted steps
    int past = 8;      // context states
    int min_events = 2, max_events = 5;
    double lon0 = -80.0, lat0 = 35.0;  // spawn box center, degrees
    double spawn_radius = 0.5;
    double speed = 0.01;          // degrees per step
    double alt_lo = 4000.0, alt_hi = 10000.0;  // spawn altitude, feet
    double climb_limit = 120.0;   // feet per step
    double turn_rate = 0.15;      // radians per step toward the target heading
    double climb_accel = 20.0;    // feet per step^2 toward the target climb

    void validate() const;
};

// n episodes; zero events give exact constant-velocity lines.
TrajectoryDataset generate_flight_dataset(const FlightScenario& sc, std::size_t n,
                                          const SeededRng& rng);

}  // namespace trajflow
