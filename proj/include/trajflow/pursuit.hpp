#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "trajflow/dataset.hpp"
#include "trajflow/rng.hpp"

namespace trajflow {

// Synthetic evader scenario: an agent starts somewhere on the map, commits to
// one of several hideouts and walks toward it with heading noise. Sensors
// report its position at a few random times in a past window; the task is to
// predict the next stretch of movement from those sparse detections.
struct PursuitScenario {
    double width = 10.0, height = 10.0;  // map is [0, width] x [0, height]
    std::vector<std::array<double, 2>> hideouts{{1.5, 8.5}, {8.5, 8.0}, {7.5, 1.0}};
    double speed = 0.25;          // per-step displacement
    double heading_noise = 0.35;  // radians, std of per-step heading error
    double detection_rate = 0.44;
    int horizon = 64;       // predicted steps
    int window = 64;        // observed past steps
    int context_slots = 8;  // most recent detections kept

    void validate() const;
};

struct PursuitDataset {
    TrajectoryDataset data;
    double realized_detection_rate = 0.0;
};

// n simulated episodes. Context slots are (age, x, y, valid), newest first;
// age is (window - detection step) / window in (0, 1]; empty slots are zeroed.
PursuitDataset generate_pursuit_dataset(const PursuitScenario& sc, std::size_t n,
                                        const SeededRng& rng);

}  // namespace trajflow
