#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "trajflow/array.hpp"

#include <json.hpp>

namespace trajflow {

// Per-dimension min/max over the training split, mapping raw states to
// [-1, 1]. A dimension that never varies maps to 0 and back to its constant.
struct NormStats {
    std::vector<double> lo;
    std::vector<double> hi;

    static NormStats fit(const std::vector<Array>& trajs,
                         const std::vector<std::size_t>& indices);

    std::size_t dims() const { return lo.size(); }
    bool degenerate(std::size_t d) const { return hi[d] <= lo[d]; }

    double normalize_value(double v, std::size_t d) const;
    double denormalize_value(double v, std::size_t d) const;
    Array normalize(const Array& traj) const;    // [H x D] -> [H x D]
    Array denormalize(const Array& traj) const;

    nlohmann::json to_json() const;
    static NormStats from_json(const nlohmann::json& j);

    bool operator==(const NormStats&) const = default;
};

// How a flat conditioning vector is laid out, and which of its entries are
// state coordinates (normalized with the trajectory stats) versus plain
// numbers in [0, 1] that pass through unchanged.
struct ContextLayout {
    enum class Kind : std::uint8_t {
        none,         // unconditional
        detections,   // slots of (age, state..., valid), newest first
        history,      // trailing window of past states
        endpoints,    // (start state, goal state)
    };

    Kind kind = Kind::none;
    int slots = 0;  // detection slots or history length; unused for endpoints
    int state_dim = 0;

    std::size_t length() const;
    std::vector<double> normalize(const std::vector<double>& raw, const NormStats& stats) const;

    nlohmann::json to_json() const;
    static ContextLayout from_json(const nlohmann::json& j);

    bool operator==(const ContextLayout&) const = default;
};

std::string to_string(ContextLayout::Kind kind);
ContextLayout::Kind context_kind_from_string(const std::string& s);

// 80/10/10 split sizes by largest remainder; ties go to the later section.
std::array<std::size_t, 3> split_sizes(std::size_t n);

// Trajectories plus conditioning vectors, stored in raw units. Normalization
// stats are fitted on the training split at generation time and travel with
// the dataset so training, sampling and evaluation all agree on the mapping.
struct TrajectoryDataset {
    int horizon = 0;
    int state_dim = 0;
    std::vector<Array> trajectories;           // each [H x D]
    std::vector<std::vector<double>> contexts;  // each layout.length()
    ContextLayout layout;
    NormStats stats;
    std::vector<std::size_t> train_idx, val_idx, test_idx;

    std::size_t size() const { return trajectories.size(); }

    // Fits stats on the train split and fills the index lists (in order:
    // first 80% train, next 10% val, rest test).
    void finalize();
    void validate() const;  // throws DataError on inconsistent shapes

    Array normalized_trajectory(std::size_t i) const;
    Array normalized_context(std::size_t i) const;
    Array context_array(std::size_t i) const;  // raw, as a flat Array
};

}  // namespace trajflow
