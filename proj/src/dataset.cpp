#include "trajflow/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "trajflow/errors.hpp"

namespace trajflow {

NormStats NormStats::fit(const std::vector<Array>& trajs,
                         const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw DataError("NormStats: cannot fit on an empty split");
    const std::size_t d = trajs[indices[0]].dim(1);
    NormStats s;
    s.lo.assign(d, std::numeric_limits<double>::infinity());
    s.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t idx : indices) {
        const Array& tr = trajs[idx];
        for (std::size_t r = 0; r < tr.dim(0); ++r)
            for (std::size_t c = 0; c < d; ++c) {
                s.lo[c] = std::min(s.lo[c], tr.at(r, c));
                s.hi[c] = std::max(s.hi[c], tr.at(r, c));
            }
    }
    for (std::size_t c = 0; c < d; ++c) {
        if (s.degenerate(c)) {
            std::cerr << "warning: dimension " << c
                      << " has zero range; it will normalize to 0\n";
        }
    }
    return s;
}

double NormStats::normalize_value(double v, std::size_t d) const {
    if (degenerate(d)) return 0.0;
    return 2.0 * (v - lo[d]) / (hi[d] - lo[d]) - 1.0;
}

double NormStats::denormalize_value(double v, std::size_t d) const {
    if (degenerate(d)) return lo[d];
    return lo[d] + (v + 1.0) * 0.5 * (hi[d] - lo[d]);
}

Array NormStats::normalize(const Array& traj) const {
    if (traj.ndim() != 2 || traj.dim(1) != dims()) {
        throw ShapeError("NormStats: trajectory " + shape_str(traj.shape()) +
                         " does not match " + std::to_string(dims()) + " dims");
    }
    Array out(traj.shape());
    for (std::size_t r = 0; r < traj.dim(0); ++r)
        for (std::size_t c = 0; c < dims(); ++c)
            out.at(r, c) = normalize_value(traj.at(r, c), c);
    return out;
}

Array NormStats::denormalize(const Array& traj) const {
    if (traj.ndim() != 2 || traj.dim(1) != dims()) {
        throw ShapeError("NormStats: trajectory " + shape_str(traj.shape()) +
                         " does not match " + std::to_string(dims()) + " dims");
    }
    Array out(traj.shape());
    for (std::size_t r = 0; r < traj.dim(0); ++r)
        for (std::size_t c = 0; c < dims(); ++c)
            out.at(r, c) = denormalize_value(traj.at(r, c), c);
    return out;
}

nlohmann::json NormStats::to_json() const {
    return nlohmann::json{{"lo", lo}, {"hi", hi}};
}

NormStats NormStats::from_json(const nlohmann::json& j) {
    NormStats s;
    s.lo = j.at("lo").get<std::vector<double>>();
    s.hi = j.at("hi").get<std::vector<double>>();
    if (s.lo.size() != s.hi.size()) throw SchemaError("NormStats: lo/hi length mismatch");
    return s;
}

std::string to_string(ContextLayout::Kind kind) {
    switch (kind) {
        case ContextLayout::Kind::none: return "none";
        case ContextLayout::Kind::detections: return "detections";
        case ContextLayout::Kind::history: return "history";
        case ContextLayout::Kind::endpoints: return "endpoints";
    }
    throw UsageError("ContextLayout: bad kind");
}

ContextLayout::Kind context_kind_from_string(const std::string& s) {
    if (s == "none") return ContextLayout::Kind::none;
    if (s == "detections") return ContextLayout::Kind::detections;
    if (s == "history") return ContextLayout::Kind::history;
    if (s == "endpoints") return ContextLayout::Kind::endpoints;
    throw SchemaError("ContextLayout: unknown kind '" + s + "'");
}

std::size_t ContextLayout::length() const {
    const std::size_t d = static_cast<std::size_t>(state_dim);
    switch (kind) {
        case Kind::none: return 0;
        case Kind::detections: return static_cast<std::size_t>(slots) * (d + 2);
        case Kind::history: return static_cast<std::size_t>(slots) * d;
        case Kind::endpoints: return 2 * d;
    }
    throw UsageError("ContextLayout: bad kind");
}

std::vector<double> ContextLayout::normalize(const std::vector<double>& raw,
                                             const NormStats& stats) const {
    if (raw.size() != length()) {
        throw ShapeError("ContextLayout: context length " + std::to_string(raw.size()) +
                         " does not match layout length " + std::to_string(length()));
    }
    const std::size_t d = static_cast<std::size_t>(state_dim);
    std::vector<double> out(raw.size());
    switch (kind) {
        case Kind::none:
            break;
        case Kind::detections: {
            const std::size_t slot = d + 2;
            for (std::size_t s = 0; s < static_cast<std::size_t>(slots); ++s) {
                out[s * slot] = raw[s * slot];  // age
                for (std::size_t c = 0; c < d; ++c)
                    out[s * slot + 1 + c] = stats.normalize_value(raw[s * slot + 1 + c], c);
                out[s * slot + 1 + d] = raw[s * slot + 1 + d];  // valid flag
            }
            break;
        }
        case Kind::history:
        case Kind::endpoints:
            for (std::size_t i = 0; i < raw.size(); ++i)
                out[i] = stats.normalize_value(raw[i], i % d);
            break;
    }
    return out;
}

nlohmann::json ContextLayout::to_json() const {
    return nlohmann::json{{"kind", to_string(kind)}, {"slots", slots}, {"state_dim", state_dim}};
}

ContextLayout ContextLayout::from_json(const nlohmann::json& j) {
    ContextLayout l;
    l.kind = context_kind_from_string(j.at("kind").get<std::string>());
    l.slots = j.at("slots").get<int>();
    l.state_dim = j.at("state_dim").get<int>();
    return l;
}

std::array<std::size_t, 3> split_sizes(std::size_t n) {
    const double fractions[3] = {0.8, 0.1, 0.1};
    std::array<std::size_t, 3> sizes{};
    double remainders[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fractions[i] * static_cast<double>(n);
        sizes[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = exact - std::floor(exact);
        assigned += sizes[i];
    }
    std::size_t leftover = n - assigned;
    // hand out leftovers by largest remainder; on ties the later section wins
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
        return a > b;
    });
    for (std::size_t i = 0; i < leftover; ++i) ++sizes[static_cast<std::size_t>(order[i % 3])];
    return sizes;
}

void TrajectoryDataset::finalize() {
    validate();
    const auto sizes = split_sizes(size());
    train_idx.clear();
    val_idx.clear();
    test_idx.clear();
    std::size_t i = 0;
    for (std::size_t k = 0; k < sizes[0]; ++k) train_idx.push_back(i++);
    for (std::size_t k = 0; k < sizes[1]; ++k) val_idx.push_back(i++);
    for (std::size_t k = 0; k < sizes[2]; ++k) test_idx.push_back(i++);
    stats = NormStats::fit(trajectories, train_idx);
}

void TrajectoryDataset::validate() const {
    if (trajectories.empty()) throw DataError("dataset: no trajectories");
    if (contexts.size() != trajectories.size()) {
        throw DataError("dataset: " + std::to_string(trajectories.size()) + " trajectories but " +
                        std::to_string(contexts.size()) + " contexts");
    }
    const std::size_t h = static_cast<std::size_t>(horizon);
    const std::size_t d = static_cast<std::size_t>(state_dim);
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const Array& tr = trajectories[i];
        if (tr.ndim() != 2 || tr.dim(0) != h || tr.dim(1) != d) {
            throw DataError("dataset: trajectory " + std::to_string(i) + " has shape " +
                            shape_str(tr.shape()) + ", expected [" + std::to_string(h) + " x " +
                            std::to_string(d) + "]");
        }
        if (!tr.all_finite()) {
            throw DataError("dataset: trajectory " + std::to_string(i) + " has non-finite values");
        }
        if (contexts[i].size() != layout.length()) {
            throw DataError("dataset: context " + std::to_string(i) + " has length " +
                            std::to_string(contexts[i].size()) + ", expected " +
                            std::to_string(layout.length()));
        }
    }
}

Array TrajectoryDataset::normalized_trajectory(std::size_t i) const {
    return stats.normalize(trajectories[i]);
}

Array TrajectoryDataset::normalized_context(std::size_t i) const {
    std::vector<double> n = layout.normalize(contexts[i], stats);
    const std::size_t len = n.size();
    return Array({len}, std::move(n));
}

Array TrajectoryDataset::context_array(std::size_t i) const {
    std::vector<double> c = contexts[i];
    const std::size_t len = c.size();
    return Array({len}, std::move(c));
}

}  // namespace trajflow
