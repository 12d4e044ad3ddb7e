#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "trajflow/diffusion.hpp"
#include "trajflow/net.hpp"

namespace trajflow {

// Fixed-step integration times for n steps: (i/n, 1/n) for i = 0..n-1. The
// field is never evaluated at t = 1.
std::vector<std::pair<double, double>> step_time_schedule(int n);

enum class Solver : std::uint8_t { euler, midpoint };

// Endpoint pinning for planning: written into the state before every field
// evaluation and once after the last integration step, so the emitted
// endpoints equal the requested ones exactly. States are in normalized units.
struct PlanConstraint {
    std::vector<double> start;
    std::vector<double> goal;
    int goal_index = -1;  // -1 means the last step
};

struct SampleRequest {
    Array context;    // normalized, [context_dim]
    int num_steps = 1;
    int num_samples = 1;
    std::optional<PlanConstraint> constraint;
    Solver solver = Solver::euler;
    std::uint64_t seed = 0;
};

struct SampleStats {
    std::int64_t network_calls = 0;
};

// Writes the pinned rows into tau. Throws ConfigError if the constraint does
// not fit the trajectory shape.
void apply_constraint(Array& tau, const PlanConstraint& c);

// Velocity field evaluated at a trajectory state and flow time.
using FieldFn = std::function<Array(const Array& tau, double t)>;

// Integrates an arbitrary field from Gaussian noise with num_steps fixed Euler
// (or midpoint) steps. Returns num_samples trajectories in normalized units.
// Per-sample noise comes from seed-derived streams, so results do not depend
// on num_samples ordering. Throws NonFiniteError if the field goes non-finite.
std::vector<Array> flow_sample_field(const FieldFn& field, std::size_t horizon,
                                     std::size_t state_dim, const SampleRequest& req,
                                     SampleStats* stats = nullptr);

// Same integration driven by the learned network field.
std::vector<Array> flow_sample(const VectorFieldNet& net, const SampleRequest& req,
                               SampleStats* stats = nullptr);

// Ancestral denoising along a strided subset of the training noise levels;
// num_steps = 1 collapses to direct signal prediction from pure noise. The
// same constraint pinning is applied before every network call.
// Requires num_steps <= schedule timesteps.
std::vector<Array> ddpm_sample(const VectorFieldNet& net, const DiffusionSchedule& sched,
                               const SampleRequest& req, SampleStats* stats = nullptr);

// A trained sampler of either family behind one call.
struct GenerativeModel {
    enum class Family : std::uint8_t { flow, ddpm };

    Family family = Family::flow;
    VectorFieldNet net;
    DiffusionSchedule schedule;  // ddpm only

    std::vector<Array> sample(const SampleRequest& req, SampleStats* stats = nullptr) const;
};

std::string to_string(GenerativeModel::Family family);
GenerativeModel::Family family_from_string(const std::string& s);

struct LatencyReport {
    double mean_ms = 0.0;
    double std_ms = 0.0;
    std::int64_t network_calls = 0;  // per repetition
    int repetitions = 0;
};

// Wall-clock cost of model.sample(req): one warmup run, then `repetitions`
// timed runs (at least 3).
LatencyReport measure_sampling_latency(const GenerativeModel& model, const SampleRequest& req,
                                       int repetitions);

}  // namespace trajflow
