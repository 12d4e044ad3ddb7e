#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trajflow/dataset.hpp"
#include "trajflow/net.hpp"
#include "trajflow/optim.hpp"
#include "trajflow/rng.hpp"

namespace trajflow {

// One point on the straight probability path between noise and data:
// tau_t = t * tau1 + (1 - t) * tau0 + sigma * eps, eps ~ N(0, I).
// The perturbation is always drawn, so RNG consumption does not depend on
// sigma. Throws DomainError for t outside [0, 1], ConfigError for sigma < 0.
Array sample_probability_path(const Array& tau0, const Array& tau1, double t, double sigma,
                              SeededRng& rng);

// The conditional target the field regresses onto; for the straight path it
// is constant in t: tau1 - tau0.
Array target_vector_field(const Array& tau0, const Array& tau1);

// Mean squared error over all elements.
double cfm_loss(const Array& predicted, const Array& target);

struct TrainerConfig {
    double sigma = 0.01;
    int batch_size = 16;
    std::int64_t steps = 2000;
    AdamConfig adam;
    std::uint64_t seed = 0;
    std::int64_t checkpoint_every = 0;  // 0 disables periodic checkpoints

    void validate() const;
};

struct TrainHooks {
    // Called after each optimizer step with the batch loss.
    std::function<void(std::int64_t step, double loss)> on_step;
    // Persists the current model; returns the path written (used in the
    // non-finite abort message). Called every checkpoint_every steps.
    std::function<std::string(std::int64_t step)> save_checkpoint;
};

struct TrainResult {
    std::vector<double> losses;  // one entry per executed step
};

// Flow-matching training. Runs cfg.steps optimizer steps numbered from
// opt.step + 1; per-step RNG streams are derived from (seed, step number), so
// a fresh run and a resumed run draw identical batches. Aborts with
// NonFiniteError on a non-finite loss, naming the failing step and the last
// checkpoint written.
TrainResult train_flow_matching(const TrajectoryDataset& data, VectorFieldNet& net,
                                AdamState& opt, const TrainerConfig& cfg,
                                const TrainHooks& hooks = {});

}  // namespace trajflow
