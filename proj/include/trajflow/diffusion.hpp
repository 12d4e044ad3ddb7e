#pragma once

#include <vector>

#include "trajflow/cfm.hpp"
#include "trajflow/dataset.hpp"
#include "trajflow/net.hpp"
#include "trajflow/optim.hpp"

namespace trajflow {

// Cosine noise schedule for the denoising-diffusion baseline. alpha_bar[k] is
// the signal fraction after k of `timesteps` noising steps; alpha_bar[0] = 1
// and the sequence decreases strictly. Per-step betas are clipped at 0.999.
struct DiffusionSchedule {
    int timesteps = 64;
    std::vector<double> alpha_bar;  // length timesteps + 1

    static DiffusionSchedule cosine(int timesteps);

    // Network time input for discrete step k in {1..timesteps}: spread over
    // [0, 1] so both model families share one embedding.
    double model_time(int k) const;
};

// Noise-prediction training: draw a discrete noise level k, corrupt the
// trajectory to sqrt(ab_k) tau1 + sqrt(1 - ab_k) eps, regress the net onto
// eps. Mirrors the flow-matching trainer's stream layout, step numbering,
// checkpoint hooks and abort behaviour; cfg.sigma is unused here.
TrainResult train_diffusion(const TrajectoryDataset& data, VectorFieldNet& net,
                            const DiffusionSchedule& sched, AdamState& opt,
                            const TrainerConfig& cfg, const TrainHooks& hooks = {});

}  // namespace trajflow
