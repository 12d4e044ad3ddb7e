#pragma once

#include <cstdint>

#include "trajflow/params.hpp"
#include "trajflow/tape.hpp"

namespace trajflow {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected adaptive-moment state, one (m, v) pair per parameter.
struct AdamState {
    ParamSet m;
    ParamSet v;
    std::int64_t step = 0;

    static AdamState init(const ParamSet& params);
};

// One optimizer step. Parameters without a gradient entry are left untouched.
// Throws NonFiniteError (naming the parameter) on NaN/Inf gradients.
// With beta1 = beta2 = 0 and eps = 0 the update degenerates to
// lr * sign(g): scaled, sign-preserving gradient descent.
void adam_step(ParamSet& params, const GradMap& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace trajflow
