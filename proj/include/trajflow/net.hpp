#pragma once

#include <map>
#include <string>

#include "trajflow/params.hpp"
#include "trajflow/rng.hpp"
#include "trajflow/tape.hpp"

namespace trajflow {

// Architecture hyperparameters of the temporal U-Net. Every parameter shape is
// a pure function of this struct.
struct NetConfig {
    int horizon = 64;        // trajectory length H
    int state_dim = 2;       // D
    int context_dim = 0;     // conditioning vector length (0 = unconditional)
    int base_channels = 32;
    int depth = 2;           // down/up levels
    int kernel_size = 5;
    int time_embed_dim = 32;
    int groups = 8;          // group-norm groups

    void validate() const;  // throws ConfigError
    int cond_dim() const { return time_embed_dim + context_dim; }
    int cond_hidden() const { return 2 * time_embed_dim; }

    bool operator==(const NetConfig&) const = default;
};

// Sinusoidal features of flow time t in [0, 1]: dim/2 sine values followed by
// dim/2 cosines over log-spaced frequencies. Throws DomainError outside [0,1].
Array time_embed(double t, int dim);

// The time-varying vector field v(t, trajectory, context): a 1-D convolutional
// U-Net over the time axis. Residual blocks are conv -> group-norm -> mish
// twice with one feature-wise affine modulation from (time embedding, context)
// in between; downsampling is a stride-2 conv, upsampling nearest-neighbour
// plus conv, skips concatenate channels. The final projection starts at zero,
// so a freshly initialized net is the zero field.
class VectorFieldNet {
public:
    VectorFieldNet() = default;
    VectorFieldNet(NetConfig cfg, ParamSet params);

    static VectorFieldNet init(const NetConfig& cfg, SeededRng& rng);

    // Pure evaluation with frozen parameters; safe to call concurrently.
    // traj is [H x D]; the result has the same shape.
    Array forward(double t, const Array& traj, const Array& context) const;

    // Parameters registered as leaves on a tape, reusable across a batch.
    struct TapeBinding {
        std::map<std::string, Var> vars;
    };
    TapeBinding bind(Tape& tape) const;
    Var forward_on_tape(Tape& tape, const TapeBinding& binding, double t, const Array& traj,
                        const Array& context) const;

    const NetConfig& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

private:
    NetConfig cfg_;
    ParamSet params_;
};

}  // namespace trajflow
