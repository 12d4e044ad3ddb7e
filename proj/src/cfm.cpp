#include "trajflow/cfm.hpp"

#include <cmath>
#include <string>

#include "trajflow/errors.hpp"
#include "trajflow/kernels.hpp"
#include "trajflow/tape.hpp"

namespace trajflow {

Array sample_probability_path(const Array& tau0, const Array& tau1, double t, double sigma,
                              SeededRng& rng) {
    if (!tau0.same_shape(tau1)) {
        throw ShapeError("sample_probability_path: tau0 " + shape_str(tau0.shape()) +
                         " vs tau1 " + shape_str(tau1.shape()));
    }
    if (t < 0.0 || t > 1.0) {
        throw DomainError("sample_probability_path: t = " + std::to_string(t) +
                          " outside [0, 1]");
    }
    if (sigma < 0.0) throw ConfigError("sample_probability_path: sigma must be >= 0");
    Array eps = rng.normal_array(tau0.shape());
    Array out(tau0.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = t * tau1[i] + (1.0 - t) * tau0[i] + sigma * eps[i];
    }
    return out;
}

Array target_vector_field(const Array& tau0, const Array& tau1) {
    return k_sub(tau1, tau0);
}

double cfm_loss(const Array& predicted, const Array& target) {
    return k_mean_square(k_sub(predicted, target)).scalar_value();
}

void TrainerConfig::validate() const {
    if (sigma < 0.0) throw ConfigError("trainer: sigma must be >= 0");
    if (batch_size < 1) throw ConfigError("trainer: batch_size must be positive");
    if (steps < 0) throw ConfigError("trainer: steps must be >= 0");
    if (checkpoint_every < 0) throw ConfigError("trainer: checkpoint_every must be >= 0");
}

TrainResult train_flow_matching(const TrajectoryDataset& data, VectorFieldNet& net,
                                AdamState& opt, const TrainerConfig& cfg,
                                const TrainHooks& hooks) {
    cfg.validate();
    const NetConfig& nc = net.config();
    if (nc.horizon != data.horizon || nc.state_dim != data.state_dim ||
        static_cast<std::size_t>(nc.context_dim) != data.layout.length()) {
        throw ConfigError("train: net (H=" + std::to_string(nc.horizon) + ", D=" +
                          std::to_string(nc.state_dim) + ", C=" + std::to_string(nc.context_dim) +
                          ") does not match dataset (H=" + std::to_string(data.horizon) + ", D=" +
                          std::to_string(data.state_dim) + ", C=" +
                          std::to_string(data.layout.length()) + ")");
    }
    if (data.train_idx.empty()) throw DataError("train: dataset has no training split");

    const std::size_t h = static_cast<std::size_t>(data.horizon);
    const std::size_t d = static_cast<std::size_t>(data.state_dim);
    const std::size_t ntrain = data.train_idx.size();

    // Normalized copies of the training split, computed once.
    std::vector<Array> trajs(ntrain), ctxs(ntrain);
    for (std::size_t i = 0; i < ntrain; ++i) {
        trajs[i] = data.normalized_trajectory(data.train_idx[i]);
        ctxs[i] = data.normalized_context(data.train_idx[i]);
    }

    const SeededRng root(cfg.seed);
    const SeededRng data_root = root.stream("data");
    const SeededRng time_root = root.stream("time");
    const SeededRng noise_root = root.stream("noise");

    TrainResult result;
    result.losses.reserve(static_cast<std::size_t>(cfg.steps));
    std::string last_checkpoint = "none";

    for (std::int64_t k = 0; k < cfg.steps; ++k) {
        const std::int64_t step = opt.step + 1;
        // Streams keyed by the global step number: a resumed run replays the
        // exact draws an uninterrupted run would have made.
        SeededRng data_rng = data_root.stream(static_cast<std::uint64_t>(step));
        SeededRng time_rng = time_root.stream(static_cast<std::uint64_t>(step));
        SeededRng noise_rng = noise_root.stream(static_cast<std::uint64_t>(step));

        Tape tape;
        VectorFieldNet::TapeBinding binding = net.bind(tape);
        Var total{};
        for (int b = 0; b < cfg.batch_size; ++b) {
            const std::size_t pick = data_rng.uniform_int(ntrain);
            const double t = time_rng.uniform();
            Array tau0 = noise_rng.normal_array({h, d});
            Array tau_t = sample_probability_path(tau0, trajs[pick], t, cfg.sigma, noise_rng);
            Array target = target_vector_field(tau0, trajs[pick]);

            Var pred = net.forward_on_tape(tape, binding, t, tau_t, ctxs[pick]);
            Var li = tape.mean_square(tape.sub(pred, tape.constant(std::move(target))));
            total = b == 0 ? li : tape.add(total, li);
        }
        Var loss_var = tape.scale(total, 1.0 / cfg.batch_size);
        const double loss = tape.value(loss_var).scalar_value();
        if (!std::isfinite(loss)) {
            throw NonFiniteError("train: non-finite loss at step " + std::to_string(step) +
                                 " (last checkpoint: " + last_checkpoint + ")");
        }

        GradMap grads = tape.backward(loss_var);
        adam_step(net.params(), grads, opt, cfg.adam);
        result.losses.push_back(loss);

        if (hooks.on_step) hooks.on_step(step, loss);
        if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 &&
            hooks.save_checkpoint) {
            last_checkpoint = hooks.save_checkpoint(step);
        }
    }
    return result;
}

}  // namespace trajflow
