#include "trajflow/diffusion.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "trajflow/errors.hpp"
#include "trajflow/tape.hpp"

namespace trajflow {

DiffusionSchedule DiffusionSchedule::cosine(int timesteps) {
    if (timesteps < 1) throw ConfigError("diffusion: timesteps must be positive");
    const double s = 0.008;
    auto f = [&](double k) {
        const double x = (k / timesteps + s) / (1.0 + s) * std::numbers::pi / 2.0;
        const double c = std::cos(x);
        return c * c;
    };
    DiffusionSchedule sched;
    sched.timesteps = timesteps;
    sched.alpha_bar.resize(static_cast<std::size_t>(timesteps) + 1);
    sched.alpha_bar[0] = 1.0;
    const double f0 = f(0.0);
    for (int k = 1; k <= timesteps; ++k) {
        double ab = f(static_cast<double>(k)) / f0;
        // clip the implied per-step beta at 0.999
        const double floor_ab = sched.alpha_bar[static_cast<std::size_t>(k - 1)] * (1.0 - 0.999);
        sched.alpha_bar[static_cast<std::size_t>(k)] = std::max(ab, floor_ab);
    }
    return sched;
}

double DiffusionSchedule::model_time(int k) const {
    if (k < 1 || k > timesteps) {
        throw DomainError("diffusion: step " + std::to_string(k) + " outside 1.." +
                          std::to_string(timesteps));
    }
    if (timesteps == 1) return 0.0;
    return static_cast<double>(k - 1) / static_cast<double>(timesteps - 1);
}

TrainResult train_diffusion(const TrajectoryDataset& data, VectorFieldNet& net,
                            const DiffusionSchedule& sched, AdamState& opt,
                            const TrainerConfig& cfg, const TrainHooks& hooks) {
    cfg.validate();
    if (sched.alpha_bar.size() != static_cast<std::size_t>(sched.timesteps) + 1) {
        throw ConfigError("diffusion: schedule has " + std::to_string(sched.alpha_bar.size()) +
                          " entries for " + std::to_string(sched.timesteps) + " timesteps");
    }
    const NetConfig& nc = net.config();
    if (nc.horizon != data.horizon || nc.state_dim != data.state_dim ||
        static_cast<std::size_t>(nc.context_dim) != data.layout.length()) {
        throw ConfigError("train: net does not match dataset shapes");
    }
    if (data.train_idx.empty()) throw DataError("train: dataset has no training split");

    const std::size_t h = static_cast<std::size_t>(data.horizon);
    const std::size_t d = static_cast<std::size_t>(data.state_dim);
    const std::size_t ntrain = data.train_idx.size();

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

    for (std::int64_t i = 0; i < cfg.steps; ++i) {
        const std::int64_t step = opt.step + 1;
        SeededRng data_rng = data_root.stream(static_cast<std::uint64_t>(step));
        SeededRng time_rng = time_root.stream(static_cast<std::uint64_t>(step));
        SeededRng noise_rng = noise_root.stream(static_cast<std::uint64_t>(step));

        Tape tape;
        VectorFieldNet::TapeBinding binding = net.bind(tape);
        Var total{};
        for (int b = 0; b < cfg.batch_size; ++b) {
            const std::size_t pick = data_rng.uniform_int(ntrain);
            const int k = 1 + static_cast<int>(time_rng.uniform_int(
                                  static_cast<std::uint64_t>(sched.timesteps)));
            const double ab = sched.alpha_bar[static_cast<std::size_t>(k)];
            const double sig_signal = std::sqrt(ab);
            const double sig_noise = std::sqrt(1.0 - ab);

            Array eps = noise_rng.normal_array({h, d});
            Array noisy({h, d});
            const Array& tau1 = trajs[pick];
            for (std::size_t j = 0; j < noisy.size(); ++j) {
                noisy[j] = sig_signal * tau1[j] + sig_noise * eps[j];
            }

            Var pred = net.forward_on_tape(tape, binding, sched.model_time(k), noisy, ctxs[pick]);
            Var li = tape.mean_square(tape.sub(pred, tape.constant(std::move(eps))));
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
