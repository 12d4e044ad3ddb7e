#include "trajflow/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "trajflow/errors.hpp"
#include "trajflow/rng.hpp"

namespace trajflow {

std::vector<std::pair<double, double>> step_time_schedule(int n) {
    if (n < 1) throw ConfigError("step_time_schedule: need at least one step");
    const double dt = 1.0 / n;
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.emplace_back(static_cast<double>(i) * dt, dt);
    return out;
}

void apply_constraint(Array& tau, const PlanConstraint& c) {
    const std::size_t h = tau.dim(0), d = tau.dim(1);
    if (c.start.size() != d || c.goal.size() != d) {
        throw ConfigError("constraint: start/goal dims (" + std::to_string(c.start.size()) + ", " +
                          std::to_string(c.goal.size()) + ") do not match state_dim " +
                          std::to_string(d));
    }
    const std::size_t gi =
        c.goal_index < 0 ? h - 1 : static_cast<std::size_t>(c.goal_index);
    if (gi >= h) {
        throw ConfigError("constraint: goal_index " + std::to_string(c.goal_index) +
                          " outside horizon " + std::to_string(h));
    }
    for (std::size_t j = 0; j < d; ++j) {
        if (!std::isfinite(c.start[j]) || !std::isfinite(c.goal[j])) {
            throw ConfigError("constraint: non-finite start/goal");
        }
        tau.at(0, j) = c.start[j];
        tau.at(gi, j) = c.goal[j];
    }
}

namespace {

void check_request(const NetConfig& cfg, const SampleRequest& req) {
    if (req.num_steps < 1) throw ConfigError("sample: num_steps must be >= 1");
    if (req.num_samples < 1) throw ConfigError("sample: num_samples must be >= 1");
    if (req.context.size() != static_cast<std::size_t>(cfg.context_dim)) {
        throw ShapeError("sample: context length " + std::to_string(req.context.size()) +
                         " does not match context_dim " + std::to_string(cfg.context_dim));
    }
}

void clamp_if_constrained(Array& tau, const SampleRequest& req) {
    if (req.constraint) apply_constraint(tau, *req.constraint);
}

}  // namespace

std::vector<Array> flow_sample_field(const FieldFn& field, std::size_t horizon,
                                     std::size_t state_dim, const SampleRequest& req,
                                     SampleStats* stats) {
    if (req.num_steps < 1) throw ConfigError("sample: num_steps must be >= 1");
    if (req.num_samples < 1) throw ConfigError("sample: num_samples must be >= 1");
    const auto schedule = step_time_schedule(req.num_steps);

    const SeededRng root = SeededRng(req.seed).stream("sample");
    std::vector<Array> out;
    out.reserve(static_cast<std::size_t>(req.num_samples));
    for (int s = 0; s < req.num_samples; ++s) {
        SeededRng rng = root.stream(static_cast<std::uint64_t>(s));
        Array tau = rng.normal_array({horizon, state_dim});
        for (const auto& [t, dt] : schedule) {
            clamp_if_constrained(tau, req);
            Array v = field(tau, t);
            if (stats) ++stats->network_calls;
            if (!v.all_finite()) {
                throw NonFiniteError("sample: non-finite field at t = " + std::to_string(t));
            }
            if (req.solver == Solver::euler) {
                for (std::size_t i = 0; i < tau.size(); ++i) tau[i] += dt * v[i];
            } else {
                Array half = tau;
                for (std::size_t i = 0; i < half.size(); ++i) half[i] += 0.5 * dt * v[i];
                clamp_if_constrained(half, req);
                Array v2 = field(half, t + 0.5 * dt);
                if (stats) ++stats->network_calls;
                if (!v2.all_finite()) {
                    throw NonFiniteError("sample: non-finite field at t = " +
                                         std::to_string(t + 0.5 * dt));
                }
                for (std::size_t i = 0; i < tau.size(); ++i) tau[i] += dt * v2[i];
            }
        }
        clamp_if_constrained(tau, req);
        out.push_back(std::move(tau));
    }
    return out;
}

std::vector<Array> flow_sample(const VectorFieldNet& net, const SampleRequest& req,
                               SampleStats* stats) {
    const NetConfig& cfg = net.config();
    check_request(cfg, req);
    const auto field = [&](const Array& tau, double t) { return net.forward(t, tau, req.context); };
    return flow_sample_field(field, static_cast<std::size_t>(cfg.horizon),
                             static_cast<std::size_t>(cfg.state_dim), req, stats);
}

std::vector<Array> ddpm_sample(const VectorFieldNet& net, const DiffusionSchedule& sched,
                               const SampleRequest& req, SampleStats* stats) {
    const NetConfig& cfg = net.config();
    check_request(cfg, req);
    if (req.num_steps > sched.timesteps) {
        throw ConfigError("sample: num_steps " + std::to_string(req.num_steps) +
                          " exceeds schedule timesteps " + std::to_string(sched.timesteps));
    }
    const std::size_t h = static_cast<std::size_t>(cfg.horizon);
    const std::size_t d = static_cast<std::size_t>(cfg.state_dim);
    const int n = req.num_steps;
    const int t_total = sched.timesteps;

    // Strided subset of noise levels, highest last; n == t_total walks them all.
    std::vector<int> levels(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        levels[static_cast<std::size_t>(i)] = static_cast<int>(
            std::llround(static_cast<double>(i) * t_total / static_cast<double>(n)));
    }

    const SeededRng root = SeededRng(req.seed).stream("sample");
    std::vector<Array> out;
    out.reserve(static_cast<std::size_t>(req.num_samples));
    for (int s = 0; s < req.num_samples; ++s) {
        SeededRng rng = root.stream(static_cast<std::uint64_t>(s));
        Array x = rng.normal_array({h, d});
        for (int i = n; i >= 1; --i) {
            const int cur = levels[static_cast<std::size_t>(i)];
            const int prev = levels[static_cast<std::size_t>(i - 1)];
            const double ab_cur = sched.alpha_bar[static_cast<std::size_t>(cur)];
            const double ab_prev = sched.alpha_bar[static_cast<std::size_t>(prev)];

            clamp_if_constrained(x, req);
            Array eps = net.forward(sched.model_time(cur), x, req.context);
            if (stats) ++stats->network_calls;
            if (!eps.all_finite()) {
                throw NonFiniteError("sample: non-finite noise prediction at level " +
                                     std::to_string(cur));
            }

            // Posterior mean through the signal estimate, which is clipped to
            // the normalized data range so one bad noise prediction cannot
            // compound through the rest of the chain.
            const double beta = 1.0 - ab_cur / ab_prev;
            const double signal_coef = std::sqrt(ab_prev) * beta / (1.0 - ab_cur);
            const double keep_coef =
                std::sqrt(1.0 - beta) * (1.0 - ab_prev) / (1.0 - ab_cur);
            const double to_signal = std::sqrt(1.0 - ab_cur);
            const double inv_sqrt_ab = 1.0 / std::sqrt(ab_cur);
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double x0 =
                    std::clamp((x[j] - to_signal * eps[j]) * inv_sqrt_ab, -1.0, 1.0);
                x[j] = signal_coef * x0 + keep_coef * x[j];
            }
            if (i > 1) {
                const double var = beta * (1.0 - ab_prev) / (1.0 - ab_cur);
                const double sd = std::sqrt(var);
                for (std::size_t j = 0; j < x.size(); ++j) x[j] += sd * rng.normal();
            }
        }
        clamp_if_constrained(x, req);
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<Array> GenerativeModel::sample(const SampleRequest& req, SampleStats* stats) const {
    return family == Family::flow ? flow_sample(net, req, stats)
                                  : ddpm_sample(net, schedule, req, stats);
}

std::string to_string(GenerativeModel::Family family) {
    return family == GenerativeModel::Family::flow ? "flow" : "ddpm";
}

GenerativeModel::Family family_from_string(const std::string& s) {
    if (s == "flow") return GenerativeModel::Family::flow;
    if (s == "ddpm") return GenerativeModel::Family::ddpm;
    throw ConfigError("model family must be 'flow' or 'ddpm', got '" + s + "'");
}

LatencyReport measure_sampling_latency(const GenerativeModel& model, const SampleRequest& req,
                                       int repetitions) {
    if (repetitions < 3) throw ConfigError("latency: need at least 3 repetitions");
    using clock = std::chrono::steady_clock;

    SampleStats warm;
    model.sample(req, &warm);

    std::vector<double> times_ms;
    times_ms.reserve(static_cast<std::size_t>(repetitions));
    for (int r = 0; r < repetitions; ++r) {
        const auto begin = clock::now();
        model.sample(req, nullptr);
        const auto end = clock::now();
        times_ms.push_back(std::chrono::duration<double, std::milli>(end - begin).count());
    }
    double sum = 0.0;
    for (double v : times_ms) sum += v;
    const double mean = sum / repetitions;
    double ss = 0.0;
    for (double v : times_ms) ss += (v - mean) * (v - mean);

    LatencyReport rep;
    rep.mean_ms = mean;
    rep.std_ms = std::sqrt(ss / (repetitions - 1));
    rep.network_calls = warm.network_calls;
    rep.repetitions = repetitions;
    return rep;
}

}  // namespace trajflow
