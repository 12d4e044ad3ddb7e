#include "trajflow/optim.hpp"

#include <cmath>

#include "trajflow/errors.hpp"

namespace trajflow {

AdamState AdamState::init(const ParamSet& params) {
    AdamState st;
    for (const auto& [name, p] : params.entries()) {
        st.m.add(name, Array::zeros(p.shape()));
        st.v.add(name, Array::zeros(p.shape()));
    }
    return st;
}

void adam_step(ParamSet& params, const GradMap& grads, AdamState& state, const AdamConfig& cfg) {
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);

    for (auto& [name, p] : params.entries()) {
        auto it = grads.find(name);
        if (it == grads.end()) continue;
        const Array& g = it->second;
        if (!g.same_shape(p)) {
            throw ShapeError("adam_step: gradient shape mismatch for '" + name + "'");
        }
        if (!g.all_finite()) {
            throw NonFiniteError("adam_step: non-finite gradient for '" + name + "'");
        }
        Array& m = state.m.at(name);
        Array& v = state.v.at(name);
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            const double denom = std::sqrt(vhat) + cfg.eps;
            if (denom > 0.0) p[i] -= cfg.lr * mhat / denom;
        }
    }

    // Moments of parameters absent from the gradient map still decay.
    for (auto& [name, m] : state.m.entries()) {
        if (grads.count(name)) continue;
        Array& v = state.v.at(name);
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i] *= cfg.beta1;
            v[i] *= cfg.beta2;
        }
    }
}

}  // namespace trajflow
