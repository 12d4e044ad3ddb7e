#include "trajflow/net.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "trajflow/kernels.hpp"

namespace trajflow {

namespace {

constexpr double kFreqMin = 1.0;
constexpr double kFreqMax = 1000.0;

// Executors let the architecture be written once and run either directly on
// arrays (inference) or as tape ops (training).
struct EvalExec {
    using V = Array;
    const ParamSet& params;

    const Array& param(const std::string& name) const { return params.at(name); }
    Array constant(Array a) const { return a; }
    Array conv(const Array& x, const Array& w, const Array& b, int stride) const {
        return k_conv1d(x, w, b, stride);
    }
    Array gnorm(const Array& x, const Array& g, const Array& b, int groups) const {
        return k_group_norm(x, g, b, groups, 1e-5);
    }
    Array mish(const Array& x) const { return k_mish(x); }
    Array dense(const Array& x, const Array& w, const Array& b) const { return k_dense(x, w, b); }
    Array film(const Array& x, const Array& s, const Array& t) const { return k_film(x, s, t); }
    Array slice(const Array& x, std::size_t o, std::size_t n) const { return k_slice_vec(x, o, n); }
    Array concat(const Array& a, const Array& b) const { return k_concat_channels(a, b); }
    Array upsample2(const Array& x) const { return k_upsample_nearest2(x); }
    Array add(const Array& a, const Array& b) const { return k_add(a, b); }
    Array transpose(const Array& x) const { return k_transpose2d(x); }
};

struct TapeExec {
    using V = Var;
    Tape& tape;
    const VectorFieldNet::TapeBinding& binding;

    Var param(const std::string& name) const {
        auto it = binding.vars.find(name);
        if (it == binding.vars.end()) throw UsageError("forward_on_tape: unbound param " + name);
        return it->second;
    }
    Var constant(Array a) const { return tape.constant(std::move(a)); }
    Var conv(Var x, Var w, Var b, int stride) const { return tape.conv1d(x, w, b, stride); }
    Var gnorm(Var x, Var g, Var b, int groups) const {
        return tape.group_norm(x, g, b, groups, 1e-5);
    }
    Var mish(Var x) const { return tape.mish(x); }
    Var dense(Var x, Var w, Var b) const { return tape.dense(x, w, b); }
    Var film(Var x, Var s, Var t) const { return tape.film(x, s, t); }
    Var slice(Var x, std::size_t o, std::size_t n) const { return tape.slice_vec(x, o, n); }
    Var concat(Var a, Var b) const { return tape.concat_channels(a, b); }
    Var upsample2(Var x) const { return tape.upsample_nearest2(x); }
    Var add(Var a, Var b) const { return tape.add(a, b); }
    Var transpose(Var x) const { return tape.transpose2d(x); }
};

// Residual block: [conv -> gn -> mish], film, [conv -> gn -> mish], plus a
// 1x1-conv (or identity) residual path.
template <class E>
typename E::V res_block(E& ex, const NetConfig& cfg, const std::string& prefix,
                        typename E::V x, typename E::V cond, std::size_t out_ch,
                        bool identity_skip) {
    auto h = ex.conv(x, ex.param(prefix + "conv1.w"), ex.param(prefix + "conv1.b"), 1);
    h = ex.gnorm(h, ex.param(prefix + "gn1.g"), ex.param(prefix + "gn1.b"), cfg.groups);
    h = ex.mish(h);
    auto ss = ex.dense(cond, ex.param(prefix + "film.w"), ex.param(prefix + "film.b"));
    h = ex.film(h, ex.slice(ss, 0, out_ch), ex.slice(ss, out_ch, out_ch));
    h = ex.conv(h, ex.param(prefix + "conv2.w"), ex.param(prefix + "conv2.b"), 1);
    h = ex.gnorm(h, ex.param(prefix + "gn2.g"), ex.param(prefix + "gn2.b"), cfg.groups);
    h = ex.mish(h);
    auto r = identity_skip
                 ? x
                 : ex.conv(x, ex.param(prefix + "skip.w"), ex.param(prefix + "skip.b"), 1);
    return ex.add(h, r);
}

template <class E>
typename E::V unet_forward(E& ex, const NetConfig& cfg, double t, const Array& traj,
                           const Array& context) {
    if (traj.ndim() != 2 || traj.dim(0) != static_cast<std::size_t>(cfg.horizon) ||
        traj.dim(1) != static_cast<std::size_t>(cfg.state_dim)) {
        throw ShapeError("forward: trajectory " + shape_str(traj.shape()) + " does not match H=" +
                         std::to_string(cfg.horizon) + ", D=" + std::to_string(cfg.state_dim));
    }
    if (context.size() != static_cast<std::size_t>(cfg.context_dim)) {
        throw ShapeError("forward: context length " + std::to_string(context.size()) +
                         " does not match context_dim=" + std::to_string(cfg.context_dim));
    }

    Array te = time_embed(t, cfg.time_embed_dim);
    Array cv({static_cast<std::size_t>(cfg.cond_dim())});
    for (std::size_t i = 0; i < te.size(); ++i) cv[i] = te[i];
    for (std::size_t i = 0; i < context.size(); ++i) cv[te.size() + i] = context[i];

    auto cond = ex.mish(ex.dense(ex.constant(std::move(cv)), ex.param("cond.w"), ex.param("cond.b")));

    auto x = ex.transpose(ex.constant(traj));  // [D x H], channels first
    x = ex.conv(x, ex.param("stem.w"), ex.param("stem.b"), 1);

    const std::size_t base = static_cast<std::size_t>(cfg.base_channels);
    std::vector<typename E::V> skips;
    for (int l = 0; l < cfg.depth; ++l) {
        const std::size_t out_ch = base << (l + 1);
        const std::string p = "down" + std::to_string(l) + ".";
        x = res_block(ex, cfg, p, x, cond, out_ch, /*identity_skip=*/false);
        skips.push_back(x);
        x = ex.conv(x, ex.param(p + "down.w"), ex.param(p + "down.b"), 2);
    }

    x = res_block(ex, cfg, "mid.", x, cond, base << cfg.depth, /*identity_skip=*/true);

    for (int l = cfg.depth - 1; l >= 0; --l) {
        const std::string p = "up" + std::to_string(l) + ".";
        x = ex.conv(ex.upsample2(x), ex.param(p + "up.w"), ex.param(p + "up.b"), 1);
        x = ex.concat(x, skips[static_cast<std::size_t>(l)]);
        const std::size_t out_ch = l > 0 ? (base << l) : base;
        x = res_block(ex, cfg, p, x, cond, out_ch, /*identity_skip=*/false);
    }

    x = ex.mish(ex.gnorm(x, ex.param("head.gn.g"), ex.param("head.gn.b"), cfg.groups));
    x = ex.conv(x, ex.param("head.w"), ex.param("head.b"), 1);
    return ex.transpose(x);
}

void add_uniform(ParamSet& ps, SeededRng& rng, const std::string& name,
                 std::vector<std::size_t> shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    ps.add(name, rng.uniform_array(std::move(shape), -bound, bound));
}

void add_res_block(ParamSet& ps, SeededRng& rng, const NetConfig& cfg, const std::string& prefix,
                   std::size_t in_ch, std::size_t out_ch, bool identity_skip) {
    const std::size_t k = static_cast<std::size_t>(cfg.kernel_size);
    const std::size_t hidden = static_cast<std::size_t>(cfg.cond_hidden());
    add_uniform(ps, rng, prefix + "conv1.w", {out_ch, in_ch, k}, in_ch * k);
    ps.add(prefix + "conv1.b", Array::zeros({out_ch}));
    ps.add(prefix + "gn1.g", Array::full({out_ch}, 1.0));
    ps.add(prefix + "gn1.b", Array::zeros({out_ch}));
    // Zero-initialized modulation head: conditioning starts as the identity.
    ps.add(prefix + "film.w", Array::zeros({2 * out_ch, hidden}));
    ps.add(prefix + "film.b", Array::zeros({2 * out_ch}));
    add_uniform(ps, rng, prefix + "conv2.w", {out_ch, out_ch, k}, out_ch * k);
    ps.add(prefix + "conv2.b", Array::zeros({out_ch}));
    ps.add(prefix + "gn2.g", Array::full({out_ch}, 1.0));
    ps.add(prefix + "gn2.b", Array::zeros({out_ch}));
    if (!identity_skip) {
        add_uniform(ps, rng, prefix + "skip.w", {out_ch, in_ch, 1}, in_ch);
        ps.add(prefix + "skip.b", Array::zeros({out_ch}));
    }
}

}  // namespace

void NetConfig::validate() const {
    if (horizon < 1) throw ConfigError("NetConfig: horizon must be positive");
    if (state_dim < 1) throw ConfigError("NetConfig: state_dim must be positive");
    if (context_dim < 0) throw ConfigError("NetConfig: context_dim must be non-negative");
    if (depth < 1) throw ConfigError("NetConfig: depth must be positive");
    if (base_channels < 1) throw ConfigError("NetConfig: base_channels must be positive");
    if (horizon % (1 << depth) != 0) {
        throw ConfigError("NetConfig: horizon " + std::to_string(horizon) +
                          " not divisible by 2^depth = " + std::to_string(1 << depth));
    }
    if (kernel_size < 1 || kernel_size % 2 == 0) {
        throw ConfigError("NetConfig: kernel_size must be odd and positive");
    }
    if (groups < 1 || base_channels % groups != 0) {
        throw ConfigError("NetConfig: base_channels must be divisible by groups");
    }
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
        throw ConfigError("NetConfig: time_embed_dim must be even and at least 2");
    }
}

Array time_embed(double t, int dim) {
    if (t < 0.0 || t > 1.0) {
        throw DomainError("time_embed: t = " + std::to_string(t) + " outside [0, 1]");
    }
    if (dim < 2 || dim % 2 != 0) {
        throw ConfigError("time_embed: dim must be even and at least 2");
    }
    const std::size_t n = static_cast<std::size_t>(dim) / 2;
    Array out({static_cast<std::size_t>(dim)});
    const double log_ratio = std::log(kFreqMax / kFreqMin);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        const double w = kFreqMin * std::exp(frac * log_ratio);
        out[i] = std::sin(w * t);
        out[n + i] = std::cos(w * t);
    }
    return out;
}

VectorFieldNet::VectorFieldNet(NetConfig cfg, ParamSet params)
    : cfg_(cfg), params_(std::move(params)) {
    cfg_.validate();
}

VectorFieldNet VectorFieldNet::init(const NetConfig& cfg, SeededRng& rng) {
    cfg.validate();
    const std::size_t base = static_cast<std::size_t>(cfg.base_channels);
    const std::size_t d = static_cast<std::size_t>(cfg.state_dim);
    const std::size_t k = static_cast<std::size_t>(cfg.kernel_size);

    ParamSet ps;
    add_uniform(ps, rng, "stem.w", {base, d, k}, d * k);
    ps.add("stem.b", Array::zeros({base}));
    add_uniform(ps, rng, "cond.w",
                {static_cast<std::size_t>(cfg.cond_hidden()),
                 static_cast<std::size_t>(cfg.cond_dim())},
                static_cast<std::size_t>(cfg.cond_dim()));
    ps.add("cond.b", Array::zeros({static_cast<std::size_t>(cfg.cond_hidden())}));

    for (int l = 0; l < cfg.depth; ++l) {
        const std::size_t in_ch = base << l;
        const std::size_t out_ch = base << (l + 1);
        const std::string p = "down" + std::to_string(l) + ".";
        add_res_block(ps, rng, cfg, p, in_ch, out_ch, false);
        add_uniform(ps, rng, p + "down.w", {out_ch, out_ch, k}, out_ch * k);
        ps.add(p + "down.b", Array::zeros({out_ch}));
    }

    const std::size_t deep = base << cfg.depth;
    add_res_block(ps, rng, cfg, "mid.", deep, deep, true);

    for (int l = cfg.depth - 1; l >= 0; --l) {
        const std::size_t c = base << (l + 1);
        const std::size_t out_ch = l > 0 ? (base << l) : base;
        const std::string p = "up" + std::to_string(l) + ".";
        add_uniform(ps, rng, p + "up.w", {c, c, k}, c * k);
        ps.add(p + "up.b", Array::zeros({c}));
        add_res_block(ps, rng, cfg, p, 2 * c, out_ch, false);
    }

    ps.add("head.gn.g", Array::full({base}, 1.0));
    ps.add("head.gn.b", Array::zeros({base}));
    // Zero final projection: the freshly initialized field is identically zero.
    ps.add("head.w", Array::zeros({d, base, k}));
    ps.add("head.b", Array::zeros({d}));

    return VectorFieldNet(cfg, std::move(ps));
}

Array VectorFieldNet::forward(double t, const Array& traj, const Array& context) const {
    EvalExec ex{params_};
    return unet_forward(ex, cfg_, t, traj, context);
}

VectorFieldNet::TapeBinding VectorFieldNet::bind(Tape& tape) const {
    TapeBinding b;
    for (const auto& [name, value] : params_.entries()) {
        b.vars.emplace(name, tape.leaf(name, value));
    }
    return b;
}

Var VectorFieldNet::forward_on_tape(Tape& tape, const TapeBinding& binding, double t,
                                    const Array& traj, const Array& context) const {
    TapeExec ex{tape, binding};
    return unet_forward(ex, cfg_, t, traj, context);
}

}  // namespace trajflow
