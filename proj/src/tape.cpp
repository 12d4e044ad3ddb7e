#include "trajflow/tape.hpp"

#include <utility>

#include "trajflow/kernels.hpp"

namespace trajflow {

void Tape::check_var(Var v, const char* op) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
        throw UsageError(std::string(op) + ": Var does not belong to this tape");
    }
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(std::string name, Array value) {
    if (name.empty()) throw UsageError("leaf: name must be non-empty");
    for (const auto& n : nodes_) {
        if (n.op == Op::leaf && n.name == name) {
            throw UsageError("leaf: duplicate leaf name '" + name + "'");
        }
    }
    Node n{.op = Op::leaf, .value = std::move(value), .name = std::move(name)};
    return push(std::move(n));
}

Var Tape::constant(Array value) {
    return push(Node{.op = Op::constant, .value = std::move(value)});
}

Var Tape::add(Var a, Var b) {
    check_var(a, "add");
    check_var(b, "add");
    Node n{.op = Op::add, .in0 = a.id, .in1 = b.id};
    n.value = k_add(in_value(a.id), in_value(b.id));
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    check_var(a, "sub");
    check_var(b, "sub");
    Node n{.op = Op::sub, .in0 = a.id, .in1 = b.id};
    n.value = k_sub(in_value(a.id), in_value(b.id));
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    check_var(a, "mul");
    check_var(b, "mul");
    Node n{.op = Op::mul, .in0 = a.id, .in1 = b.id};
    n.value = k_mul(in_value(a.id), in_value(b.id));
    return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
    check_var(a, "scale");
    Node n{.op = Op::scale, .in0 = a.id, .d0 = factor};
    n.value = k_scale(in_value(a.id), factor);
    return push(std::move(n));
}

Var Tape::dense(Var x, Var w, Var b) {
    check_var(x, "dense");
    check_var(w, "dense");
    check_var(b, "dense");
    Node n{.op = Op::dense, .in0 = x.id, .in1 = w.id, .in2 = b.id};
    n.value = k_dense(in_value(x.id), in_value(w.id), in_value(b.id));
    return push(std::move(n));
}

Var Tape::conv1d(Var x, Var w, Var b, int stride) {
    check_var(x, "conv1d");
    check_var(w, "conv1d");
    check_var(b, "conv1d");
    Node n{.op = Op::conv1d, .in0 = x.id, .in1 = w.id, .in2 = b.id, .i0 = stride};
    n.value = k_conv1d(in_value(x.id), in_value(w.id), in_value(b.id), stride);
    return push(std::move(n));
}

Var Tape::group_norm(Var x, Var gamma, Var beta, int groups, double eps) {
    check_var(x, "group_norm");
    check_var(gamma, "group_norm");
    check_var(beta, "group_norm");
    Node n{.op = Op::group_norm, .in0 = x.id, .in1 = gamma.id, .in2 = beta.id, .i0 = groups,
           .d0 = eps};
    n.value = k_group_norm(in_value(x.id), in_value(gamma.id), in_value(beta.id), groups, eps);
    return push(std::move(n));
}

Var Tape::mish(Var x) {
    check_var(x, "mish");
    Node n{.op = Op::mish, .in0 = x.id};
    n.value = k_mish(in_value(x.id));
    return push(std::move(n));
}

Var Tape::film(Var x, Var scale, Var shift) {
    check_var(x, "film");
    check_var(scale, "film");
    check_var(shift, "film");
    Node n{.op = Op::film, .in0 = x.id, .in1 = scale.id, .in2 = shift.id};
    n.value = k_film(in_value(x.id), in_value(scale.id), in_value(shift.id));
    return push(std::move(n));
}

Var Tape::concat_channels(Var a, Var b) {
    check_var(a, "concat_channels");
    check_var(b, "concat_channels");
    Node n{.op = Op::concat_channels, .in0 = a.id, .in1 = b.id};
    n.value = k_concat_channels(in_value(a.id), in_value(b.id));
    return push(std::move(n));
}

Var Tape::slice_vec(Var x, std::size_t offset, std::size_t len) {
    check_var(x, "slice_vec");
    Node n{.op = Op::slice_vec, .in0 = x.id, .z0 = offset, .z1 = len};
    n.value = k_slice_vec(in_value(x.id), offset, len);
    return push(std::move(n));
}

Var Tape::upsample_nearest2(Var x) {
    check_var(x, "upsample_nearest2");
    Node n{.op = Op::upsample_nearest2, .in0 = x.id};
    n.value = k_upsample_nearest2(in_value(x.id));
    return push(std::move(n));
}

Var Tape::transpose2d(Var x) {
    check_var(x, "transpose2d");
    Node n{.op = Op::transpose2d, .in0 = x.id};
    n.value = k_transpose2d(in_value(x.id));
    return push(std::move(n));
}

Var Tape::mean_square(Var x) {
    check_var(x, "mean_square");
    Node n{.op = Op::mean_square, .in0 = x.id};
    n.value = k_mean_square(in_value(x.id));
    return push(std::move(n));
}

Var Tape::mean(Var x) {
    check_var(x, "mean");
    Node n{.op = Op::mean, .in0 = x.id};
    n.value = k_mean(in_value(x.id));
    return push(std::move(n));
}

Var Tape::sum(Var x) {
    check_var(x, "sum");
    Node n{.op = Op::sum, .in0 = x.id};
    n.value = k_sum(in_value(x.id));
    return push(std::move(n));
}

const Array& Tape::value(Var v) const {
    check_var(v, "value");
    return nodes_[static_cast<std::size_t>(v.id)].value;
}

Array Tape::eval(const Node& n, const std::vector<Array>& v) const {
    auto a = [&](int id) -> const Array& { return v[static_cast<std::size_t>(id)]; };
    switch (n.op) {
        case Op::leaf:
        case Op::constant:
            return n.value;
        case Op::add:
            return k_add(a(n.in0), a(n.in1));
        case Op::sub:
            return k_sub(a(n.in0), a(n.in1));
        case Op::mul:
            return k_mul(a(n.in0), a(n.in1));
        case Op::scale:
            return k_scale(a(n.in0), n.d0);
        case Op::dense:
            return k_dense(a(n.in0), a(n.in1), a(n.in2));
        case Op::conv1d:
            return k_conv1d(a(n.in0), a(n.in1), a(n.in2), n.i0);
        case Op::group_norm:
            return k_group_norm(a(n.in0), a(n.in1), a(n.in2), n.i0, n.d0);
        case Op::mish:
            return k_mish(a(n.in0));
        case Op::film:
            return k_film(a(n.in0), a(n.in1), a(n.in2));
        case Op::concat_channels:
            return k_concat_channels(a(n.in0), a(n.in1));
        case Op::slice_vec:
            return k_slice_vec(a(n.in0), n.z0, n.z1);
        case Op::upsample_nearest2:
            return k_upsample_nearest2(a(n.in0));
        case Op::transpose2d:
            return k_transpose2d(a(n.in0));
        case Op::mean_square:
            return k_mean_square(a(n.in0));
        case Op::mean:
            return k_mean(a(n.in0));
        case Op::sum:
            return k_sum(a(n.in0));
    }
    throw UsageError("eval: unknown op");
}

bool Tape::replay_matches() const {
    std::vector<Array> values;
    values.reserve(nodes_.size());
    for (const auto& n : nodes_) values.push_back(eval(n, values));
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!(values[i] == nodes_[i].value)) return false;
    }
    return true;
}

GradMap Tape::backward(Var output) {
    check_var(output, "backward");
    const Array& out = nodes_[static_cast<std::size_t>(output.id)].value;
    if (out.size() != 1) {
        throw UsageError("backward: output is not scalar; pass an explicit seed");
    }
    return backward(output, Array::scalar(1.0));
}

GradMap Tape::backward(Var output, const Array& seed) {
    check_var(output, "backward");
    if (consumed_) throw UsageError("backward: tape already consumed");
    consumed_ = true;
    const std::size_t out_id = static_cast<std::size_t>(output.id);
    if (!seed.same_shape(nodes_[out_id].value)) {
        throw ShapeError("backward: seed shape " + shape_str(seed.shape()) +
                         " does not match output " + shape_str(nodes_[out_id].value.shape()));
    }

    std::vector<Array> adj(nodes_.size());
    std::vector<bool> live(nodes_.size(), false);
    adj[out_id] = seed;
    live[out_id] = true;

    auto ensure = [&](int id) -> Array& {
        const auto i = static_cast<std::size_t>(id);
        if (!live[i]) {
            adj[i] = Array::zeros(nodes_[i].value.shape());
            live[i] = true;
        }
        return adj[i];
    };

    for (std::size_t idx = out_id + 1; idx-- > 0;) {
        if (!live[idx]) continue;
        const Node& n = nodes_[idx];
        const Array& g = adj[idx];
        switch (n.op) {
            case Op::leaf:
            case Op::constant:
                break;
            case Op::add: {
                Array& da = ensure(n.in0);
                Array& dbb = ensure(n.in1);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    da[i] += g[i];
                    dbb[i] += g[i];
                }
                break;
            }
            case Op::sub: {
                Array& da = ensure(n.in0);
                Array& dbb = ensure(n.in1);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    da[i] += g[i];
                    dbb[i] -= g[i];
                }
                break;
            }
            case Op::mul: {
                const Array& a = in_value(n.in0);
                const Array& b = in_value(n.in1);
                Array& da = ensure(n.in0);
                Array& dbb = ensure(n.in1);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    da[i] += g[i] * b[i];
                    dbb[i] += g[i] * a[i];
                }
                break;
            }
            case Op::scale: {
                Array& da = ensure(n.in0);
                for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.d0;
                break;
            }
            case Op::dense:
                kb_dense(g, in_value(n.in0), in_value(n.in1), ensure(n.in0), ensure(n.in1),
                         ensure(n.in2));
                break;
            case Op::conv1d:
                kb_conv1d(g, in_value(n.in0), in_value(n.in1), ensure(n.in0), ensure(n.in1),
                          ensure(n.in2), n.i0);
                break;
            case Op::group_norm:
                kb_group_norm(g, in_value(n.in0), in_value(n.in1), ensure(n.in0), ensure(n.in1),
                              ensure(n.in2), n.i0, n.d0);
                break;
            case Op::mish:
                kb_mish(g, in_value(n.in0), ensure(n.in0));
                break;
            case Op::film:
                kb_film(g, in_value(n.in0), in_value(n.in1), ensure(n.in0), ensure(n.in1),
                        ensure(n.in2));
                break;
            case Op::concat_channels:
                kb_concat_channels(g, ensure(n.in0), ensure(n.in1));
                break;
            case Op::slice_vec:
                kb_slice_vec(g, ensure(n.in0), n.z0);
                break;
            case Op::upsample_nearest2:
                kb_upsample_nearest2(g, ensure(n.in0));
                break;
            case Op::transpose2d:
                kb_transpose2d(g, ensure(n.in0));
                break;
            case Op::mean_square:
                kb_mean_square(g, in_value(n.in0), ensure(n.in0));
                break;
            case Op::mean:
                kb_mean(g, in_value(n.in0), ensure(n.in0));
                break;
            case Op::sum:
                kb_sum(g, in_value(n.in0), ensure(n.in0));
                break;
        }
    }

    GradMap grads;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.op != Op::leaf) continue;
        grads[n.name] = live[i] ? std::move(adj[i]) : Array::zeros(n.value.shape());
    }
    return grads;
}

}  // namespace trajflow
