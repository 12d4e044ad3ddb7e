#pragma once

#include <map>
#include <string>
#include <vector>

#include "trajflow/array.hpp"

namespace trajflow {

// Gradients keyed by leaf name.
using GradMap = std::map<std::string, Array, std::less<>>;

// Handle to a recorded value. Only meaningful for the tape that produced it.
struct Var {
    int id = -1;
};

// Reverse-mode autodiff over a linear record of primitive operations.
// Operations evaluate eagerly; the tape stores op kind, input ids, parameters
// and the forward value, so the whole forward pass can be replayed and the
// backward pass visits nodes once in reverse order. A tape is single-use:
// build, (optionally) replay-check, backward.
class Tape {
public:
    enum class Op : std::uint8_t {
        leaf,
        constant,
        add,
        sub,
        mul,
        scale,
        dense,
        conv1d,
        group_norm,
        mish,
        film,
        concat_channels,
        slice_vec,
        upsample_nearest2,
        transpose2d,
        mean_square,
        mean,
        sum,
    };

    // Leaves are the differentiation targets; names key the gradient map.
    Var leaf(std::string name, Array value);
    // Constants participate in the forward pass but collect no gradient.
    Var constant(Array value);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double factor);
    Var dense(Var x, Var w, Var b);
    Var conv1d(Var x, Var w, Var b, int stride = 1);
    Var group_norm(Var x, Var gamma, Var beta, int groups, double eps = 1e-5);
    Var mish(Var x);
    Var film(Var x, Var scale, Var shift);
    Var concat_channels(Var a, Var b);
    Var slice_vec(Var x, std::size_t offset, std::size_t len);
    Var upsample_nearest2(Var x);
    Var transpose2d(Var x);
    Var mean_square(Var x);
    Var mean(Var x);
    Var sum(Var x);

    const Array& value(Var v) const;
    std::size_t size() const { return nodes_.size(); }

    // Accumulates d(output)/d(leaf) for every leaf. `seed` must match the
    // output shape; the single-argument form requires a scalar output and
    // seeds with 1. A tape can only be walked backward once.
    GradMap backward(Var output);
    GradMap backward(Var output, const Array& seed);

    // Recomputes every node from the leaves; true iff all values reproduce
    // bit-exactly.
    bool replay_matches() const;

private:
    struct Node {
        Op op;
        int in0 = -1, in1 = -1, in2 = -1;
        int i0 = 0;      // stride / groups
        std::size_t z0 = 0, z1 = 0;  // slice offset / length
        double d0 = 0.0;  // scale factor / eps
        Array value;
        std::string name;  // leaves only
    };

    Var push(Node node);
    Array eval(const Node& node, const std::vector<Array>& values) const;
    const Array& in_value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    void check_var(Var v, const char* op) const;

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace trajflow
