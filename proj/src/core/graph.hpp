#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace minv {

// Handle into a Graph's node list.
struct Value {
    std::uint32_t id = 0;
};

// Eager reverse-mode tape over dense tensors. Each op computes its forward
// value at construction, so node order is already topological. When a leaf is
// created with a tangent direction, every node additionally carries the
// forward (directional) derivative of its value; the reverse sweep then
// propagates dual adjoints, which yields Hessian-vector products exactly
// (directional derivative of the gradient).
//
// A graph is confined to one thread; tensors read from it are plain values.
class Graph {
public:
    Value leaf(Tensor v);
    Value leaf(Tensor v, Tensor tangent);
    Value constant(Tensor v);

    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);
    Value neg(Value a);
    Value scale(Value a, double c);
    Value rsub(double c, Value a); // c - a
    Value add_scalar(Value a, double c);

    Value matmul(Value a, Value b);
    Value add_row(Value m, Value row);

    Value relu(Value a);
    Value sigmoid(Value a);
    Value tanh(Value a);
    Value log(Value a);
    Value clamp_min(Value a, double lo);

    Value sum(Value a);
    Value mean(Value a);

    // mean over rows of [logsumexp(z_i) - z_i . y_i]; targets are one-hot rows
    Value softmax_ce(Value logits, Tensor targets);

    // sum_i |a_i|^p with subgradient 0 at a_i == 0
    Value lp_sum(Value a, int p);

    const Tensor& value(Value v) const { return nodes_[v.id].val; }
    const Tensor& tangent(Value v) const;
    bool tangent_mode() const { return tangent_mode_; }
    std::size_t node_count() const { return nodes_.size(); }

    // reverse sweep; returns d(loss)/d(leaf) per requested leaf
    std::vector<Tensor> grad(Value loss, std::span<const Value> leaves);
    Tensor grad_of(Value loss, Value leaf);

    struct DualGrad {
        std::vector<Tensor> grad;     // gradient at x
        std::vector<Tensor> grad_dot; // directional derivative of the gradient
    };
    DualGrad grad_dual(Value loss, std::span<const Value> leaves);

private:
    enum class OpKind : std::uint8_t {
        leaf, constant,
        add, sub, mul, neg, scale, rsub, add_scalar,
        matmul, add_row,
        relu, sigmoid, tanh_fn, log_fn, clamp_min,
        sum_all, mean_all,
        softmax_ce, lp_sum,
    };

    struct Node {
        OpKind op;
        int a = -1, b = -1;
        double c = 0.0; // scalar parameter
        int ip = 0;     // integer parameter (lp order)
        Tensor val;
        Tensor tan;      // forward tangent, tangent mode only
        Tensor aux;      // softmax probs for softmax_ce
        Tensor aux_tan;  // tangent of aux
        Tensor targets;  // one-hot targets for softmax_ce
    };

    Value push(Node n);
    void backward(Value loss, std::vector<Tensor>& adj, std::vector<Tensor>& adjt, bool dual) const;
    static const char* op_name(OpKind k);

    std::vector<Node> nodes_;
    bool tangent_mode_ = false;
};

// Numerically stable helpers shared with inference code.
void softmax_rows_inplace(Tensor& m);
Tensor softmax_rows(const Tensor& m);

} // namespace minv
