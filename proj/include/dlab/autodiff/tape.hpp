#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "dlab/autodiff/tensor.hpp"

namespace dlab::ad {

using NodeId = std::size_t;

enum class OpKind {
    Leaf,
    Constant,
    MatMul,
    Add,
    Mul,
    Relu,
    Scale,
    AddBias,
    EmbedMeanPool,
    Softmax,
    LogSoftmax,
    Sum,
    Mean,
    Pick,
    Reshape,
};

const char* op_name(OpKind kind) noexcept;

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    NodeId id = 0;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
};

/// Gradient of a scalar loss with respect to every node that requires one.
class Gradients {
public:
    explicit Gradients(std::vector<Tensor> grads) : grads_(std::move(grads)) {}

    /// Gradient for the node; zeros when the loss does not depend on it.
    Tensor of(Var v) const;
    /// Moves the gradient out; later calls for the same node return zeros.
    Tensor take(Var v);
    std::size_t visited() const noexcept { return visited_; }

private:
    friend class Tape;
    std::vector<Tensor> grads_;
    std::size_t visited_ = 0;
};

/// Append-only record of a forward computation. Node k only references
/// nodes < k, so insertion order is a topological order.
class Tape {
public:
    /// Receives the output gradient and accumulates into input gradients.
    /// `input_grads[i]` is null when input i needs no gradient.
    using BackwardFn =
        std::function<void(const Tape&, NodeId self, const Tensor& grad_out, std::span<Tensor*> input_grads)>;

    Var leaf(Tensor value);
    Var constant(Tensor value);

    Var push(OpKind kind, std::vector<NodeId> inputs, Tensor value, BackwardFn backward);

    std::size_t size() const noexcept { return nodes_.size(); }
    const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
    OpKind kind(NodeId id) const { return nodes_.at(id).kind; }
    const std::vector<NodeId>& inputs(NodeId id) const { return nodes_.at(id).inputs; }
    bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }

    /// Reverse accumulation from a scalar loss. Throws ContractError if the
    /// loss has more than one element.
    Gradients backward(Var loss) const;

private:
    struct Node {
        OpKind kind;
        std::vector<NodeId> inputs;
        Tensor value;
        BackwardFn backward;
        bool requires_grad;
    };
    // deque keeps value() references valid while later ops are pushed.
    std::deque<Node> nodes_;
};

// Operations. All inputs must live on the same tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var relu(Var x);
Var scale(Var x, double factor);
/// x [m x n] plus a row vector b [n] broadcast over rows.
Var add_bias(Var x, Var b);
/// Mean of embedding rows over the non-pad ids of each sequence.
/// `ids` is rows x seq_len, row-major; returns [rows x embed_dim].
Var embed_mean_pool(Var table, std::span<const std::int32_t> ids, std::size_t seq_len,
                    std::int32_t pad_id = 0);
/// Softmax over the last dimension, with max subtraction.
Var softmax(Var x);
Var log_softmax(Var x);
Var sum(Var x);
Var mean(Var x);
/// Selects x[i, index[i]] from a matrix; returns [rows].
Var pick(Var x, std::span<const std::size_t> index);
Var reshape(Var x, Shape shape);

// Plain (untaped) helpers shared with oracles and inference code.
std::vector<double> softmax_values(std::span<const double> logits);
std::vector<double> log_softmax_values(std::span<const double> logits);

} // namespace dlab::ad
