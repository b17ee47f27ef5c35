#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "penn/tensor.hpp"

namespace penn {

/// Handle to a node recorded on a Tape.
struct Var {
    std::int32_t id = -1;
    bool valid() const noexcept { return id >= 0; }
};

enum class Op : std::uint8_t {
    Constant,
    Parameter,
    Linear,
    Relu,
    Add,
    Sub,
    Mul,
    Affine,
    Abs,
    Square,
    Mean,
    Sum,
    Concat,
    Slice,
    RowDot,
    ScaleRows,
    Softmax,
    PairSoftmax,
};

const char* op_name(Op op) noexcept;

/// Reverse-mode autodiff record.
///
/// Nodes are appended in evaluation order, so node index order is a
/// topological order and backward() walks indices in reverse. A Tape is
/// single-writer; build one per forward pass (it is cheap) rather than sharing.
///
/// Row-wise ops (softmax, row_dot, scale_rows, concat, slice) act along the
/// last axis and treat a rank-1 tensor as a single row.
class Tape {
public:
    Tape() { nodes_.reserve(64); }

    /// Leaf that never receives a gradient.
    Var constant(Tensor value);
    /// Leaf referencing caller-owned storage; the tensor must outlive the tape.
    Var parameter(const Tensor& value);

    /// y = x W^T + b with W [out x in], b [out]; x is [in] or [batch x in].
    Var linear(Var x, Var w, Var b);
    /// max(0, x); derivative at 0 is taken as 0.
    Var relu(Var x);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    /// scale * x + shift, elementwise.
    Var affine(Var x, double scale, double shift = 0.0);
    Var scale(Var x, double factor) { return affine(x, factor, 0.0); }
    /// |x|; derivative at 0 is taken as 0.
    Var abs(Var x);
    Var square(Var x);
    Var mean(Var x);
    Var sum(Var x);
    Var concat(Var a, Var b);
    Var slice(Var x, std::size_t start, std::size_t length);
    /// Per-row dot product; [B x n] . [B x n] -> [B x 1] ([n] . [n] -> [1]).
    Var row_dot(Var a, Var b);
    /// out[r, c] = column[r] * m[r, c]; column has one entry per row of m.
    Var scale_rows(Var column, Var m);
    /// Row-wise softmax(x / temperature), max-subtracted.
    Var softmax(Var x, double temperature);
    /// Elementwise first weight of a two-way softmax: e^(a/T) / (e^(a/T) + e^(b/T)).
    Var pair_softmax(Var a, Var b, double temperature);

    const Tensor& value(Var v) const;
    /// Gradient of the last backward() root with respect to v.
    const Tensor& grad(Var v) const;

    /// Accumulate d(root)/d(node) for every node that depends on a parameter.
    /// Throws ContractError unless root holds exactly one element.
    void backward(Var root);

    /// Re-evaluate every node from the leaves; used to check the record is
    /// self-consistent.
    std::vector<Tensor> replay() const;

    /// Activation pattern of every kinked op (relu and abs inputs), in record
    /// order. Two evaluations with equal signatures sit on the same smooth piece.
    std::vector<std::int8_t> kink_signature() const;

    std::size_t size() const noexcept { return nodes_.size(); }
    Op op(Var v) const { return node(v).op; }

private:
    struct Node {
        Op op = Op::Constant;
        std::array<std::int32_t, 3> in{-1, -1, -1};
        double a = 0.0;
        double shift = 0.0;
        std::size_t i0 = 0;
        std::size_t i1 = 0;
        Tensor value;
        const Tensor* ref = nullptr;
        Tensor grad;
        bool requires_grad = false;
    };

    const Node& node(Var v) const;
    const Tensor& val(std::int32_t id) const;
    Var push(Node n);
    void check_same_shape(const char* what, Var a, Var b) const;
    void propagate(std::size_t index);
    Tensor& grad_slot(std::int32_t id);

    static Tensor evaluate(const Node& n, const Tensor* x0, const Tensor* x1, const Tensor* x2);

    std::vector<Node> nodes_;
    bool has_backward_ = false;
};

}  // namespace penn
