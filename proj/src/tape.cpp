#include "penn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "penn/errors.hpp"
#include "penn/kernels.hpp"

namespace penn {

namespace {

Tensor shaped(std::size_t rank, std::size_t rows, std::size_t cols) {
    return rank == 2 ? Tensor(rows, cols) : Tensor(cols);
}

// Output shape for per-row reductions producing one value per row.
Tensor per_row(const Tensor& like) {
    return like.rank() == 2 ? Tensor(like.rows(), std::size_t{1}) : Tensor(1);
}

}  // namespace

const char* op_name(Op op) noexcept {
    switch (op) {
        case Op::Constant: return "constant";
        case Op::Parameter: return "parameter";
        case Op::Linear: return "linear";
        case Op::Relu: return "relu";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Affine: return "affine";
        case Op::Abs: return "abs";
        case Op::Square: return "square";
        case Op::Mean: return "mean";
        case Op::Sum: return "sum";
        case Op::Concat: return "concat";
        case Op::Slice: return "slice";
        case Op::RowDot: return "row_dot";
        case Op::ScaleRows: return "scale_rows";
        case Op::Softmax: return "softmax";
        case Op::PairSoftmax: return "pair_softmax";
    }
    return "?";
}

const Tape::Node& Tape::node(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
        throw ContractError("Tape: invalid variable handle " + std::to_string(v.id));
    }
    return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::val(std::int32_t id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.ref ? *n.ref : n.value;
}

const Tensor& Tape::value(Var v) const {
    const Node& n = node(v);
    return n.ref ? *n.ref : n.value;
}

const Tensor& Tape::grad(Var v) const {
    const Node& n = node(v);
    if (!has_backward_ || !n.requires_grad) {
        throw ContractError(std::string("Tape::grad: no gradient recorded for ") + op_name(n.op) +
                            " node " + std::to_string(v.id));
    }
    return n.grad;
}

Var Tape::push(Node n) {
    for (auto id : n.in) {
        if (id >= 0 && nodes_[static_cast<std::size_t>(id)].requires_grad) n.requires_grad = true;
    }
    const Tensor* x0 = n.in[0] >= 0 ? &val(n.in[0]) : nullptr;
    const Tensor* x1 = n.in[1] >= 0 ? &val(n.in[1]) : nullptr;
    const Tensor* x2 = n.in[2] >= 0 ? &val(n.in[2]) : nullptr;
    n.value = evaluate(n, x0, x1, x2);
    nodes_.push_back(std::move(n));
    has_backward_ = false;
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

void Tape::check_same_shape(const char* what, Var a, Var b) const {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (!ta.same_shape(tb)) {
        throw DimensionError(std::string(what) + ": shape " + ta.shape_string() +
                             " does not match " + tb.shape_string());
    }
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    has_backward_ = false;
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(const Tensor& value) {
    Node n;
    n.op = Op::Parameter;
    n.ref = &value;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    has_backward_ = false;
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::linear(Var x, Var w, Var b) {
    const Tensor& tx = value(x);
    const Tensor& tw = value(w);
    const Tensor& tb = value(b);
    if (tw.rank() != 2 || tb.rank() != 1 || tb.size() != tw.rows()) {
        throw DimensionError("fc_forward: weights " + tw.shape_string() + " and bias " +
                             tb.shape_string() + " do not form a dense layer");
    }
    if (tx.cols() != tw.cols()) {
        throw DimensionError("fc_forward: input shape " + tx.shape_string() +
                             " does not match layer weights " + tw.shape_string() +
                             " (expects " + std::to_string(tw.cols()) + " inputs)");
    }
    Node n;
    n.op = Op::Linear;
    n.in = {x.id, w.id, b.id};
    return push(std::move(n));
}

Var Tape::relu(Var x) {
    node(x);
    Node n;
    n.op = Op::Relu;
    n.in[0] = x.id;
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    check_same_shape("add", a, b);
    Node n;
    n.op = Op::Add;
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    check_same_shape("sub", a, b);
    Node n;
    n.op = Op::Sub;
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    check_same_shape("mul", a, b);
    Node n;
    n.op = Op::Mul;
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::affine(Var x, double scale, double shift) {
    node(x);
    Node n;
    n.op = Op::Affine;
    n.in[0] = x.id;
    n.a = scale;
    n.shift = shift;
    return push(std::move(n));
}

Var Tape::abs(Var x) {
    node(x);
    Node n;
    n.op = Op::Abs;
    n.in[0] = x.id;
    return push(std::move(n));
}

Var Tape::square(Var x) {
    node(x);
    Node n;
    n.op = Op::Square;
    n.in[0] = x.id;
    return push(std::move(n));
}

Var Tape::mean(Var x) {
    if (value(x).empty()) throw DimensionError("mean: empty tensor");
    Node n;
    n.op = Op::Mean;
    n.in[0] = x.id;
    return push(std::move(n));
}

Var Tape::sum(Var x) {
    node(x);
    Node n;
    n.op = Op::Sum;
    n.in[0] = x.id;
    return push(std::move(n));
}

Var Tape::concat(Var a, Var b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    if (ta.rank() != tb.rank() || ta.rows() != tb.rows()) {
        throw DimensionError("concat: cannot stack " + ta.shape_string() + " with " +
                             tb.shape_string());
    }
    Node n;
    n.op = Op::Concat;
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::slice(Var x, std::size_t start, std::size_t length) {
    const Tensor& tx = value(x);
    if (length == 0 || start + length > tx.cols()) {
        throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                             std::to_string(start + length) + ") outside " + tx.shape_string());
    }
    Node n;
    n.op = Op::Slice;
    n.in[0] = x.id;
    n.i0 = start;
    n.i1 = length;
    return push(std::move(n));
}

Var Tape::row_dot(Var a, Var b) {
    check_same_shape("row_dot", a, b);
    Node n;
    n.op = Op::RowDot;
    n.in = {a.id, b.id, -1};
    return push(std::move(n));
}

Var Tape::scale_rows(Var column, Var m) {
    const Tensor& tc = value(column);
    const Tensor& tm = value(m);
    if (tc.size() != tm.rows()) {
        throw DimensionError("scale_rows: column " + tc.shape_string() + " does not match rows of " +
                             tm.shape_string());
    }
    Node n;
    n.op = Op::ScaleRows;
    n.in = {column.id, m.id, -1};
    return push(std::move(n));
}

Var Tape::softmax(Var x, double temperature) {
    if (!(temperature > 0.0)) {
        throw ParameterError("softmax: temperature must be positive, got " +
                             std::to_string(temperature));
    }
    if (value(x).cols() == 0) throw DimensionError("softmax: empty input");
    Node n;
    n.op = Op::Softmax;
    n.in[0] = x.id;
    n.a = temperature;
    return push(std::move(n));
}

Var Tape::pair_softmax(Var a, Var b, double temperature) {
    if (!(temperature > 0.0)) {
        throw ParameterError("pair_softmax: temperature must be positive, got " +
                             std::to_string(temperature));
    }
    check_same_shape("pair_softmax", a, b);
    Node n;
    n.op = Op::PairSoftmax;
    n.in = {a.id, b.id, -1};
    n.a = temperature;
    return push(std::move(n));
}

Tensor Tape::evaluate(const Node& n, const Tensor* x0, const Tensor* x1, const Tensor* x2) {
    switch (n.op) {
        case Op::Constant:
        case Op::Parameter:
            return n.ref ? *n.ref : n.value;
        case Op::Linear: {
            const std::size_t batch = x0->rows();
            const std::size_t in = x1->cols();
            const std::size_t out = x1->rows();
            Tensor y = shaped(x0->rank(), batch, out);
            kernels::omp::linear_forward(x0->data(), batch, in, x1->data(), x2->data(), out,
                                         y.data());
            return y;
        }
        case Op::Relu: {
            Tensor y = *x0;
            for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
            return y;
        }
        case Op::Add: {
            Tensor y = *x0;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += (*x1)[i];
            return y;
        }
        case Op::Sub: {
            Tensor y = *x0;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= (*x1)[i];
            return y;
        }
        case Op::Mul: {
            Tensor y = *x0;
            for (std::size_t i = 0; i < y.size(); ++i) y[i] *= (*x1)[i];
            return y;
        }
        case Op::Affine: {
            Tensor y = *x0;
            for (auto& v : y.data()) v = n.a * v + n.shift;
            return y;
        }
        case Op::Abs: {
            Tensor y = *x0;
            for (auto& v : y.data()) v = std::fabs(v);
            return y;
        }
        case Op::Square: {
            Tensor y = *x0;
            for (auto& v : y.data()) v = v * v;
            return y;
        }
        case Op::Mean:
        case Op::Sum: {
            double acc = 0.0;
            for (double v : x0->data()) acc += v;
            if (n.op == Op::Mean) acc /= static_cast<double>(x0->size());
            return Tensor::vector({acc});
        }
        case Op::Concat: {
            const std::size_t rows = x0->rows();
            const std::size_t ca = x0->cols();
            const std::size_t cb = x1->cols();
            Tensor y = shaped(x0->rank(), rows, ca + cb);
            for (std::size_t r = 0; r < rows; ++r) {
                auto dst = y.row(r);
                std::copy_n(x0->row(r).begin(), ca, dst.begin());
                std::copy_n(x1->row(r).begin(), cb, dst.begin() + static_cast<std::ptrdiff_t>(ca));
            }
            return y;
        }
        case Op::Slice: {
            const std::size_t rows = x0->rows();
            Tensor y = shaped(x0->rank(), rows, n.i1);
            for (std::size_t r = 0; r < rows; ++r) {
                auto src = x0->row(r);
                std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(n.i0), n.i1, y.row(r).begin());
            }
            return y;
        }
        case Op::RowDot: {
            Tensor y = per_row(*x0);
            for (std::size_t r = 0; r < x0->rows(); ++r) {
                auto a = x0->row(r);
                auto b = x1->row(r);
                double acc = 0.0;
                for (std::size_t c = 0; c < a.size(); ++c) acc += a[c] * b[c];
                y[r] = acc;
            }
            return y;
        }
        case Op::ScaleRows: {
            Tensor y = *x1;
            for (std::size_t r = 0; r < y.rows(); ++r) {
                const double s = (*x0)[r];
                for (auto& v : y.row(r)) v *= s;
            }
            return y;
        }
        case Op::Softmax: {
            Tensor y = *x0;
            for (std::size_t r = 0; r < y.rows(); ++r) {
                auto row = y.row(r);
                const double mx = *std::max_element(row.begin(), row.end());
                double denom = 0.0;
                for (auto& v : row) {
                    v = std::exp((v - mx) / n.a);
                    denom += v;
                }
                for (auto& v : row) v /= denom;
            }
            return y;
        }
        case Op::PairSoftmax: {
            Tensor y = *x0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double a = (*x0)[i];
                const double b = (*x1)[i];
                const double mx = std::max(a, b);
                const double ea = std::exp((a - mx) / n.a);
                const double eb = std::exp((b - mx) / n.a);
                y[i] = ea / (ea + eb);
            }
            return y;
        }
    }
    throw ContractError("Tape: unknown op");
}

Tensor& Tape::grad_slot(std::int32_t id) { return nodes_[static_cast<std::size_t>(id)].grad; }

void Tape::backward(Var root) {
    const Node& r = node(root);
    if (r.value.size() != 1 && !(r.ref && r.ref->size() == 1)) {
        throw ContractError("backward: root must be a scalar, got shape " +
                            value(root).shape_string());
    }
    const auto last = static_cast<std::size_t>(root.id);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Node& n = nodes_[i];
        if (n.requires_grad && i <= last) {
            n.grad = val(static_cast<std::int32_t>(i)).zeros_like();
        } else {
            n.grad = Tensor();
        }
    }
    has_backward_ = true;
    if (!r.requires_grad) return;
    nodes_[last].grad[0] = 1.0;
    for (std::size_t i = last + 1; i-- > 0;) {
        if (nodes_[i].requires_grad) propagate(i);
    }
}

void Tape::propagate(std::size_t index) {
    const Node& n = nodes_[index];
    const Tensor& dy = n.grad;
    auto wants = [&](int slot) {
        return n.in[slot] >= 0 && nodes_[static_cast<std::size_t>(n.in[slot])].requires_grad;
    };
    switch (n.op) {
        case Op::Constant:
        case Op::Parameter:
            return;
        case Op::Linear: {
            const Tensor& x = val(n.in[0]);
            const Tensor& w = val(n.in[1]);
            const std::size_t batch = x.rows();
            const std::size_t in = w.cols();
            const std::size_t out = w.rows();
            if (wants(0)) {
                kernels::omp::linear_backward_input(dy.data(), batch, out, w.data(), in,
                                                    grad_slot(n.in[0]).data());
            }
            if (wants(1) || wants(2)) {
                // Weights and bias are always parameters together in this library;
                // a constant bias just receives a discarded gradient.
                Tensor scratch_w, scratch_b;
                std::span<double> dw, db;
                if (wants(1)) {
                    dw = grad_slot(n.in[1]).data();
                } else {
                    scratch_w = w.zeros_like();
                    dw = scratch_w.data();
                }
                if (wants(2)) {
                    db = grad_slot(n.in[2]).data();
                } else {
                    scratch_b = val(n.in[2]).zeros_like();
                    db = scratch_b.data();
                }
                kernels::omp::linear_backward_params(dy.data(), x.data(), batch, in, out, dw, db);
            }
            return;
        }
        case Op::Relu: {
            if (!wants(0)) return;
            const Tensor& x = val(n.in[0]);
            Tensor& dx = grad_slot(n.in[0]);
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] > 0.0) dx[i] += dy[i];
            return;
        }
        case Op::Add:
        case Op::Sub: {
            const double sign = n.op == Op::Add ? 1.0 : -1.0;
            if (wants(0)) {
                Tensor& da = grad_slot(n.in[0]);
                for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i];
            }
            if (wants(1)) {
                Tensor& db = grad_slot(n.in[1]);
                for (std::size_t i = 0; i < dy.size(); ++i) db[i] += sign * dy[i];
            }
            return;
        }
        case Op::Mul: {
            const Tensor& a = val(n.in[0]);
            const Tensor& b = val(n.in[1]);
            if (wants(0)) {
                Tensor& da = grad_slot(n.in[0]);
                for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * b[i];
            }
            if (wants(1)) {
                Tensor& db = grad_slot(n.in[1]);
                for (std::size_t i = 0; i < dy.size(); ++i) db[i] += dy[i] * a[i];
            }
            return;
        }
        case Op::Affine: {
            if (!wants(0)) return;
            Tensor& dx = grad_slot(n.in[0]);
            for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += n.a * dy[i];
            return;
        }
        case Op::Abs: {
            if (!wants(0)) return;
            const Tensor& x = val(n.in[0]);
            Tensor& dx = grad_slot(n.in[0]);
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (x[i] > 0.0) dx[i] += dy[i];
                else if (x[i] < 0.0) dx[i] -= dy[i];
            }
            return;
        }
        case Op::Square: {
            if (!wants(0)) return;
            const Tensor& x = val(n.in[0]);
            Tensor& dx = grad_slot(n.in[0]);
            for (std::size_t i = 0; i < x.size(); ++i) dx[i] += 2.0 * x[i] * dy[i];
            return;
        }
        case Op::Mean:
        case Op::Sum: {
            if (!wants(0)) return;
            Tensor& dx = grad_slot(n.in[0]);
            const double g =
                n.op == Op::Mean ? dy[0] / static_cast<double>(dx.size()) : dy[0];
            for (auto& v : dx.data()) v += g;
            return;
        }
        case Op::Concat: {
            const std::size_t ca = val(n.in[0]).cols();
            const std::size_t cb = val(n.in[1]).cols();
            for (std::size_t r = 0; r < dy.rows(); ++r) {
                auto src = dy.row(r);
                if (wants(0)) {
                    auto da = grad_slot(n.in[0]).row(r);
                    for (std::size_t c = 0; c < ca; ++c) da[c] += src[c];
                }
                if (wants(1)) {
                    auto db = grad_slot(n.in[1]).row(r);
                    for (std::size_t c = 0; c < cb; ++c) db[c] += src[ca + c];
                }
            }
            return;
        }
        case Op::Slice: {
            if (!wants(0)) return;
            Tensor& dx = grad_slot(n.in[0]);
            for (std::size_t r = 0; r < dy.rows(); ++r) {
                auto src = dy.row(r);
                auto dst = dx.row(r);
                for (std::size_t c = 0; c < n.i1; ++c) dst[n.i0 + c] += src[c];
            }
            return;
        }
        case Op::RowDot: {
            const Tensor& a = val(n.in[0]);
            const Tensor& b = val(n.in[1]);
            for (std::size_t r = 0; r < a.rows(); ++r) {
                const double g = dy[r];
                if (wants(0)) {
                    auto da = grad_slot(n.in[0]).row(r);
                    auto br = b.row(r);
                    for (std::size_t c = 0; c < da.size(); ++c) da[c] += g * br[c];
                }
                if (wants(1)) {
                    auto db = grad_slot(n.in[1]).row(r);
                    auto ar = a.row(r);
                    for (std::size_t c = 0; c < db.size(); ++c) db[c] += g * ar[c];
                }
            }
            return;
        }
        case Op::ScaleRows: {
            const Tensor& col = val(n.in[0]);
            const Tensor& m = val(n.in[1]);
            for (std::size_t r = 0; r < m.rows(); ++r) {
                auto g = dy.row(r);
                if (wants(0)) {
                    auto mr = m.row(r);
                    double acc = 0.0;
                    for (std::size_t c = 0; c < g.size(); ++c) acc += g[c] * mr[c];
                    grad_slot(n.in[0])[r] += acc;
                }
                if (wants(1)) {
                    auto dm = grad_slot(n.in[1]).row(r);
                    for (std::size_t c = 0; c < g.size(); ++c) dm[c] += col[r] * g[c];
                }
            }
            return;
        }
        case Op::Softmax: {
            if (!wants(0)) return;
            const Tensor& y = n.value;
            Tensor& dx = grad_slot(n.in[0]);
            for (std::size_t r = 0; r < y.rows(); ++r) {
                auto yr = y.row(r);
                auto gr = dy.row(r);
                double dot = 0.0;
                for (std::size_t c = 0; c < yr.size(); ++c) dot += gr[c] * yr[c];
                auto dxr = dx.row(r);
                for (std::size_t c = 0; c < yr.size(); ++c)
                    dxr[c] += yr[c] * (gr[c] - dot) / n.a;
            }
            return;
        }
        case Op::PairSoftmax: {
            const Tensor& p = n.value;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double d = dy[i] * p[i] * (1.0 - p[i]) / n.a;
                if (wants(0)) grad_slot(n.in[0])[i] += d;
                if (wants(1)) grad_slot(n.in[1])[i] -= d;
            }
            return;
        }
    }
}

std::vector<Tensor> Tape::replay() const {
    std::vector<Tensor> out;
    out.reserve(nodes_.size());
    for (const Node& n : nodes_) {
        const Tensor* x0 = n.in[0] >= 0 ? &out[static_cast<std::size_t>(n.in[0])] : nullptr;
        const Tensor* x1 = n.in[1] >= 0 ? &out[static_cast<std::size_t>(n.in[1])] : nullptr;
        const Tensor* x2 = n.in[2] >= 0 ? &out[static_cast<std::size_t>(n.in[2])] : nullptr;
        out.push_back(evaluate(n, x0, x1, x2));
    }
    return out;
}

std::vector<std::int8_t> Tape::kink_signature() const {
    std::size_t total = 0;
    for (const Node& n : nodes_) {
        if (n.op == Op::Relu || n.op == Op::Abs) total += val(n.in[0]).size();
    }
    std::vector<std::int8_t> sig(total);
    std::size_t i = 0;
    for (const Node& n : nodes_) {
        if (n.op != Op::Relu && n.op != Op::Abs) continue;
        for (double v : val(n.in[0]).data()) sig[i++] = static_cast<std::int8_t>((v > 0.0) - (v < 0.0));
    }
    return sig;
}

}  // namespace penn
