#include "dlab/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dlab/errors.hpp"

namespace dlab::ad {

const char* op_name(OpKind kind) noexcept {
    switch (kind) {
        case OpKind::Leaf: return "leaf";
        case OpKind::Constant: return "constant";
        case OpKind::MatMul: return "matmul";
        case OpKind::Add: return "add";
        case OpKind::Mul: return "mul";
        case OpKind::Relu: return "relu";
        case OpKind::Scale: return "scale";
        case OpKind::AddBias: return "add_bias";
        case OpKind::EmbedMeanPool: return "embed_mean_pool";
        case OpKind::Softmax: return "softmax";
        case OpKind::LogSoftmax: return "log_softmax";
        case OpKind::Sum: return "sum";
        case OpKind::Mean: return "mean";
        case OpKind::Pick: return "pick";
        case OpKind::Reshape: return "reshape";
    }
    return "unknown";
}

const Tensor& Var::value() const {
    if (tape == nullptr) throw ContractError("var is not attached to a tape");
    return tape->value(id);
}

Tensor Gradients::of(Var v) const {
    const auto& g = grads_.at(v.id);
    if (g.empty()) return Tensor::zeros(v.shape());
    return g;
}

Tensor Gradients::take(Var v) {
    auto& g = grads_.at(v.id);
    if (g.empty()) return Tensor::zeros(v.shape());
    return std::move(g);
}

Var Tape::leaf(Tensor value) {
    nodes_.push_back(Node{OpKind::Leaf, {}, std::move(value), nullptr, true});
    return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{OpKind::Constant, {}, std::move(value), nullptr, false});
    return Var{this, nodes_.size() - 1};
}

Var Tape::push(OpKind kind, std::vector<NodeId> inputs, Tensor value, BackwardFn backward) {
    const NodeId self = nodes_.size();
    bool needs = false;
    for (auto in : inputs) {
        if (in >= self) throw ContractError("tape input must precede its consumer");
        needs = needs || nodes_[in].requires_grad;
    }
    nodes_.push_back(Node{kind, std::move(inputs), std::move(value), std::move(backward), needs});
    return Var{this, self};
}

Gradients Tape::backward(Var loss) const {
    if (loss.tape != this) throw ContractError("loss belongs to a different tape");
    const auto& out = nodes_.at(loss.id).value;
    if (out.size() != 1) {
        throw ContractError("backward needs a scalar loss, got shape " + shape_to_string(out.shape()));
    }
    Gradients result(std::vector<Tensor>(nodes_.size()));
    auto& grads = result.grads_;
    grads[loss.id] = Tensor(out.shape(), {1.0});

    std::vector<Tensor*> input_grads;
    for (NodeId k = loss.id + 1; k-- > 0;) {
        const Node& node = nodes_[k];
        if (grads[k].empty() || !node.requires_grad) continue;
        ++result.visited_;
        if (!node.backward) continue;
        input_grads.assign(node.inputs.size(), nullptr);
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
            const NodeId in = node.inputs[i];
            if (!nodes_[in].requires_grad) continue;
            if (grads[in].empty()) grads[in] = Tensor::zeros(nodes_[in].value.shape());
            input_grads[i] = &grads[in];
        }
        node.backward(*this, k, grads[k], input_grads);
    }
    return result;
}

namespace {

Tape& same_tape(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape) throw ContractError("operands live on different tapes");
    return *a.tape;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                             shape_to_string(b.shape()));
    }
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
    if (t.rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             shape_to_string(t.shape()));
    }
}

void softmax_row(const double* in, double* out, std::size_t n) {
    const double mx = *std::max_element(in, in + n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(in[i] - mx);
        total += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= total;
}

// log1p of the non-max mass keeps full relative precision for confident rows.
void log_softmax_row(const double* in, double* out, std::size_t n) {
    const std::size_t top = static_cast<std::size_t>(std::max_element(in, in + n) - in);
    const double mx = in[top];
    double rest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != top) rest += std::exp(in[i] - mx);
    }
    const double tail = std::log1p(rest);
    for (std::size_t i = 0; i < n; ++i) out[i] = (in[i] - mx) - tail;
}

} // namespace

namespace {

// C[m x n] += A[m x k] * B[k x n], four rows of C per pass over B.
void gemm_acc(const double* A, const double* B, double* C, std::size_t m, std::size_t k, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        double* c0 = C + i * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        for (std::size_t p = 0; p < k; ++p) {
            const double a0 = A[i * k + p], a1 = A[(i + 1) * k + p];
            const double a2 = A[(i + 2) * k + p], a3 = A[(i + 3) * k + p];
            const double* b = B + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                const double bj = b[j];
                c0[j] += a0 * bj;
                c1[j] += a1 * bj;
                c2[j] += a2 * bj;
                c3[j] += a3 * bj;
            }
        }
    }
    for (; i < m; ++i) {
        double* c = C + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double a = A[i * k + p];
            const double* b = B + p * n;
            for (std::size_t j = 0; j < n; ++j) c[j] += a * b[j];
        }
    }
}

// C[k x n] += A^T * G for A[m x k], G[m x n], four rows of A per pass.
void gemm_tn_acc(const double* A, const double* G, double* C, std::size_t m, std::size_t k, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* g0 = G + i * n;
        const double* g1 = g0 + n;
        const double* g2 = g1 + n;
        const double* g3 = g2 + n;
        for (std::size_t p = 0; p < k; ++p) {
            const double a0 = A[i * k + p], a1 = A[(i + 1) * k + p];
            const double a2 = A[(i + 2) * k + p], a3 = A[(i + 3) * k + p];
            double* c = C + p * n;
            for (std::size_t j = 0; j < n; ++j) c[j] += a0 * g0[j] + a1 * g1[j] + a2 * g2[j] + a3 * g3[j];
        }
    }
    for (; i < m; ++i) {
        const double* g = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double a = A[i * k + p];
            double* c = C + p * n;
            for (std::size_t j = 0; j < n; ++j) c[j] += a * g[j];
        }
    }
}

std::vector<double> transpose(const double* B, std::size_t rows, std::size_t cols) {
    std::vector<double> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = B[r * cols + c];
    }
    return out;
}

} // namespace

Var matmul(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    require_rank("matmul", A, 2);
    require_rank("matmul", B, 2);
    const std::size_t m = A.shape()[0], k = A.shape()[1], n = B.shape()[1];
    if (B.shape()[0] != k) {
        throw DimensionError("matmul: inner dimensions differ, " + shape_to_string(A.shape()) + " x " +
                             shape_to_string(B.shape()));
    }
    Tensor C({m, n});
    gemm_acc(A.values().data(), B.values().data(), C.values().data(), m, k, n);
    return tape.push(OpKind::MatMul, {a.id, b.id}, std::move(C),
                     [m, k, n](const Tape& t, NodeId self, const Tensor& g, std::span<Tensor*> grads) {
                         const auto& ins = t.inputs(self);
                         const double* pa = t.value(ins[0]).values().data();
                         const double* pb = t.value(ins[1]).values().data();
                         if (grads[0] != nullptr) {
                             // dA = dC * B^T
                             const auto bt = transpose(pb, k, n);
                             gemm_acc(g.values().data(), bt.data(), grads[0]->values().data(), m, n, k);
                         }
                         if (grads[1] != nullptr) {
                             // dB = A^T * dC
                             gemm_tn_acc(pa, g.values().data(), grads[1]->values().data(), m, k, n);
                         }
                     });
}

Var add(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    require_same_shape("add", a.value(), b.value());
    Tensor out = a.value();
    const auto bv = b.value().values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return tape.push(OpKind::Add, {a.id, b.id}, std::move(out),
                     [](const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
                         for (auto* dst : grads) {
                             if (dst == nullptr) continue;
                             for (std::size_t i = 0; i < g.size(); ++i) (*dst)[i] += g[i];
                         }
                     });
}

Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var mul(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    require_same_shape("mul", a.value(), b.value());
    Tensor out = a.value();
    const auto bv = b.value().values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return tape.push(OpKind::Mul, {a.id, b.id}, std::move(out),
                     [](const Tape& t, NodeId self, const Tensor& g, std::span<Tensor*> grads) {
                         const auto& ins = t.inputs(self);
                         const Tensor& av = t.value(ins[0]);
                         const Tensor& bv = t.value(ins[1]);
                         if (grads[0] != nullptr) {
                             for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i] * bv[i];
                         }
                         if (grads[1] != nullptr) {
                             for (std::size_t i = 0; i < g.size(); ++i) (*grads[1])[i] += g[i] * av[i];
                         }
                     });
}

Var relu(Var x) {
    Tensor out = x.value();
    for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
    return x.tape->push(OpKind::Relu, {x.id}, std::move(out),
                        [](const Tape& t, NodeId self, const Tensor& g, std::span<Tensor*> grads) {
                            // Subgradient at exactly zero is zero.
                            const Tensor& in = t.value(t.inputs(self)[0]);
                            for (std::size_t i = 0; i < g.size(); ++i) {
                                if (in[i] > 0.0) (*grads[0])[i] += g[i];
                            }
                        });
}

Var scale(Var x, double factor) {
    Tensor out = x.value();
    for (auto& v : out.values()) v *= factor;
    return x.tape->push(OpKind::Scale, {x.id}, std::move(out),
                        [factor](const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
                            for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += factor * g[i];
                        });
}

Var add_bias(Var x, Var b) {
    Tape& tape = same_tape(x, b);
    const Tensor& X = x.value();
    const Tensor& B = b.value();
    require_rank("add_bias", X, 2);
    if (B.size() != X.cols()) {
        throw DimensionError("add_bias: bias " + shape_to_string(B.shape()) + " does not match " +
                             shape_to_string(X.shape()));
    }
    Tensor out = X;
    const std::size_t rows = X.rows(), cols = X.cols();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) out.at(r, c) += B[c];
    }
    return tape.push(OpKind::AddBias, {x.id, b.id}, std::move(out),
                     [rows, cols](const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
                         if (grads[0] != nullptr) {
                             for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
                         }
                         if (grads[1] != nullptr) {
                             for (std::size_t r = 0; r < rows; ++r) {
                                 for (std::size_t c = 0; c < cols; ++c) (*grads[1])[c] += g[r * cols + c];
                             }
                         }
                     });
}

Var embed_mean_pool(Var table, std::span<const std::int32_t> ids, std::size_t seq_len, std::int32_t pad_id) {
    const Tensor& T = table.value();
    require_rank("embed_mean_pool", T, 2);
    if (seq_len == 0 || ids.empty() || ids.size() % seq_len != 0) {
        throw DimensionError("embed_mean_pool: " + std::to_string(ids.size()) +
                             " ids do not split into sequences of length " + std::to_string(seq_len));
    }
    const std::size_t vocab = T.rows(), dim = T.cols(), rows = ids.size() / seq_len;
    std::vector<std::int32_t> kept(ids.begin(), ids.end());
    std::vector<double> inv_count(rows, 0.0);
    Tensor out({rows, dim});
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t count = 0;
        double* orow = &out.at(r, 0);
        for (std::size_t p = 0; p < seq_len; ++p) {
            const auto id = kept[r * seq_len + p];
            if (id == pad_id) continue;
            if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
                throw DimensionError("embed_mean_pool: token id " + std::to_string(id) + " outside table " +
                                     shape_to_string(T.shape()));
            }
            const double* erow = T.values().data() + static_cast<std::size_t>(id) * dim;
            for (std::size_t c = 0; c < dim; ++c) orow[c] += erow[c];
            ++count;
        }
        if (count == 0) throw ContractError("embed_mean_pool: sequence " + std::to_string(r) + " is all padding");
        inv_count[r] = 1.0 / static_cast<double>(count);
        for (std::size_t c = 0; c < dim; ++c) orow[c] *= inv_count[r];
    }
    return table.tape->push(
        OpKind::EmbedMeanPool, {table.id}, std::move(out),
        [kept = std::move(kept), inv_count = std::move(inv_count), seq_len, dim, pad_id](
            const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
            Tensor& dt = *grads[0];
            for (std::size_t r = 0; r < inv_count.size(); ++r) {
                const double* grow = g.values().data() + r * dim;
                for (std::size_t p = 0; p < seq_len; ++p) {
                    const auto id = kept[r * seq_len + p];
                    if (id == pad_id) continue;
                    double* drow = dt.values().data() + static_cast<std::size_t>(id) * dim;
                    for (std::size_t c = 0; c < dim; ++c) drow[c] += grow[c] * inv_count[r];
                }
            }
        });
}

Var softmax(Var x) {
    const Tensor& X = x.value();
    const std::size_t n = X.cols(), rows = X.size() / n;
    Tensor out(X.shape());
    for (std::size_t r = 0; r < rows; ++r) softmax_row(X.values().data() + r * n, out.values().data() + r * n, n);
    return x.tape->push(OpKind::Softmax, {x.id}, std::move(out),
                        [n, rows](const Tape& t, NodeId self, const Tensor& g, std::span<Tensor*> grads) {
                            const Tensor& y = t.value(self);
                            for (std::size_t r = 0; r < rows; ++r) {
                                double dot = 0.0;
                                for (std::size_t i = 0; i < n; ++i) dot += g[r * n + i] * y[r * n + i];
                                for (std::size_t i = 0; i < n; ++i) {
                                    (*grads[0])[r * n + i] += y[r * n + i] * (g[r * n + i] - dot);
                                }
                            }
                        });
}

Var log_softmax(Var x) {
    const Tensor& X = x.value();
    const std::size_t n = X.cols(), rows = X.size() / n;
    Tensor out(X.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        log_softmax_row(X.values().data() + r * n, out.values().data() + r * n, n);
    }
    return x.tape->push(OpKind::LogSoftmax, {x.id}, std::move(out),
                        [n, rows](const Tape& t, NodeId self, const Tensor& g, std::span<Tensor*> grads) {
                            const Tensor& y = t.value(self);
                            for (std::size_t r = 0; r < rows; ++r) {
                                double total = 0.0;
                                for (std::size_t i = 0; i < n; ++i) total += g[r * n + i];
                                for (std::size_t i = 0; i < n; ++i) {
                                    (*grads[0])[r * n + i] += g[r * n + i] - std::exp(y[r * n + i]) * total;
                                }
                            }
                        });
}

Var sum(Var x) {
    double total = 0.0;
    for (double v : x.value().values()) total += v;
    return x.tape->push(OpKind::Sum, {x.id}, Tensor::scalar(total),
                        [](const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
                            for (auto& v : grads[0]->values()) v += g[0];
                        });
}

Var mean(Var x) {
    const double inv = 1.0 / static_cast<double>(x.value().size());
    double total = 0.0;
    for (double v : x.value().values()) total += v;
    return x.tape->push(OpKind::Mean, {x.id}, Tensor::scalar(total * inv),
                        [inv](const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
                            for (auto& v : grads[0]->values()) v += g[0] * inv;
                        });
}

Var pick(Var x, std::span<const std::size_t> index) {
    const Tensor& X = x.value();
    const std::size_t n = X.cols(), rows = X.size() / n;
    if (index.size() != rows) {
        throw DimensionError("pick: " + std::to_string(index.size()) + " indices for " + shape_to_string(X.shape()));
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    Tensor out({rows});
    for (std::size_t r = 0; r < rows; ++r) {
        if (idx[r] >= n) throw DimensionError("pick: index " + std::to_string(idx[r]) + " out of range");
        out[r] = X[r * n + idx[r]];
    }
    return x.tape->push(OpKind::Pick, {x.id}, std::move(out),
                        [idx = std::move(idx), n](const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
                            for (std::size_t r = 0; r < idx.size(); ++r) (*grads[0])[r * n + idx[r]] += g[r];
                        });
}

Var reshape(Var x, Shape shape) {
    if (shape_size(shape) != x.value().size()) {
        throw DimensionError("reshape: " + shape_to_string(x.shape()) + " cannot become " + shape_to_string(shape));
    }
    Tensor out(std::move(shape), x.value().data());
    return x.tape->push(OpKind::Reshape, {x.id}, std::move(out),
                        [](const Tape&, NodeId, const Tensor& g, std::span<Tensor*> grads) {
                            for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
                        });
}

std::vector<double> softmax_values(std::span<const double> logits) {
    if (logits.empty()) throw DimensionError("softmax of an empty vector");
    std::vector<double> out(logits.size());
    softmax_row(logits.data(), out.data(), logits.size());
    return out;
}

std::vector<double> log_softmax_values(std::span<const double> logits) {
    if (logits.empty()) throw DimensionError("log_softmax of an empty vector");
    std::vector<double> out(logits.size());
    log_softmax_row(logits.data(), out.data(), logits.size());
    return out;
}

} // namespace dlab::ad
