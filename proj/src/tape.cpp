#include "docre/tape.hpp"

#include <algorithm>
#include <cmath>

namespace docre {

namespace {
constexpr double kBceClamp = 1e-7;

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
}  // namespace

int Tape::push(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Tape::Node& Tape::node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
const Tape::Node& Tape::node(Var v) const { return nodes_[static_cast<std::size_t>(v.id)]; }

void Tape::ensure_grad(Node& n) {
    if (!n.grad_alloc) {
        n.grad = Tensor(n.value.rows, n.value.cols);
        n.grad_alloc = true;
    }
}

void Tape::check_axis(int axis, const char* op) const {
    if (axis != 0 && axis != 1)
        throw ShapeError(std::string(op) + ": axis must be 0 or 1, got " + std::to_string(axis));
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
    const Tensor& t = node(v).value;
    if (t.size() != 1) throw ShapeError("scalar: node has shape " + t.shape_str());
    return t.data[0];
}

Tensor Tape::grad_of(Var v) const {
    const Node& n = node(v);
    if (n.grad_alloc) return n.grad;
    return Tensor(n.value.rows, n.value.cols);
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(value);
    return {push(std::move(n))};
}

Var Tape::param(Parameter& p) {
    Node n;
    n.op = Op::ParamLeaf;
    n.value = p.value;
    n.param = &p;
    n.requires_grad = true;
    return {push(std::move(n))};
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (A.cols != B.rows)
        throw ShapeError("matmul: " + A.shape_str() + " x " + B.shape_str());
    Node n;
    n.op = Op::MatMul;
    n.a = a.id;
    n.b = b.id;
    n.requires_grad = node(a).requires_grad || node(b).requires_grad;
    Tensor C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            const double* brow = &B.data[k * B.cols];
            double* crow = &C.data[i * C.cols];
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    n.value = std::move(C);
    return {push(std::move(n))};
}

Var Tape::matmul_bt(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (A.cols != B.cols)
        throw ShapeError("matmul_bt: " + A.shape_str() + " x " + B.shape_str() + "^T");
    Node n;
    n.op = Op::MatMulBT;
    n.a = a.id;
    n.b = b.id;
    n.requires_grad = node(a).requires_grad || node(b).requires_grad;
    Tensor C(A.rows, B.rows);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < B.rows; ++j) {
            double s = 0.0;
            const double* arow = &A.data[i * A.cols];
            const double* brow = &B.data[j * B.cols];
            for (std::size_t k = 0; k < A.cols; ++k) s += arow[k] * brow[k];
            C.at(i, j) = s;
        }
    n.value = std::move(C);
    return {push(std::move(n))};
}

Var Tape::add(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (!A.same_shape(B)) throw ShapeError("add: " + A.shape_str() + " vs " + B.shape_str());
    Node n;
    n.op = Op::Add;
    n.a = a.id;
    n.b = b.id;
    n.requires_grad = node(a).requires_grad || node(b).requires_grad;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value.data[i] += B.data[i];
    return {push(std::move(n))};
}

Var Tape::add_row(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (B.rows != 1 || B.cols != A.cols)
        throw ShapeError("add_row: " + A.shape_str() + " vs " + B.shape_str());
    Node n;
    n.op = Op::AddRow;
    n.a = a.id;
    n.b = b.id;
    n.requires_grad = node(a).requires_grad || node(b).requires_grad;
    n.value = A;
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) n.value.at(i, j) += B.at(0, j);
    return {push(std::move(n))};
}

Var Tape::sub(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (!A.same_shape(B)) throw ShapeError("sub: " + A.shape_str() + " vs " + B.shape_str());
    Node n;
    n.op = Op::Sub;
    n.a = a.id;
    n.b = b.id;
    n.requires_grad = node(a).requires_grad || node(b).requires_grad;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value.data[i] -= B.data[i];
    return {push(std::move(n))};
}

Var Tape::mul(Var a, Var b) {
    const Tensor& A = node(a).value;
    const Tensor& B = node(b).value;
    if (!A.same_shape(B)) throw ShapeError("mul: " + A.shape_str() + " vs " + B.shape_str());
    Node n;
    n.op = Op::Mul;
    n.a = a.id;
    n.b = b.id;
    n.requires_grad = node(a).requires_grad || node(b).requires_grad;
    n.value = A;
    for (std::size_t i = 0; i < B.size(); ++i) n.value.data[i] *= B.data[i];
    return {push(std::move(n))};
}

Var Tape::scale(Var a, double s) {
    Node n;
    n.op = Op::Scale;
    n.a = a.id;
    n.factor = s;
    n.requires_grad = node(a).requires_grad;
    n.value = node(a).value;
    for (auto& v : n.value.data) v *= s;
    return {push(std::move(n))};
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no parts");
    const std::size_t cols = node(parts[0]).value.cols;
    std::size_t rows = 0;
    Node n;
    n.op = Op::ConcatRows;
    for (Var p : parts) {
        const Tensor& t = node(p).value;
        if (t.cols != cols)
            throw ShapeError("concat_rows: column mismatch " + t.shape_str() + " vs cols=" +
                             std::to_string(cols));
        rows += t.rows;
        n.many.push_back(p.id);
        n.requires_grad = n.requires_grad || node(p).requires_grad;
    }
    Tensor out(rows, cols);
    std::size_t r = 0;
    for (Var p : parts) {
        const Tensor& t = node(p).value;
        std::copy(t.data.begin(), t.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
        r += t.rows;
    }
    n.value = std::move(out);
    return {push(std::move(n))};
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no parts");
    const std::size_t rows = node(parts[0]).value.rows;
    std::size_t cols = 0;
    Node n;
    n.op = Op::ConcatCols;
    for (Var p : parts) {
        const Tensor& t = node(p).value;
        if (t.rows != rows)
            throw ShapeError("concat_cols: row mismatch " + t.shape_str() + " vs rows=" +
                             std::to_string(rows));
        cols += t.cols;
        n.many.push_back(p.id);
        n.requires_grad = n.requires_grad || node(p).requires_grad;
    }
    Tensor out(rows, cols);
    std::size_t c = 0;
    for (Var p : parts) {
        const Tensor& t = node(p).value;
        for (std::size_t i = 0; i < rows; ++i)
            std::copy(t.data.begin() + static_cast<std::ptrdiff_t>(i * t.cols),
                      t.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * t.cols),
                      out.data.begin() + static_cast<std::ptrdiff_t>(i * cols + c));
        c += t.cols;
    }
    n.value = std::move(out);
    return {push(std::move(n))};
}

Var Tape::slice_rows(Var a, std::size_t r0, std::size_t r1) {
    const Tensor& A = node(a).value;
    if (r0 >= r1 || r1 > A.rows)
        throw ShapeError("slice_rows: [" + std::to_string(r0) + "," + std::to_string(r1) +
                         ") of " + A.shape_str());
    Node n;
    n.op = Op::SliceRows;
    n.a = a.id;
    n.i0 = r0;
    n.i1 = r1;
    n.requires_grad = node(a).requires_grad;
    Tensor out(r1 - r0, A.cols);
    std::copy(A.data.begin() + static_cast<std::ptrdiff_t>(r0 * A.cols),
              A.data.begin() + static_cast<std::ptrdiff_t>(r1 * A.cols), out.data.begin());
    n.value = std::move(out);
    return {push(std::move(n))};
}

Var Tape::slice_cols(Var a, std::size_t c0, std::size_t c1) {
    const Tensor& A = node(a).value;
    if (c0 >= c1 || c1 > A.cols)
        throw ShapeError("slice_cols: [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") of " + A.shape_str());
    Node n;
    n.op = Op::SliceCols;
    n.a = a.id;
    n.i0 = c0;
    n.i1 = c1;
    n.requires_grad = node(a).requires_grad;
    Tensor out(A.rows, c1 - c0);
    for (std::size_t i = 0; i < A.rows; ++i)
        std::copy(A.data.begin() + static_cast<std::ptrdiff_t>(i * A.cols + c0),
                  A.data.begin() + static_cast<std::ptrdiff_t>(i * A.cols + c1),
                  out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols));
    n.value = std::move(out);
    return {push(std::move(n))};
}

Var Tape::mean_axis(Var a, int axis) {
    check_axis(axis, "mean_axis");
    const Tensor& A = node(a).value;
    Node n;
    n.op = Op::MeanAxis;
    n.a = a.id;
    n.axis = axis;
    n.requires_grad = node(a).requires_grad;
    if (axis == 0) {
        Tensor out(1, A.cols);
        for (std::size_t i = 0; i < A.rows; ++i)
            for (std::size_t j = 0; j < A.cols; ++j) out.at(0, j) += A.at(i, j);
        for (auto& v : out.data) v /= static_cast<double>(A.rows);
        n.value = std::move(out);
    } else {
        Tensor out(A.rows, 1);
        for (std::size_t i = 0; i < A.rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < A.cols; ++j) s += A.at(i, j);
            out.at(i, 0) = s / static_cast<double>(A.cols);
        }
        n.value = std::move(out);
    }
    return {push(std::move(n))};
}

Var Tape::sum_all(Var a) {
    const Tensor& A = node(a).value;
    Node n;
    n.op = Op::SumAll;
    n.a = a.id;
    n.requires_grad = node(a).requires_grad;
    double s = 0.0;
    for (double v : A.data) s += v;
    n.value = Tensor(1, 1, {s});
    return {push(std::move(n))};
}

Var Tape::max_axis(Var a, int axis) {
    check_axis(axis, "max_axis");
    const Tensor& A = node(a).value;
    Node n;
    n.op = Op::MaxAxis;
    n.a = a.id;
    n.axis = axis;
    n.requires_grad = node(a).requires_grad;
    if (axis == 0) {
        Tensor out(1, A.cols);
        n.indices.assign(A.cols, 0);
        for (std::size_t j = 0; j < A.cols; ++j) {
            double best = A.at(0, j);
            std::size_t arg = 0;
            for (std::size_t i = 1; i < A.rows; ++i) {
                if (A.at(i, j) > best) {  // strict: ties keep the first index
                    best = A.at(i, j);
                    arg = i;
                }
            }
            out.at(0, j) = best;
            n.indices[j] = arg;
        }
        n.value = std::move(out);
    } else {
        Tensor out(A.rows, 1);
        n.indices.assign(A.rows, 0);
        for (std::size_t i = 0; i < A.rows; ++i) {
            double best = A.at(i, 0);
            std::size_t arg = 0;
            for (std::size_t j = 1; j < A.cols; ++j) {
                if (A.at(i, j) > best) {
                    best = A.at(i, j);
                    arg = j;
                }
            }
            out.at(i, 0) = best;
            n.indices[i] = arg;
        }
        n.value = std::move(out);
    }
    return {push(std::move(n))};
}

const std::vector<std::size_t>& Tape::argmax_of(Var max_node) const {
    const Node& n = node(max_node);
    if (n.op != Op::MaxAxis) throw ShapeError("argmax_of: node is not a max_axis node");
    return n.indices;
}

Var Tape::sigmoid(Var a) {
    Node n;
    n.op = Op::Sigmoid;
    n.a = a.id;
    n.requires_grad = node(a).requires_grad;
    n.value = node(a).value;
    for (auto& v : n.value.data) v = stable_sigmoid(v);
    return {push(std::move(n))};
}

Var Tape::tanh(Var a) {
    Node n;
    n.op = Op::Tanh;
    n.a = a.id;
    n.requires_grad = node(a).requires_grad;
    n.value = node(a).value;
    for (auto& v : n.value.data) v = std::tanh(v);
    return {push(std::move(n))};
}

Var Tape::relu(Var a) {
    Node n;
    n.op = Op::Relu;
    n.a = a.id;
    n.requires_grad = node(a).requires_grad;
    n.value = node(a).value;
    for (auto& v : n.value.data) v = v > 0.0 ? v : 0.0;
    return {push(std::move(n))};
}

Var Tape::exp(Var a) {
    Node n;
    n.op = Op::Exp;
    n.a = a.id;
    n.requires_grad = node(a).requires_grad;
    n.value = node(a).value;
    for (auto& v : n.value.data) v = std::exp(v);
    return {push(std::move(n))};
}

Var Tape::log(Var a) {
    Node n;
    n.op = Op::Log;
    n.a = a.id;
    n.requires_grad = node(a).requires_grad;
    n.value = node(a).value;
    for (auto& v : n.value.data) v = std::log(v);
    return {push(std::move(n))};
}

Var Tape::softmax_axis(Var a, int axis) {
    check_axis(axis, "softmax_axis");
    const Tensor& A = node(a).value;
    Node n;
    n.op = Op::SoftmaxAxis;
    n.a = a.id;
    n.axis = axis;
    n.requires_grad = node(a).requires_grad;
    Tensor out = A;
    if (axis == 1) {
        for (std::size_t i = 0; i < A.rows; ++i) {
            double mx = A.at(i, 0);
            for (std::size_t j = 1; j < A.cols; ++j) mx = std::max(mx, A.at(i, j));
            double z = 0.0;
            for (std::size_t j = 0; j < A.cols; ++j) {
                out.at(i, j) = std::exp(A.at(i, j) - mx);
                z += out.at(i, j);
            }
            for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) /= z;
        }
    } else {
        for (std::size_t j = 0; j < A.cols; ++j) {
            double mx = A.at(0, j);
            for (std::size_t i = 1; i < A.rows; ++i) mx = std::max(mx, A.at(i, j));
            double z = 0.0;
            for (std::size_t i = 0; i < A.rows; ++i) {
                out.at(i, j) = std::exp(A.at(i, j) - mx);
                z += out.at(i, j);
            }
            for (std::size_t i = 0; i < A.rows; ++i) out.at(i, j) /= z;
        }
    }
    n.value = std::move(out);
    return {push(std::move(n))};
}

Var Tape::dropout(Var a, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw NumericError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    const Tensor& A = node(a).value;
    Node n;
    n.op = Op::Dropout;
    n.a = a.id;
    n.requires_grad = node(a).requires_grad;
    n.aux = Tensor(A.rows, A.cols);
    const double keep = 1.0 - rate;
    for (auto& m : n.aux.data) m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
    n.value = A;
    for (std::size_t i = 0; i < A.size(); ++i) n.value.data[i] *= n.aux.data[i];
    return {push(std::move(n))};
}

Var Tape::embedding(Parameter& table, const std::vector<int>& ids) {
    // Gathers rows without materializing the table on the tape; backward
    // scatters straight into the parameter's gradient.
    Node n;
    n.op = Op::Embedding;
    n.param = &table;
    n.requires_grad = true;
    n.indices.reserve(ids.size());
    Tensor out(ids.size(), table.value.cols);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int id = ids[i];
        if (id < 0 || static_cast<std::size_t>(id) >= table.value.rows)
            throw ShapeError("embedding: id " + std::to_string(id) + " out of range for table " +
                             table.value.shape_str());
        n.indices.push_back(static_cast<std::size_t>(id));
        std::copy(table.value.data.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(id) * table.value.cols),
                  table.value.data.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(id) + 1) * table.value.cols),
                  out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols));
    }
    n.value = std::move(out);
    return {push(std::move(n))};
}

Var Tape::bce_mean(Var probs, const Tensor& targets) {
    const Tensor& P = node(probs).value;
    if (!P.same_shape(targets))
        throw ShapeError("bce_mean: probs " + P.shape_str() + " vs targets " +
                         targets.shape_str());
    Node n;
    n.op = Op::BceMean;
    n.a = probs.id;
    n.requires_grad = node(probs).requires_grad;
    n.aux = targets;
    double loss = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        const double p = std::clamp(P.data[i], kBceClamp, 1.0 - kBceClamp);
        const double y = targets.data[i];
        loss += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
    n.value = Tensor(1, 1, {loss / static_cast<double>(P.size())});
    return {push(std::move(n))};
}

void Tape::backward(Var loss) {
    Node& top = node(loss);
    if (top.value.size() != 1)
        throw ShapeError("backward: loss must be scalar, got " + top.value.shape_str());
    if (!top.requires_grad) return;  // loss does not depend on any parameter
    ensure_grad(top);
    top.grad.data[0] = 1.0;

    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.grad_alloc || !n.requires_grad) continue;

        auto parent_grad = [&](int pid) -> Tensor* {
            Node& p = nodes_[static_cast<std::size_t>(pid)];
            if (!p.requires_grad) return nullptr;
            ensure_grad(p);
            return &p.grad;
        };

        switch (n.op) {
            case Op::Constant:
                break;
            case Op::ParamLeaf:
                for (std::size_t i = 0; i < n.grad.size(); ++i)
                    n.param->grad.data[i] += n.grad.data[i];
                break;
            case Op::MatMul: {
                const Tensor& A = nodes_[static_cast<std::size_t>(n.a)].value;
                const Tensor& B = nodes_[static_cast<std::size_t>(n.b)].value;
                if (Tensor* dA = parent_grad(n.a)) {
                    // dA += dC * B^T
                    for (std::size_t i = 0; i < A.rows; ++i)
                        for (std::size_t k = 0; k < A.cols; ++k) {
                            double s = 0.0;
                            for (std::size_t j = 0; j < B.cols; ++j)
                                s += n.grad.at(i, j) * B.at(k, j);
                            dA->at(i, k) += s;
                        }
                }
                if (Tensor* dB = parent_grad(n.b)) {
                    // dB += A^T * dC
                    for (std::size_t k = 0; k < A.cols; ++k)
                        for (std::size_t i = 0; i < A.rows; ++i) {
                            const double aik = A.at(i, k);
                            if (aik == 0.0) continue;
                            for (std::size_t j = 0; j < B.cols; ++j)
                                dB->at(k, j) += aik * n.grad.at(i, j);
                        }
                }
                break;
            }
            case Op::MatMulBT: {
                const Tensor& A = nodes_[static_cast<std::size_t>(n.a)].value;
                const Tensor& B = nodes_[static_cast<std::size_t>(n.b)].value;
                if (Tensor* dA = parent_grad(n.a)) {
                    // C = A B^T, dA += dC * B
                    for (std::size_t i = 0; i < A.rows; ++i)
                        for (std::size_t j = 0; j < B.rows; ++j) {
                            const double g = n.grad.at(i, j);
                            if (g == 0.0) continue;
                            for (std::size_t k = 0; k < A.cols; ++k)
                                dA->at(i, k) += g * B.at(j, k);
                        }
                }
                if (Tensor* dB = parent_grad(n.b)) {
                    // dB += dC^T * A
                    for (std::size_t j = 0; j < B.rows; ++j)
                        for (std::size_t i = 0; i < A.rows; ++i) {
                            const double g = n.grad.at(i, j);
                            if (g == 0.0) continue;
                            for (std::size_t k = 0; k < A.cols; ++k)
                                dB->at(j, k) += g * A.at(i, k);
                        }
                }
                break;
            }
            case Op::Add: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i) dA->data[i] += n.grad.data[i];
                if (Tensor* dB = parent_grad(n.b))
                    for (std::size_t i = 0; i < n.grad.size(); ++i) dB->data[i] += n.grad.data[i];
                break;
            }
            case Op::AddRow: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i) dA->data[i] += n.grad.data[i];
                if (Tensor* dB = parent_grad(n.b))
                    for (std::size_t i = 0; i < n.grad.rows; ++i)
                        for (std::size_t j = 0; j < n.grad.cols; ++j)
                            dB->at(0, j) += n.grad.at(i, j);
                break;
            }
            case Op::Sub: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i) dA->data[i] += n.grad.data[i];
                if (Tensor* dB = parent_grad(n.b))
                    for (std::size_t i = 0; i < n.grad.size(); ++i) dB->data[i] -= n.grad.data[i];
                break;
            }
            case Op::Mul: {
                const Tensor& A = nodes_[static_cast<std::size_t>(n.a)].value;
                const Tensor& B = nodes_[static_cast<std::size_t>(n.b)].value;
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i)
                        dA->data[i] += n.grad.data[i] * B.data[i];
                if (Tensor* dB = parent_grad(n.b))
                    for (std::size_t i = 0; i < n.grad.size(); ++i)
                        dB->data[i] += n.grad.data[i] * A.data[i];
                break;
            }
            case Op::Scale: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i)
                        dA->data[i] += n.grad.data[i] * n.factor;
                break;
            }
            case Op::ConcatRows: {
                std::size_t r = 0;
                for (int pid : n.many) {
                    Node& p = nodes_[static_cast<std::size_t>(pid)];
                    if (Tensor* dP = parent_grad(pid)) {
                        for (std::size_t i = 0; i < p.value.rows; ++i)
                            for (std::size_t j = 0; j < p.value.cols; ++j)
                                dP->at(i, j) += n.grad.at(r + i, j);
                    }
                    r += p.value.rows;
                }
                break;
            }
            case Op::ConcatCols: {
                std::size_t c = 0;
                for (int pid : n.many) {
                    Node& p = nodes_[static_cast<std::size_t>(pid)];
                    if (Tensor* dP = parent_grad(pid)) {
                        for (std::size_t i = 0; i < p.value.rows; ++i)
                            for (std::size_t j = 0; j < p.value.cols; ++j)
                                dP->at(i, j) += n.grad.at(i, c + j);
                    }
                    c += p.value.cols;
                }
                break;
            }
            case Op::SliceRows: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.rows; ++i)
                        for (std::size_t j = 0; j < n.grad.cols; ++j)
                            dA->at(n.i0 + i, j) += n.grad.at(i, j);
                break;
            }
            case Op::SliceCols: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.rows; ++i)
                        for (std::size_t j = 0; j < n.grad.cols; ++j)
                            dA->at(i, n.i0 + j) += n.grad.at(i, j);
                break;
            }
            case Op::MeanAxis: {
                Tensor* dA = parent_grad(n.a);
                if (!dA) break;
                if (n.axis == 0) {
                    const double inv = 1.0 / static_cast<double>(dA->rows);
                    for (std::size_t i = 0; i < dA->rows; ++i)
                        for (std::size_t j = 0; j < dA->cols; ++j)
                            dA->at(i, j) += n.grad.at(0, j) * inv;
                } else {
                    const double inv = 1.0 / static_cast<double>(dA->cols);
                    for (std::size_t i = 0; i < dA->rows; ++i)
                        for (std::size_t j = 0; j < dA->cols; ++j)
                            dA->at(i, j) += n.grad.at(i, 0) * inv;
                }
                break;
            }
            case Op::SumAll: {
                if (Tensor* dA = parent_grad(n.a))
                    for (auto& v : dA->data) v += n.grad.data[0];
                break;
            }
            case Op::MaxAxis: {
                Tensor* dA = parent_grad(n.a);
                if (!dA) break;
                if (n.axis == 0) {
                    for (std::size_t j = 0; j < n.grad.cols; ++j)
                        dA->at(n.indices[j], j) += n.grad.at(0, j);
                } else {
                    for (std::size_t i = 0; i < n.grad.rows; ++i)
                        dA->at(i, n.indices[i]) += n.grad.at(i, 0);
                }
                break;
            }
            case Op::Sigmoid: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i) {
                        const double y = n.value.data[i];
                        dA->data[i] += n.grad.data[i] * y * (1.0 - y);
                    }
                break;
            }
            case Op::Tanh: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i) {
                        const double y = n.value.data[i];
                        dA->data[i] += n.grad.data[i] * (1.0 - y * y);
                    }
                break;
            }
            case Op::Relu: {
                const Tensor& A = nodes_[static_cast<std::size_t>(n.a)].value;
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i)
                        if (A.data[i] > 0.0) dA->data[i] += n.grad.data[i];
                break;
            }
            case Op::Exp: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i)
                        dA->data[i] += n.grad.data[i] * n.value.data[i];
                break;
            }
            case Op::Log: {
                const Tensor& A = nodes_[static_cast<std::size_t>(n.a)].value;
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i)
                        dA->data[i] += n.grad.data[i] / A.data[i];
                break;
            }
            case Op::SoftmaxAxis: {
                Tensor* dA = parent_grad(n.a);
                if (!dA) break;
                const Tensor& Y = n.value;
                if (n.axis == 1) {
                    for (std::size_t i = 0; i < Y.rows; ++i) {
                        double dot = 0.0;
                        for (std::size_t j = 0; j < Y.cols; ++j)
                            dot += n.grad.at(i, j) * Y.at(i, j);
                        for (std::size_t j = 0; j < Y.cols; ++j)
                            dA->at(i, j) += Y.at(i, j) * (n.grad.at(i, j) - dot);
                    }
                } else {
                    for (std::size_t j = 0; j < Y.cols; ++j) {
                        double dot = 0.0;
                        for (std::size_t i = 0; i < Y.rows; ++i)
                            dot += n.grad.at(i, j) * Y.at(i, j);
                        for (std::size_t i = 0; i < Y.rows; ++i)
                            dA->at(i, j) += Y.at(i, j) * (n.grad.at(i, j) - dot);
                    }
                }
                break;
            }
            case Op::Dropout: {
                if (Tensor* dA = parent_grad(n.a))
                    for (std::size_t i = 0; i < n.grad.size(); ++i)
                        dA->data[i] += n.grad.data[i] * n.aux.data[i];
                break;
            }
            case Op::Embedding: {
                for (std::size_t i = 0; i < n.indices.size(); ++i)
                    for (std::size_t j = 0; j < n.grad.cols; ++j)
                        n.param->grad.at(n.indices[i], j) += n.grad.at(i, j);
                break;
            }
            case Op::BceMean: {
                Tensor* dA = parent_grad(n.a);
                if (!dA) break;
                const Tensor& P = nodes_[static_cast<std::size_t>(n.a)].value;
                const double g = n.grad.data[0] / static_cast<double>(P.size());
                for (std::size_t i = 0; i < P.size(); ++i) {
                    const double raw = P.data[i];
                    if (raw < kBceClamp || raw > 1.0 - kBceClamp) continue;  // clamped: flat
                    const double y = n.aux.data[i];
                    dA->data[i] += g * (raw - y) / (raw * (1.0 - raw));
                }
                break;
            }
        }
    }
}

GradCheckResult grad_check(const std::function<double(bool)>& f, ParamStore& params,
                           double eps) {
    params.zero_grads();
    const double base = f(true);
    if (!std::isfinite(base)) throw NumericError("grad_check: non-finite loss");

    std::vector<Tensor> analytic;
    for (Parameter* p : params.all()) analytic.push_back(p->grad);

    GradCheckResult result;
    const auto ps = params.all();
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        Parameter* p = ps[pi];
        double worst = 0.0;
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value.data[i];
            p->value.data[i] = saved + eps;
            const double fp = f(false);
            p->value.data[i] = saved - eps;
            const double fm = f(false);
            p->value.data[i] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw NumericError("grad_check: non-finite loss at " + p->name);
            const double numeric = (fp - fm) / (2.0 * eps);
            const double exact = analytic[pi].data[i];
            const double rel = std::abs(numeric - exact) /
                               std::max({1.0, std::abs(numeric), std::abs(exact)});
            worst = std::max(worst, rel);
            ++result.n_checked;
        }
        result.per_param[p->name] = worst;
        if (worst > result.max_rel_err) {
            result.max_rel_err = worst;
            result.worst_param = p->name;
        }
    }
    return result;
}

}  // namespace docre
