#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "docre/tensor.hpp"

namespace docre {

// Handle into a Tape's node list.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Nodes are created in topological order; backward()
// visits them in reverse exactly once, accumulating gradients into every
// parameter leaf that contributed to the loss. A tape is confined to one
// thread.
class Tape {
  public:
    // Leaves.
    Var constant(Tensor value);
    Var param(Parameter& p);

    // Linear algebra.
    Var matmul(Var a, Var b);
    Var matmul_bt(Var a, Var b);  // a * b^T
    Var add(Var a, Var b);        // same shape
    Var add_row(Var a, Var b);    // a: m x n, b: 1 x n broadcast over rows
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var scale(Var a, double s);

    // Structure.
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    Var slice_rows(Var a, std::size_t r0, std::size_t r1);
    Var slice_cols(Var a, std::size_t c0, std::size_t c1);
    Var row(Var a, std::size_t r) { return slice_rows(a, r, r + 1); }

    // Reductions. axis 0 reduces over rows (per column), axis 1 over
    // columns (per row).
    Var mean_axis(Var a, int axis);
    Var sum_all(Var a);
    Var max_axis(Var a, int axis);  // ties -> first index
    // Argmax indices recorded by the most recent max_axis node.
    const std::vector<std::size_t>& argmax_of(Var max_node) const;

    // Elementwise nonlinearities.
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var relu(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var softmax_axis(Var a, int axis);

    // Inverted dropout: scales kept entries by 1/(1-rate) at train time;
    // simply do not insert the node at eval time.
    Var dropout(Var a, double rate, Rng& rng);

    // Gathers table rows by id; gradients scatter back into the table.
    Var embedding(Parameter& table, const std::vector<int>& ids);

    // Mean binary cross-entropy over all cells, probabilities clamped
    // 1e-7 away from {0,1}. targets is a 0/1 tensor of the same shape.
    Var bce_mean(Var probs, const Tensor& targets);

    const Tensor& value(Var v) const;
    double scalar(Var v) const;
    // Gradient of the last backward() w.r.t. node v (zeros if untouched).
    Tensor grad_of(Var v) const;

    // Seeds d(loss)/d(loss)=1 and accumulates into Parameter::grad.
    void backward(Var loss);

    std::size_t n_nodes() const { return nodes_.size(); }

  private:
    enum class Op {
        Constant, ParamLeaf, MatMul, MatMulBT, Add, AddRow, Sub, Mul, Scale,
        ConcatRows, ConcatCols, SliceRows, SliceCols, MeanAxis, SumAll, MaxAxis,
        Sigmoid, Tanh, Relu, Exp, Log, SoftmaxAxis, Dropout, Embedding, BceMean,
    };

    struct Node {
        Op op;
        int a = -1, b = -1;
        std::vector<int> many;
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        bool grad_alloc = false;
        // op-specific payload
        int axis = 0;
        std::size_t i0 = 0, i1 = 0;
        double factor = 0.0;
        std::vector<std::size_t> indices;  // argmax / embedding ids
        Tensor aux;                        // dropout mask / bce targets
        Parameter* param = nullptr;
    };

    int push(Node&& n);
    Node& node(Var v);
    const Node& node(Var v) const;
    void ensure_grad(Node& n);
    void check_axis(int axis, const char* op) const;

    std::vector<Node> nodes_;
};

// Compares analytic gradients against central finite differences
// (f(x+eps) - f(x-eps)) / (2 eps) for every element of every parameter.
// `f(with_grad)` must rebuild the computation and return the scalar loss,
// running backward into the store's gradients when asked; it must be
// deterministic (dropout off).
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::map<std::string, double> per_param;
    std::size_t n_checked = 0;
};
GradCheckResult grad_check(const std::function<double(bool with_grad)>& f, ParamStore& params,
                           double eps);

}  // namespace docre
