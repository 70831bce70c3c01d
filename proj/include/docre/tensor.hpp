#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "docre/errors.hpp"
#include "docre/rng.hpp"

namespace docre {

// Dense row-major matrix of doubles. Vectors are 1 x n, scalars 1 x 1.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Tensor(std::size_t r, std::size_t c, std::vector<double> d)
        : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != rows * cols)
            throw ShapeError("tensor: data length " + std::to_string(data.size()) +
                             " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }

    static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }
    static Tensor full(std::size_t r, std::size_t c, double v) {
        Tensor t(r, c);
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }
    static Tensor identity(std::size_t n) {
        Tensor t(n, n);
        for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
        return t;
    }
    static Tensor row_vector(std::vector<double> v) {
        const std::size_t n = v.size();
        return Tensor(1, n, std::move(v));
    }

    std::size_t size() const { return rows * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool all_finite() const;
};

// Named value + gradient slot. Gradients are zeroed at the start of every
// optimization step.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
        grad = Tensor(value.rows, value.cols);
    }
    void zero_grad() { grad.fill(0.0); }
};

// Ordered registry of parameters; creation order is the deterministic
// iteration order used by init, optimizer and checkpointing.
class ParamStore {
  public:
    Parameter& create(const std::string& name, std::size_t rows, std::size_t cols);
    // Glorot-uniform init.
    Parameter& create_glorot(const std::string& name, std::size_t rows, std::size_t cols,
                             Rng& rng);
    // N(0, stddev) init, for embedding tables.
    Parameter& create_normal(const std::string& name, std::size_t rows, std::size_t cols,
                             Rng& rng, double stddev);

    Parameter* find(const std::string& name);
    Parameter& at(const std::string& name);

    std::vector<Parameter*> all();
    std::size_t size() const { return params_.size(); }
    std::size_t total_elements() const;
    void zero_grads();

  private:
    std::vector<std::unique_ptr<Parameter>> params_;
};

// Binary checkpoint: config text plus every parameter tensor, bit-exact
// round trip.
void save_checkpoint(const std::string& path, const std::string& config_text,
                     ParamStore& params);
struct Checkpoint {
    std::string config_text;
    std::vector<std::pair<std::string, Tensor>> tensors;
};
Checkpoint load_checkpoint(const std::string& path);
// Copies checkpoint tensors into an already-constructed store; name or
// shape mismatch -> error.
void restore_params(const Checkpoint& ckpt, ParamStore& params);

}  // namespace docre
