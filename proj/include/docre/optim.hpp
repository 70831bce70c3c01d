#pragma once

#include <vector>

#include "docre/tensor.hpp"

namespace docre {

struct AdamWConfig {
    double lr = 1e-3;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// AdamW with decoupled weight decay: the decay is applied to the value
// directly and never enters the moment estimates.
class AdamW {
  public:
    AdamW(ParamStore& params, AdamWConfig cfg);

    // Applies one update from the gradients currently in the store.
    void step();
    std::int64_t steps_taken() const { return t_; }

  private:
    ParamStore& params_;
    AdamWConfig cfg_;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

double global_grad_norm(ParamStore& params);
// Rescales all gradients when their global L2 norm exceeds max_norm.
void clip_grad_norm(ParamStore& params, double max_norm);

}  // namespace docre
