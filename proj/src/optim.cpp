#include "docre/optim.hpp"

#include <cmath>

namespace docre {

AdamW::AdamW(ParamStore& params, AdamWConfig cfg) : params_(params), cfg_(cfg) {
    if (cfg_.lr <= 0.0) throw NumericError("adamw: lr must be > 0");
    if (cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 || cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0)
        throw NumericError("adamw: betas must be in [0,1)");
    for (Parameter* p : params_.all()) {
        m_.emplace_back(p->value.rows, p->value.cols);
        v_.emplace_back(p->value.rows, p->value.cols);
    }
}

void AdamW::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const auto ps = params_.all();
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        Parameter* p = ps[pi];
        Tensor& m = m_[pi];
        Tensor& v = v_[pi];
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad.data[i];
            m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * g;
            v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p->value.data[i] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) +
                                           cfg_.weight_decay * p->value.data[i]);
        }
    }
}

double global_grad_norm(ParamStore& params) {
    double sq = 0.0;
    for (Parameter* p : params.all())
        for (double g : p->grad.data) sq += g * g;
    return std::sqrt(sq);
}

void clip_grad_norm(ParamStore& params, double max_norm) {
    const double norm = global_grad_norm(params);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (Parameter* p : params.all())
        for (double& g : p->grad.data) g *= scale;
}

}  // namespace docre
