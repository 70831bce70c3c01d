#include "docre/doccontext.hpp"

#include <cmath>

namespace docre {

AttnParams create_attn_params(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
    AttnParams p;
    p.w_k = &store.create_glorot("attn.w_k", static_cast<std::size_t>(cfg.d_enc()),
                                 static_cast<std::size_t>(cfg.d_model_eff()), rng);
    p.w_v = &store.create_glorot("attn.w_v", static_cast<std::size_t>(cfg.d_enc()),
                                 static_cast<std::size_t>(cfg.d2_eff()), rng);
    return p;
}

DocAttention::DocAttention(Tape& tape, Var d_all, Var w_k, Var w_v, const ModelConfig& cfg)
    : tape_(tape) {
    if (tape.value(d_all).rows == 0)
        throw ValidationError("doc attention: empty document");
    keys_ = tape_.matmul(d_all, w_k);
    values_ = tape_.matmul(d_all, w_v);
    inv_sqrt_dm_ = 1.0 / std::sqrt(static_cast<double>(cfg.d_model_eff()));
}

Var DocAttention::logits(Var queries) const {
    return tape_.scale(tape_.matmul_bt(queries, keys_), inv_sqrt_dm_);
}

Var DocAttention::weights(Var queries) const {
    return tape_.softmax_axis(logits(queries), 1);
}

Var DocAttention::contexts(Var queries) const {
    return tape_.matmul(weights(queries), values_);
}

}  // namespace docre
