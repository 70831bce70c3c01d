#pragma once

#include "docre/config.hpp"
#include "docre/tape.hpp"

namespace docre {

struct AttnParams {
    Parameter* w_k = nullptr;  // d_enc x d_model
    Parameter* w_v = nullptr;  // d_enc x d2
};

AttnParams create_attn_params(ParamStore& store, const ModelConfig& cfg, Rng& rng);

// Single-head scaled dot-product attention over all tokens of a document.
// Keys and values are computed once per document and reused for every
// query.
class DocAttention {
  public:
    // d_all: T x d_enc, all sentences' hidden states stacked in order.
    DocAttention(Tape& tape, Var d_all, Var w_k, Var w_v, const ModelConfig& cfg);

    // queries: n x d_enc -> n x d2 context rows (weights softmaxed over
    // the document's tokens per query).
    Var contexts(Var queries) const;
    // Single query convenience (1 x d_enc -> 1 x d2).
    Var context(Var query) const { return contexts(query); }
    // Pre-softmax scores (n x T), exposed for the scale checks.
    Var logits(Var queries) const;
    // Softmaxed attention weights (n x T).
    Var weights(Var queries) const;

  private:
    Tape& tape_;
    Var keys_;
    Var values_;
    double inv_sqrt_dm_;
};

}  // namespace docre
