#pragma once

#include <vector>

#include "docre/config.hpp"
#include "docre/corpus.hpp"
#include "docre/tape.hpp"

namespace docre {

// Per-sentence id triples feeding the three embedding tables. Tokens not
// covered by any mention use the reserved row 0 (none) in the type and
// coreference tables; covered tokens use type id + 1 and the entity's
// per-document ordinal + 1 (clamped to the table).
struct TokenAnnotations {
    std::vector<std::vector<int>> word_ids;
    std::vector<std::vector<int>> type_ids;
    std::vector<std::vector<int>> coref_ids;
    bool coref_clamped = false;
};

TokenAnnotations annotate_tokens(const Document& doc, const Vocab& vocab,
                                 const ModelConfig& cfg);

// Encoder parameters inside a store. Gate layout in the 4h-wide LSTM
// matrices is [input, forget, cell, output]; forget bias starts at 1.
struct EncoderParams {
    Parameter* word_table = nullptr;
    Parameter* type_table = nullptr;
    Parameter* coref_table = nullptr;
    Parameter* fwd_wx = nullptr;
    Parameter* fwd_wh = nullptr;
    Parameter* fwd_b = nullptr;
    Parameter* bwd_wx = nullptr;
    Parameter* bwd_wh = nullptr;
    Parameter* bwd_b = nullptr;
};

EncoderParams create_encoder_params(ParamStore& store, const ModelConfig& cfg,
                                    const Vocab& vocab, Rng& rng);

// Parameter leaves bound once per tape (reused across timesteps).
struct BoundEncoder {
    Var fwd_wx, fwd_wh, fwd_b;
    Var bwd_wx, bwd_wh, bwd_b;
};
BoundEncoder bind_encoder(Tape& tape, const EncoderParams& p);

// Token representation b = [word : type : coref] per sentence
// (J_n x token_dim). Applies token dropout at train time.
std::vector<Var> embed_tokens(Tape& tape, const TokenAnnotations& ann,
                              const EncoderParams& p, const ModelConfig& cfg, bool train,
                              Rng* dropout_rng);

// Bidirectional LSTM producing one hidden matrix per sentence
// (J_n x 2*hidden). With cfg.sentence_reset the recurrence restarts at
// every sentence boundary; otherwise it runs across the document.
std::vector<Var> encode_document(Tape& tape, const std::vector<Var>& token_reps,
                                 const BoundEncoder& enc, const ModelConfig& cfg);

// Mean of the hidden rows over [start, end). Empty span -> error.
Var span_init_repr(Tape& tape, Var hidden_states, std::size_t start, std::size_t end);

// Hidden state of the span's head word (first token by default).
Var head_state(Tape& tape, Var hidden_states, std::size_t start, std::size_t end,
               const ModelConfig& cfg);

// Reads "token v1 v2 ..." lines into matching word-table rows; returns
// how many vocabulary words were initialized from the file.
int load_word_vectors(const std::string& path, const Vocab& vocab, Parameter& word_table);

}  // namespace docre
