#include "docre/encoder.hpp"

#include <fstream>
#include <sstream>

namespace docre {

TokenAnnotations annotate_tokens(const Document& doc, const Vocab& vocab,
                                 const ModelConfig& cfg) {
    TokenAnnotations ann;
    const int n_sents = static_cast<int>(doc.sentences.size());
    ann.word_ids.resize(static_cast<std::size_t>(n_sents));
    ann.type_ids.resize(static_cast<std::size_t>(n_sents));
    ann.coref_ids.resize(static_cast<std::size_t>(n_sents));

    for (int s = 0; s < n_sents; ++s) {
        const auto& sent = doc.sentences[static_cast<std::size_t>(s)];
        ann.word_ids[static_cast<std::size_t>(s)].reserve(sent.size());
        for (const auto& tok : sent)
            ann.word_ids[static_cast<std::size_t>(s)].push_back(vocab.word_id(tok));
        ann.type_ids[static_cast<std::size_t>(s)].assign(sent.size(), 0);
        ann.coref_ids[static_cast<std::size_t>(s)].assign(sent.size(), 0);
    }

    // Owner of each token: the covering mention starting earliest; ties
    // prefer the longer span.
    struct Owner {
        int start = -1, len = 0, entity = -1;
    };
    std::vector<std::vector<Owner>> owners(static_cast<std::size_t>(n_sents));
    for (int s = 0; s < n_sents; ++s)
        owners[static_cast<std::size_t>(s)].resize(doc.sentences[static_cast<std::size_t>(s)].size());

    for (std::size_t e = 0; e < doc.entities.size(); ++e) {
        for (const Mention& m : doc.entities[e].mentions) {
            for (int j = m.start; j < m.end; ++j) {
                Owner& o = owners[static_cast<std::size_t>(m.sentence_index)][static_cast<std::size_t>(j)];
                const int len = m.end - m.start;
                const bool wins = o.entity < 0 || m.start < o.start ||
                                  (m.start == o.start && len > o.len);
                if (wins) o = {m.start, len, static_cast<int>(e)};
            }
        }
    }

    for (int s = 0; s < n_sents; ++s) {
        const auto& row = owners[static_cast<std::size_t>(s)];
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j].entity < 0) continue;
            const Entity& ent = doc.entities[static_cast<std::size_t>(row[j].entity)];
            const int tid = vocab.type_id(ent.entity_type);
            ann.type_ids[static_cast<std::size_t>(s)][j] = tid >= 0 ? tid + 1 : 0;
            int cid = row[j].entity + 1;
            if (cid > cfg.coref_table - 1) {
                cid = cfg.coref_table - 1;
                ann.coref_clamped = true;
            }
            ann.coref_ids[static_cast<std::size_t>(s)][j] = cid;
        }
    }
    return ann;
}

EncoderParams create_encoder_params(ParamStore& store, const ModelConfig& cfg,
                                    const Vocab& vocab, Rng& rng) {
    EncoderParams p;
    p.word_table = &store.create_normal("encoder.word_table",
                                        static_cast<std::size_t>(vocab.n_words()),
                                        static_cast<std::size_t>(cfg.word_dim), rng, 0.1);
    p.type_table = &store.create_normal("encoder.type_table",
                                        static_cast<std::size_t>(vocab.n_types() + 1),
                                        static_cast<std::size_t>(cfg.type_dim), rng, 0.1);
    p.coref_table = &store.create_normal("encoder.coref_table",
                                         static_cast<std::size_t>(cfg.coref_table),
                                         static_cast<std::size_t>(cfg.coref_dim), rng, 0.1);
    const auto b = static_cast<std::size_t>(cfg.token_dim());
    const auto h = static_cast<std::size_t>(cfg.hidden);
    for (const char* dir : {"fwd", "bwd"}) {
        const std::string prefix = std::string("encoder.") + dir;
        Parameter& wx = store.create_glorot(prefix + ".wx", b, 4 * h, rng);
        Parameter& wh = store.create_glorot(prefix + ".wh", h, 4 * h, rng);
        Parameter& bias = store.create(prefix + ".b", 1, 4 * h);
        for (std::size_t j = h; j < 2 * h; ++j) bias.value.at(0, j) = 1.0;  // forget gate
        if (std::string(dir) == "fwd") {
            p.fwd_wx = &wx;
            p.fwd_wh = &wh;
            p.fwd_b = &bias;
        } else {
            p.bwd_wx = &wx;
            p.bwd_wh = &wh;
            p.bwd_b = &bias;
        }
    }
    return p;
}

BoundEncoder bind_encoder(Tape& tape, const EncoderParams& p) {
    BoundEncoder e;
    e.fwd_wx = tape.param(*p.fwd_wx);
    e.fwd_wh = tape.param(*p.fwd_wh);
    e.fwd_b = tape.param(*p.fwd_b);
    e.bwd_wx = tape.param(*p.bwd_wx);
    e.bwd_wh = tape.param(*p.bwd_wh);
    e.bwd_b = tape.param(*p.bwd_b);
    return e;
}

std::vector<Var> embed_tokens(Tape& tape, const TokenAnnotations& ann,
                              const EncoderParams& p, const ModelConfig& cfg, bool train,
                              Rng* dropout_rng) {
    std::vector<Var> reps;
    for (std::size_t s = 0; s < ann.word_ids.size(); ++s) {
        Var w = tape.embedding(*p.word_table, ann.word_ids[s]);
        Var t = tape.embedding(*p.type_table, ann.type_ids[s]);
        Var c = tape.embedding(*p.coref_table, ann.coref_ids[s]);
        Var b = tape.concat_cols({w, t, c});
        if (train && cfg.dropout_tokens && cfg.dropout > 0.0)
            b = tape.dropout(b, cfg.dropout, *dropout_rng);
        reps.push_back(b);
    }
    return reps;
}

namespace {

// One LSTM direction over the rows of x (seq_len x input_dim); returns
// per-position hidden rows in sequence order.
std::vector<Var> lstm_pass(Tape& tape, Var x, Var wx, Var wh, Var b, std::size_t h,
                           bool reverse) {
    const std::size_t len = tape.value(x).rows;
    Var hprev = tape.constant(Tensor(1, h));
    Var cprev = tape.constant(Tensor(1, h));
    std::vector<Var> rows(len);
    for (std::size_t step = 0; step < len; ++step) {
        const std::size_t t = reverse ? len - 1 - step : step;
        Var xt = tape.row(x, t);
        Var z = tape.add(tape.add(tape.matmul(xt, wx), tape.matmul(hprev, wh)), b);
        Var gi = tape.sigmoid(tape.slice_cols(z, 0, h));
        Var gf = tape.sigmoid(tape.slice_cols(z, h, 2 * h));
        Var gc = tape.tanh(tape.slice_cols(z, 2 * h, 3 * h));
        Var go = tape.sigmoid(tape.slice_cols(z, 3 * h, 4 * h));
        Var c = tape.add(tape.mul(gf, cprev), tape.mul(gi, gc));
        Var hcur = tape.mul(go, tape.tanh(c));
        rows[t] = hcur;
        hprev = hcur;
        cprev = c;
    }
    return rows;
}

Var bilstm(Tape& tape, Var x, const BoundEncoder& enc, std::size_t h) {
    const auto fwd = lstm_pass(tape, x, enc.fwd_wx, enc.fwd_wh, enc.fwd_b, h, false);
    const auto bwd = lstm_pass(tape, x, enc.bwd_wx, enc.bwd_wh, enc.bwd_b, h, true);
    return tape.concat_cols({tape.concat_rows(fwd), tape.concat_rows(bwd)});
}

}  // namespace

std::vector<Var> encode_document(Tape& tape, const std::vector<Var>& token_reps,
                                 const BoundEncoder& enc, const ModelConfig& cfg) {
    const auto h = static_cast<std::size_t>(cfg.hidden);
    std::vector<Var> out;
    if (cfg.sentence_reset) {
        for (Var b : token_reps) out.push_back(bilstm(tape, b, enc, h));
    } else {
        Var all = tape.concat_rows(token_reps);
        Var encoded = bilstm(tape, all, enc, h);
        std::size_t r = 0;
        for (Var b : token_reps) {
            const std::size_t len = tape.value(b).rows;
            out.push_back(tape.slice_rows(encoded, r, r + len));
            r += len;
        }
    }
    return out;
}

Var span_init_repr(Tape& tape, Var hidden_states, std::size_t start, std::size_t end) {
    if (start >= end) throw ValidationError("span_init_repr: empty span");
    return tape.mean_axis(tape.slice_rows(hidden_states, start, end), 0);
}

Var head_state(Tape& tape, Var hidden_states, std::size_t start, std::size_t end,
               const ModelConfig& cfg) {
    if (start >= end) throw ValidationError("head_state: empty span");
    const std::size_t r = cfg.head_word == "last" ? end - 1 : start;
    return tape.row(hidden_states, r);
}

int load_word_vectors(const std::string& path, const Vocab& vocab, Parameter& word_table) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open word vectors: " + path);
    const std::size_t dim = word_table.value.cols;
    std::string line;
    int loaded = 0;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        const auto it = vocab.word_to_id.find(token);
        if (it == vocab.word_to_id.end()) continue;
        const auto row = static_cast<std::size_t>(it->second);
        for (std::size_t j = 0; j < dim; ++j) {
            double v;
            if (!(ls >> v))
                throw ValidationError("word vectors: line " + std::to_string(lineno) +
                                      " has fewer than " + std::to_string(dim) + " values");
            word_table.value.at(row, j) = v;
        }
        ++loaded;
    }
    return loaded;
}

}  // namespace docre
