#include "docre/reasoner.hpp"

namespace docre {

MlpParams create_mlp_params(ParamStore& store, const ModelConfig& cfg, int n_relations,
                            Rng& rng) {
    MlpParams p;
    const auto in = static_cast<std::size_t>(cfg.rep_dim());
    const auto mid = static_cast<std::size_t>(cfg.mlp_hidden_eff());
    const auto out = static_cast<std::size_t>(n_relations);
    p.w1 = &store.create_glorot("mlp.w1", in, mid, rng);
    p.b1 = &store.create("mlp.b1", 1, mid);
    p.w2 = &store.create_glorot("mlp.w2", mid, out, rng);
    p.b2 = &store.create("mlp.b2", 1, out);
    return p;
}

BoundMlp bind_mlp(Tape& tape, const MlpParams& p) {
    return {tape.param(*p.w1), tape.param(*p.b1), tape.param(*p.w2), tape.param(*p.b2)};
}

namespace {

Var mention_g(Tape& tape, const NodeReps& reps, const MentionRef& m) {
    return tape.row(reps.g, static_cast<std::size_t>(reps.graph->mention_row(m.entity, m.mention)));
}
Var mention_c(Tape& tape, const NodeReps& reps, const MentionRef& m) {
    return tape.row(reps.c, static_cast<std::size_t>(reps.graph->mention_row(m.entity, m.mention)));
}
Var sentence_c(Tape& tape, const NodeReps& reps, int sentence) {
    return tape.row(reps.c, static_cast<std::size_t>(reps.graph->sentence_row(sentence)));
}

}  // namespace

Var rep_intra(Tape& tape, const NodeReps& reps, const IrPath& path) {
    return tape.concat_cols({mention_g(tape, reps, path.head_m),
                             mention_g(tape, reps, path.tail_m),
                             mention_c(tape, reps, path.head_m),
                             mention_c(tape, reps, path.tail_m)});
}

Var rep_logical(Tape& tape, const NodeReps& reps, const LrPath& path) {
    Var c_head = tape.add(mention_c(tape, reps, path.head_m),
                          mention_c(tape, reps, path.bridge_m1));
    Var c_tail = tape.add(mention_c(tape, reps, path.tail_m),
                          mention_c(tape, reps, path.bridge_m2));
    return tape.concat_cols({mention_g(tape, reps, path.head_m),
                             mention_g(tape, reps, path.tail_m), c_head, c_tail});
}

Var rep_coref(Tape& tape, const NodeReps& reps, const CrPath& path) {
    return tape.concat_cols({mention_g(tape, reps, path.head_m),
                             mention_g(tape, reps, path.tail_m),
                             sentence_c(tape, reps, path.s1),
                             sentence_c(tape, reps, path.s2)});
}

ScoredPair score_pair(Tape& tape, const PathBundle& bundle, const NodeReps& reps,
                      const BoundMlp& mlp, const ModelConfig& cfg, bool train,
                      Rng* dropout_rng) {
    if (bundle.total() == 0) throw ValidationError("score_pair: empty path bundle");

    std::vector<Var> rows;
    std::vector<PathChoice> order;
    for (std::size_t i = 0; i < bundle.ir.size(); ++i) {
        rows.push_back(rep_intra(tape, reps, bundle.ir[i]));
        order.push_back({PathKind::Intra, static_cast<int>(i)});
    }
    for (std::size_t i = 0; i < bundle.lr.size(); ++i) {
        rows.push_back(rep_logical(tape, reps, bundle.lr[i]));
        order.push_back({PathKind::Logical, static_cast<int>(i)});
    }
    for (std::size_t i = 0; i < bundle.cr.size(); ++i) {
        rows.push_back(rep_coref(tape, reps, bundle.cr[i]));
        order.push_back({PathKind::Coref, static_cast<int>(i)});
    }

    Var stacked = tape.concat_rows(rows);  // P x rep_dim
    Var hidden = tape.relu(tape.add_row(tape.matmul(stacked, mlp.w1), mlp.b1));
    if (train && cfg.dropout_mlp && cfg.dropout > 0.0)
        hidden = tape.dropout(hidden, cfg.dropout, *dropout_rng);
    Var logits = tape.add_row(tape.matmul(hidden, mlp.w2), mlp.b2);  // P x R

    ScoredPair out;
    out.max_logits = tape.max_axis(logits, 0);
    out.probs = tape.sigmoid(out.max_logits);
    for (std::size_t arg : tape.argmax_of(out.max_logits))
        out.winners.push_back(order[arg]);
    return out;
}

}  // namespace docre
