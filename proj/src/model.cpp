#include "docre/model.hpp"

#include <algorithm>

namespace docre {

RelationModel::RelationModel(const ModelConfig& cfg, const Vocab& vocab)
    : cfg_(cfg), vocab_(vocab) {
    cfg_.validate();
    if (vocab_.n_relations() == 0)
        throw ValidationError("model: vocab has no relation inventory");
    Rng rng(cfg_.seed);
    encoder_ = create_encoder_params(store_, cfg_, vocab_, rng);
    gcn_ = create_gcn_params(store_, cfg_, rng);
    attn_ = create_attn_params(store_, cfg_, rng);
    mlp_ = create_mlp_params(store_, cfg_, vocab_.n_relations(), rng);
    if (!cfg_.word_vectors.empty())
        load_word_vectors(cfg_.word_vectors, vocab_, *encoder_.word_table);
}

std::vector<std::pair<int, int>> all_ordered_pairs(const Document& doc) {
    const int n = static_cast<int>(doc.entities.size());
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n > 0 ? n - 1 : 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) pairs.emplace_back(i, j);
    return pairs;
}

Tensor make_targets(const Document& doc, const Vocab& vocab,
                    const std::vector<std::pair<int, int>>& pairs) {
    Tensor targets(pairs.size(), static_cast<std::size_t>(vocab.n_relations()));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (const RelationFact& f : doc.facts) {
            if (f.head != pairs[p].first || f.tail != pairs[p].second) continue;
            const int r = vocab.relation_id(f.relation);
            if (r < 0)
                throw ValidationError("targets: relation '" + f.relation + "' not in vocab");
            targets.at(p, static_cast<std::size_t>(r)) = 1.0;
        }
    }
    return targets;
}

RelationModel::DocResult RelationModel::forward_document(
    Tape& tape, const Document& doc, bool train, bool compute_loss, Rng* dropout_rng,
    const std::vector<std::pair<int, int>>* pair_filter) {
    if (train && !dropout_rng && cfg_.dropout > 0.0 &&
        (cfg_.dropout_tokens || cfg_.dropout_mlp))
        throw ValidationError("forward_document: training with dropout needs an rng");
    DocResult result;

    const TokenAnnotations ann = annotate_tokens(doc, vocab_, cfg_);
    result.coref_clamped = ann.coref_clamped;

    const BoundEncoder enc = bind_encoder(tape, encoder_);
    const auto gcn_layers = bind_gcn(tape, gcn_);
    const Var w_k = tape.param(*attn_.w_k);
    const Var w_v = tape.param(*attn_.w_v);
    const BoundMlp mlp = bind_mlp(tape, mlp_);

    const auto token_reps = embed_tokens(tape, ann, encoder_, cfg_, train, dropout_rng);
    const auto hidden = encode_document(tape, token_reps, enc, cfg_);

    const HetGraph graph = build_graph(doc);

    // Initial node representations: span means for mentions, whole
    // sentence for sentence nodes.
    std::vector<Var> init_rows(static_cast<std::size_t>(graph.n_nodes()));
    std::vector<Var> query_rows(static_cast<std::size_t>(graph.n_nodes()));
    for (int m = 0; m < graph.n_mentions; ++m) {
        const auto& info = graph.mention_info[static_cast<std::size_t>(m)];
        const Mention& mention = doc.entities[static_cast<std::size_t>(info.entity)]
                                     .mentions[static_cast<std::size_t>(info.mention)];
        const Var h = hidden[static_cast<std::size_t>(mention.sentence_index)];
        init_rows[static_cast<std::size_t>(m)] =
            span_init_repr(tape, h, static_cast<std::size_t>(mention.start),
                           static_cast<std::size_t>(mention.end));
        query_rows[static_cast<std::size_t>(m)] =
            head_state(tape, h, static_cast<std::size_t>(mention.start),
                       static_cast<std::size_t>(mention.end), cfg_);
    }
    for (int s = 0; s < graph.n_sentences; ++s) {
        const Var h = hidden[static_cast<std::size_t>(s)];
        const std::size_t len = tape.value(h).rows;
        init_rows[static_cast<std::size_t>(graph.sentence_row(s))] =
            span_init_repr(tape, h, 0, len);
        query_rows[static_cast<std::size_t>(graph.sentence_row(s))] =
            head_state(tape, h, 0, len, cfg_);
    }

    const Var inits = tape.concat_rows(init_rows);
    NodeReps reps;
    reps.graph = &graph;
    reps.g = gcn_forward(tape, graph, inits, gcn_layers, cfg_);

    const Var d_all = tape.concat_rows(hidden);
    const DocAttention attention(tape, d_all, w_k, w_v, cfg_);
    reps.c = attention.contexts(tape.concat_rows(query_rows));

    const std::vector<std::pair<int, int>> pairs =
        pair_filter ? *pair_filter : all_ordered_pairs(doc);

    std::vector<Var> logit_rows;
    logit_rows.reserve(pairs.size());
    for (const auto& [head, tail] : pairs) {
        const PathBundle bundle = select_paths(enumerate_paths(doc, head, tail), cfg_.k);
        ScoredPair scored = score_pair(tape, bundle, reps, mlp, cfg_, train, dropout_rng);
        PairResult pr;
        pr.head = head;
        pr.tail = tail;
        pr.winners = std::move(scored.winners);
        pr.bundle = std::move(bundle);
        pr.probs = tape.value(scored.probs).data;
        result.pairs.push_back(std::move(pr));
        logit_rows.push_back(scored.max_logits);
    }

    if (compute_loss && !pairs.empty()) {
        const Var probs = tape.sigmoid(tape.concat_rows(logit_rows));
        result.loss = tape.bce_mean(probs, make_targets(doc, vocab_, pairs));
    }
    return result;
}

void RelationModel::save(const std::string& path) {
    save_checkpoint(path, serialize_config(cfg_), store_);
}

std::unique_ptr<RelationModel> RelationModel::load(const std::string& path,
                                                   const Vocab& vocab) {
    const Checkpoint ckpt = load_checkpoint(path);
    const ModelConfig cfg = parse_config_text(ckpt.config_text);
    auto model = std::make_unique<RelationModel>(cfg, vocab);
    restore_params(ckpt, model->store_);
    return model;
}

}  // namespace docre
