#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "docre/config.hpp"
#include "docre/corpus.hpp"
#include "docre/doccontext.hpp"
#include "docre/encoder.hpp"
#include "docre/hetgcn.hpp"
#include "docre/reasoner.hpp"

namespace docre {

// The end-to-end scorer: token embedding -> BiLSTM -> heterogeneous graph
// convolution + document attention -> per-path scoring with per-relation
// max. Parameters live in an ordered store keyed by stable names, so
// checkpoints are reproducible.
class RelationModel {
  public:
    RelationModel(const ModelConfig& cfg, const Vocab& vocab);

    const ModelConfig& config() const { return cfg_; }
    const Vocab& vocab() const { return vocab_; }
    ParamStore& params() { return store_; }
    int n_relations() const { return vocab_.n_relations(); }

    struct PairResult {
        int head = 0;
        int tail = 0;
        std::vector<double> probs;        // |R|
        std::vector<PathChoice> winners;  // |R|
        PathBundle bundle;
    };

    struct DocResult {
        std::vector<PairResult> pairs;
        Var loss;        // valid when the forward computed a loss
        bool coref_clamped = false;
    };

    // Scores ordered entity pairs of one document on the given tape.
    // pair_filter selects a subset (training-time negative sampling);
    // null means every ordered pair. compute_loss attaches the BCE
    // against the document's gold facts.
    DocResult forward_document(Tape& tape, const Document& doc, bool train,
                               bool compute_loss, Rng* dropout_rng,
                               const std::vector<std::pair<int, int>>* pair_filter = nullptr);

    void save(const std::string& path);
    static std::unique_ptr<RelationModel> load(const std::string& path, const Vocab& vocab);

  private:
    ModelConfig cfg_;
    Vocab vocab_;
    ParamStore store_;
    EncoderParams encoder_;
    std::vector<GcnLayerParams> gcn_;
    AttnParams attn_;
    MlpParams mlp_;
};

// 0/1 target matrix (pairs x |R|) for the given ordered pairs.
Tensor make_targets(const Document& doc, const Vocab& vocab,
                    const std::vector<std::pair<int, int>>& pairs);

// All ordered entity pairs (i, j), i != j, lexicographic.
std::vector<std::pair<int, int>> all_ordered_pairs(const Document& doc);

}  // namespace docre
