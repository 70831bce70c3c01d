#pragma once

#include <vector>

#include "docre/config.hpp"
#include "docre/docgraph.hpp"
#include "docre/metapath.hpp"
#include "docre/tape.hpp"

namespace docre {

// Relation classifier: one hidden relu layer, |R| outputs. The same MLP
// serves all three path types.
struct MlpParams {
    Parameter* w1 = nullptr;
    Parameter* b1 = nullptr;
    Parameter* w2 = nullptr;
    Parameter* b2 = nullptr;
};

MlpParams create_mlp_params(ParamStore& store, const ModelConfig& cfg, int n_relations,
                            Rng& rng);

struct BoundMlp {
    Var w1, b1, w2, b2;
};
BoundMlp bind_mlp(Tape& tape, const MlpParams& p);

// Graph-contextual (n x d1) and document-attention (n x d2) node rows,
// addressed through the graph's flat node ids.
struct NodeReps {
    const HetGraph* graph = nullptr;
    Var g;  // n_nodes x d1
    Var c;  // n_nodes x d2
};

// Path representations, each 1 x (2*d1 + 2*d2):
//   intra    [g(mi) : g(mj) : c(mi) : c(mj)]
//   logical  [g(mi) : g(mj) : c(mi)+c(ml1) : c(mj)+c(ml2)]
//   coref    [g(mi) : g(mj) : c(s1) : c(s2)]
Var rep_intra(Tape& tape, const NodeReps& reps, const IrPath& path);
Var rep_logical(Tape& tape, const NodeReps& reps, const LrPath& path);
Var rep_coref(Tape& tape, const NodeReps& reps, const CrPath& path);

// Which path won the per-relation max: reasoning type plus index within
// that type's bundle list.
struct PathChoice {
    PathKind kind = PathKind::Intra;
    int index = 0;
};

struct ScoredPair {
    Var max_logits;  // 1 x R, per-relation max over all bundle paths
    Var probs;       // sigmoid(max_logits)
    std::vector<PathChoice> winners;  // per relation, first argmax in bundle order
};

// Scores one bundle: every path through the shared MLP, then a
// per-relation max over paths (bundle order IR, LR, CR). Empty bundle ->
// error.
ScoredPair score_pair(Tape& tape, const PathBundle& bundle, const NodeReps& reps,
                      const BoundMlp& mlp, const ModelConfig& cfg, bool train,
                      Rng* dropout_rng);

}  // namespace docre
