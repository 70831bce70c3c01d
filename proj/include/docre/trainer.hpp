#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "docre/model.hpp"

namespace docre {

// Mean binary cross-entropy over all (pair, relation) cells; gold_sets
// holds the gold relation ids per pair. Same clamping as the training
// objective.
double bce_loss(const Tensor& probs, const std::vector<std::vector<int>>& gold_sets);

// One candidate (pair, relation) prediction.
struct Prediction {
    int doc_index = 0;
    std::string title;
    int head = 0;
    int tail = 0;
    int relation_id = 0;
    std::string relation;
    double score = 0.0;
    PathKind rtype = PathKind::Intra;
    std::variant<IrPath, LrPath, CrPath> path;
};

// Scores every ordered entity pair of every document (eval mode);
// candidates below min_candidate_prob are dropped. jobs > 1 parallelizes
// across documents with per-thread tapes.
std::vector<Prediction> score_corpus(RelationModel& model, const Corpus& corpus,
                                     int jobs = 1);

struct ScoreItem {
    double confidence = 0.0;
    bool correct = false;
};

// Sorts candidates by confidence descending, sweeps every cut position,
// and returns the confidence at the F1-maximizing prefix (ties -> larger
// theta, i.e. fewer predictions). All-wrong lists return +infinity (keep
// nothing). total_gold == 0 -> error.
double tune_threshold(std::vector<ScoreItem> scores, std::int64_t total_gold);

// (head alias, tail alias, relation) triples seen in a training corpus;
// a prediction matches when any alias combination matches.
using FactNameSet = std::unordered_set<std::string>;
FactNameSet collect_fact_names(const Corpus& train);
bool fact_in_names(const FactNameSet& names, const Document& doc, int head, int tail,
                   const std::string& relation);

struct EvalResult {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    double ign_precision = 0.0, ign_recall = 0.0, ign_f1 = 0.0;
    double theta = 0.0;
    std::int64_t n_pred = 0, n_correct = 0, n_gold = 0;
    // Winning reasoning types, indexed IR, LR, CR.
    std::array<std::int64_t, 3> attribution_tp{};
    std::array<std::int64_t, 3> attribution_pred{};
};

// Applies confidence >= theta, computes micro P/R/F1, and the ignore-set
// variant where predicted facts whose alias triple appears in train_facts
// are removed before recomputing.
EvalResult evaluate_predictions(const std::vector<Prediction>& preds, const Corpus& gold,
                                const FactNameSet& train_facts, double theta);

std::int64_t count_gold_facts(const Corpus& corpus);

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    std::optional<double> dev_f1, dev_ign_f1, theta;
};

struct TrainOptions {
    std::string checkpoint_path;  // best-dev checkpoint (empty: keep in memory only)
    std::string log_path;         // JSONL epoch log (empty: skip)
    bool quiet = true;
    int jobs = 1;  // parallel dev scoring
};

struct TrainResult {
    std::vector<EpochLog> log;
    double best_f1 = 0.0;
    double best_ign_f1 = 0.0;
    double best_theta = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int epochs_run = 0;
};

// Shuffled batches, BCE over all selected pairs, clipped AdamW steps,
// periodic dev evaluation with threshold tuning; keeps the best-dev-F1
// checkpoint. Fully reproducible for a fixed config seed.
TrainResult train_model(RelationModel& model, const Corpus& train, const Corpus& dev,
                        const TrainOptions& opts = {});

std::string epoch_log_to_jsonl(const std::vector<EpochLog>& log);

// Finite-difference check of the whole model's loss on one document.
GradCheckResult model_grad_check(RelationModel& model, const Document& doc, double eps);

}  // namespace docre
