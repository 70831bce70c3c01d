#include "docre/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <set>
#include <sstream>

#include "docre/optim.hpp"
#include "docre/parallel.hpp"
#include "json.hpp"

using json = nlohmann::ordered_json;

namespace docre {

double bce_loss(const Tensor& probs, const std::vector<std::vector<int>>& gold_sets) {
    if (gold_sets.size() != probs.rows)
        throw ShapeError("bce_loss: " + std::to_string(gold_sets.size()) + " gold sets vs " +
                         probs.shape_str() + " probs");
    Tensor targets(probs.rows, probs.cols);
    for (std::size_t p = 0; p < gold_sets.size(); ++p)
        for (int r : gold_sets[p]) {
            if (r < 0 || static_cast<std::size_t>(r) >= probs.cols)
                throw ShapeError("bce_loss: relation id " + std::to_string(r) + " out of range");
            targets.at(p, static_cast<std::size_t>(r)) = 1.0;
        }
    Tape tape;
    return tape.scalar(tape.bce_mean(tape.constant(probs), targets));
}

double tune_threshold(std::vector<ScoreItem> scores, std::int64_t total_gold) {
    if (scores.empty()) throw ValidationError("tune_threshold: empty score list");
    if (total_gold <= 0) throw ValidationError("tune_threshold: no positive gold");

    std::stable_sort(scores.begin(), scores.end(), [](const ScoreItem& a, const ScoreItem& b) {
        return a.confidence > b.confidence;
    });

    double best_f1 = 0.0;
    double best_theta = std::numeric_limits<double>::infinity();
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].correct) ++correct;
        // Cut only at confidence boundaries so "keep everything >= theta"
        // matches the prefix exactly.
        if (i + 1 < scores.size() && scores[i + 1].confidence == scores[i].confidence)
            continue;
        if (correct == 0) continue;
        const double p = static_cast<double>(correct) / static_cast<double>(i + 1);
        const double r = static_cast<double>(correct) / static_cast<double>(total_gold);
        const double f1 = 2.0 * p * r / (p + r);
        if (f1 > best_f1) {  // strict: ties keep the earlier (larger) theta
            best_f1 = f1;
            best_theta = scores[i].confidence;
        }
    }
    return best_theta;
}

namespace {

std::string fact_key(const std::string& h, const std::string& t, const std::string& r) {
    return h + '\x1f' + t + '\x1f' + r;
}

std::vector<std::string> entity_aliases(const Entity& e) {
    std::set<std::string> names;
    for (const Mention& m : e.mentions) names.insert(m.surface);
    return {names.begin(), names.end()};
}

}  // namespace

FactNameSet collect_fact_names(const Corpus& train) {
    FactNameSet names;
    for (const Document& doc : train) {
        for (const RelationFact& f : doc.facts) {
            const auto heads = entity_aliases(doc.entities[static_cast<std::size_t>(f.head)]);
            const auto tails = entity_aliases(doc.entities[static_cast<std::size_t>(f.tail)]);
            for (const auto& h : heads)
                for (const auto& t : tails) names.insert(fact_key(h, t, f.relation));
        }
    }
    return names;
}

bool fact_in_names(const FactNameSet& names, const Document& doc, int head, int tail,
                   const std::string& relation) {
    const auto heads = entity_aliases(doc.entities[static_cast<std::size_t>(head)]);
    const auto tails = entity_aliases(doc.entities[static_cast<std::size_t>(tail)]);
    for (const auto& h : heads)
        for (const auto& t : tails)
            if (names.count(fact_key(h, t, relation))) return true;
    return false;
}

std::int64_t count_gold_facts(const Corpus& corpus) {
    std::int64_t n = 0;
    for (const Document& doc : corpus) {
        std::set<std::tuple<int, int, std::string>> uniq;
        for (const RelationFact& f : doc.facts) uniq.insert({f.head, f.tail, f.relation});
        n += static_cast<std::int64_t>(uniq.size());
    }
    return n;
}

std::vector<Prediction> score_corpus(RelationModel& model, const Corpus& corpus, int jobs) {
    const double floor = model.config().min_candidate_prob;
    const auto relations = model.vocab().relation_codes();
    std::vector<std::vector<Prediction>> per_doc(corpus.size());
    std::atomic<bool> clamped{false};

    parallel_for(static_cast<int>(corpus.size()), jobs, [&](int d) {
        const Document& doc = corpus[static_cast<std::size_t>(d)];
        if (doc.entities.size() < 2) return;
        Tape tape;
        auto result = model.forward_document(tape, doc, /*train=*/false,
                                             /*compute_loss=*/false, nullptr);
        if (result.coref_clamped) clamped.store(true, std::memory_order_relaxed);
        auto& out = per_doc[static_cast<std::size_t>(d)];
        for (const auto& pair : result.pairs) {
            for (std::size_t r = 0; r < pair.probs.size(); ++r) {
                if (pair.probs[r] < floor) continue;
                Prediction p;
                p.doc_index = d;
                p.title = doc.title;
                p.head = pair.head;
                p.tail = pair.tail;
                p.relation_id = static_cast<int>(r);
                p.relation = relations[r];
                p.score = pair.probs[r];
                const PathChoice& w = pair.winners[r];
                p.rtype = w.kind;
                switch (w.kind) {
                    case PathKind::Intra:
                        p.path = pair.bundle.ir[static_cast<std::size_t>(w.index)];
                        break;
                    case PathKind::Logical:
                        p.path = pair.bundle.lr[static_cast<std::size_t>(w.index)];
                        break;
                    case PathKind::Coref:
                        p.path = pair.bundle.cr[static_cast<std::size_t>(w.index)];
                        break;
                }
                out.push_back(std::move(p));
            }
        }
    });

    if (clamped.load())
        std::cerr << "warning: coreference ordinals clamped to the table size "
                  << "(coref_table=" << model.config().coref_table << ")\n";

    std::vector<Prediction> all;
    for (auto& chunk : per_doc)
        for (auto& p : chunk) all.push_back(std::move(p));
    return all;
}

EvalResult evaluate_predictions(const std::vector<Prediction>& preds, const Corpus& gold,
                                const FactNameSet& train_facts, double theta) {
    std::set<std::tuple<int, int, int, std::string>> gold_set;
    for (std::size_t d = 0; d < gold.size(); ++d)
        for (const RelationFact& f : gold[d].facts)
            gold_set.insert({static_cast<int>(d), f.head, f.tail, f.relation});

    EvalResult result;
    result.theta = theta;
    result.n_gold = static_cast<std::int64_t>(gold_set.size());

    std::int64_t kept = 0, correct = 0;
    std::int64_t ign_kept = 0, ign_correct = 0;
    for (const Prediction& p : preds) {
        if (!(p.score >= theta)) continue;
        ++kept;
        const bool is_correct =
            gold_set.count({p.doc_index, p.head, p.tail, p.relation}) > 0;
        const auto type_idx = static_cast<std::size_t>(p.rtype);
        ++result.attribution_pred[type_idx];
        if (is_correct) {
            ++correct;
            ++result.attribution_tp[type_idx];
        }
        const bool in_train = fact_in_names(train_facts, gold[static_cast<std::size_t>(p.doc_index)],
                                            p.head, p.tail, p.relation);
        if (!in_train) {
            ++ign_kept;
            if (is_correct) ++ign_correct;
        }
    }

    result.n_pred = kept;
    result.n_correct = correct;
    const auto f1_of = [](double p, double r) {
        return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    };
    result.precision = kept > 0 ? static_cast<double>(correct) / static_cast<double>(kept) : 0.0;
    result.recall = result.n_gold > 0
                        ? static_cast<double>(correct) / static_cast<double>(result.n_gold)
                        : 0.0;
    result.f1 = f1_of(result.precision, result.recall);
    result.ign_precision =
        ign_kept > 0 ? static_cast<double>(ign_correct) / static_cast<double>(ign_kept) : 0.0;
    result.ign_recall = result.n_gold > 0
                            ? static_cast<double>(ign_correct) / static_cast<double>(result.n_gold)
                            : 0.0;
    result.ign_f1 = f1_of(result.ign_precision, result.ign_recall);
    return result;
}

namespace {

std::vector<std::pair<int, int>> sample_pairs(const Document& doc, double neg_ratio,
                                              Rng& rng) {
    const auto pairs = all_ordered_pairs(doc);
    if (neg_ratio >= 1.0) return pairs;
    std::set<std::pair<int, int>> positive;
    for (const RelationFact& f : doc.facts) positive.insert({f.head, f.tail});
    std::vector<std::pair<int, int>> kept;
    for (const auto& pr : pairs) {
        if (positive.count(pr) || rng.uniform() < neg_ratio) kept.push_back(pr);
    }
    if (kept.empty() && !pairs.empty()) kept.push_back(pairs.front());
    return kept;
}

}  // namespace

std::string epoch_log_to_jsonl(const std::vector<EpochLog>& log) {
    std::ostringstream out;
    for (const EpochLog& e : log) {
        json j;
        j["epoch"] = e.epoch;
        j["loss"] = e.loss;
        j["dev_f1"] = e.dev_f1 ? json(*e.dev_f1) : json(nullptr);
        j["dev_ign_f1"] = e.dev_ign_f1 ? json(*e.dev_ign_f1) : json(nullptr);
        j["theta"] = e.theta ? json(*e.theta) : json(nullptr);
        out << j.dump() << "\n";
    }
    return out.str();
}

TrainResult train_model(RelationModel& model, const Corpus& train, const Corpus& dev,
                        const TrainOptions& opts) {
    const ModelConfig& cfg = model.config();
    if (train.empty()) throw ValidationError("train: empty training corpus");

    const std::int64_t dev_gold = count_gold_facts(dev);
    const FactNameSet train_facts = collect_fact_names(train);

    Rng train_rng(cfg.seed ^ 0x7261696e5f726e67ull);
    AdamW optimizer(model.params(),
                    cfg.lr > 0.0
                        ? AdamWConfig{cfg.lr, cfg.weight_decay, 0.9, 0.999, 1e-8}
                        : AdamWConfig{1e-3, cfg.weight_decay, 0.9, 0.999, 1e-8});

    TrainResult result;
    int evals_since_best = 0;
    bool clamp_warned = false;

    std::vector<int> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng epoch_rng = train_rng.fork(static_cast<std::uint64_t>(epoch));
        epoch_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::int64_t epoch_batches = 0;

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));

            // Pair selection first so cell counts are known for weighting.
            std::vector<std::vector<std::pair<int, int>>> batch_pairs;
            std::size_t total_cells = 0;
            for (std::size_t bi = start; bi < stop; ++bi) {
                const Document& doc = train[static_cast<std::size_t>(order[bi])];
                auto pairs = doc.entities.size() >= 2
                                 ? sample_pairs(doc, cfg.neg_ratio, epoch_rng)
                                 : std::vector<std::pair<int, int>>{};
                total_cells += pairs.size() * static_cast<std::size_t>(model.n_relations());
                batch_pairs.push_back(std::move(pairs));
            }
            if (total_cells == 0) continue;

            model.params().zero_grads();
            double batch_loss = 0.0;
            for (std::size_t bi = start; bi < stop; ++bi) {
                const auto& pairs = batch_pairs[bi - start];
                if (pairs.empty()) continue;
                const Document& doc = train[static_cast<std::size_t>(order[bi])];
                Rng dropout_rng = epoch_rng.fork(static_cast<std::uint64_t>(order[bi]) + 101);
                Tape tape;
                auto fwd = model.forward_document(tape, doc, /*train=*/true,
                                                  /*compute_loss=*/true, &dropout_rng, &pairs);
                if (fwd.coref_clamped && !clamp_warned) {
                    std::cerr << "warning: coreference ordinals clamped to the table size "
                              << "(coref_table=" << cfg.coref_table << ")\n";
                    clamp_warned = true;
                }
                const double cells =
                    static_cast<double>(pairs.size()) * static_cast<double>(model.n_relations());
                // Doc losses are per-cell means; reweight so the batch is
                // one mean over all its cells.
                Var weighted = tape.scale(fwd.loss, cells / static_cast<double>(total_cells));
                const double value = tape.scalar(weighted);
                if (!std::isfinite(value)) {
                    std::ostringstream diag;
                    diag << "train: non-finite loss at epoch " << epoch << " doc "
                         << order[bi] << " (grad_norm=" << global_grad_norm(model.params())
                         << ")";
                    throw NumericError(diag.str());
                }
                batch_loss += value;
                tape.backward(weighted);
            }
            if (cfg.lr > 0.0) {
                if (cfg.clip_norm > 0.0) clip_grad_norm(model.params(), cfg.clip_norm);
                optimizer.step();
            }
            epoch_loss += batch_loss;
            ++epoch_batches;
        }

        EpochLog log_entry;
        log_entry.epoch = epoch;
        log_entry.loss = epoch_batches > 0 ? epoch_loss / static_cast<double>(epoch_batches) : 0.0;

        const bool eval_now = cfg.eval_every > 0 && (epoch % cfg.eval_every == 0);
        if (eval_now && !dev.empty() && dev_gold > 0) {
            auto preds = score_corpus(model, dev, opts.jobs);
            std::set<std::tuple<int, int, int, std::string>> gold_set;
            for (std::size_t d = 0; d < dev.size(); ++d)
                for (const RelationFact& f : dev[d].facts)
                    gold_set.insert({static_cast<int>(d), f.head, f.tail, f.relation});
            std::vector<ScoreItem> items;
            items.reserve(preds.size());
            for (const Prediction& p : preds)
                items.push_back(
                    {p.score, gold_set.count({p.doc_index, p.head, p.tail, p.relation}) > 0});
            double theta = std::numeric_limits<double>::infinity();
            if (!items.empty()) theta = tune_threshold(items, dev_gold);
            const EvalResult er = evaluate_predictions(preds, dev, train_facts, theta);
            log_entry.dev_f1 = er.f1;
            log_entry.dev_ign_f1 = er.ign_f1;
            log_entry.theta = theta;

            if (er.f1 > result.best_f1 || result.best_epoch < 0) {
                result.best_f1 = er.f1;
                result.best_ign_f1 = er.ign_f1;
                result.best_theta = theta;
                result.best_epoch = epoch;
                evals_since_best = 0;
                if (!opts.checkpoint_path.empty()) model.save(opts.checkpoint_path);
            } else {
                ++evals_since_best;
            }
            if (!opts.quiet)
                std::cerr << "epoch " << epoch << " loss " << log_entry.loss << " dev_f1 "
                          << er.f1 << " theta " << theta << "\n";
        } else if (!opts.quiet) {
            std::cerr << "epoch " << epoch << " loss " << log_entry.loss << "\n";
        }

        result.log.push_back(log_entry);
        result.epochs_run = epoch;

        if (log_entry.dev_f1 && cfg.stop_at_f1 > 0.0 && *log_entry.dev_f1 >= cfg.stop_at_f1)
            break;
        if (cfg.patience > 0 && evals_since_best >= cfg.patience) break;
    }

    // No evaluation ever ran (e.g. no dev corpus): persist the final state.
    if (result.best_epoch < 0 && !opts.checkpoint_path.empty())
        model.save(opts.checkpoint_path);
    if (!opts.log_path.empty()) write_text_file(opts.log_path, epoch_log_to_jsonl(result.log));
    return result;
}

GradCheckResult model_grad_check(RelationModel& model, const Document& doc, double eps) {
    auto f = [&](bool with_grad) {
        Tape tape;
        auto fwd = model.forward_document(tape, doc, /*train=*/false, /*compute_loss=*/true,
                                          nullptr);
        if (!fwd.loss.valid()) throw ValidationError("grad check: document yields no loss");
        if (with_grad) tape.backward(fwd.loss);
        return tape.scalar(fwd.loss);
    };
    return grad_check(f, model.params(), eps);
}

}  // namespace docre
