#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "docre/config.hpp"
#include "docre/corpus.hpp"
#include "docre/docgraph.hpp"
#include "docre/metapath.hpp"
#include "docre/model.hpp"
#include "docre/parallel.hpp"
#include "docre/synth.hpp"
#include "docre/trainer.hpp"
#include "json.hpp"

using json = nlohmann::ordered_json;
using namespace docre;

namespace {

// stdout by default, --out file when given.
class OutputSink {
  public:
    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw IoError("cannot write output: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

json mention_to_json(const MentionRef& m) {
    json j;
    j["entity"] = m.entity;
    j["mention"] = m.mention;
    j["sent"] = m.sentence;
    j["start"] = m.start;
    return j;
}

json path_to_json(const IrPath& p) {
    json j;
    j["type"] = "IR";
    j["sentence"] = p.sentence;
    j["head"] = mention_to_json(p.head_m);
    j["tail"] = mention_to_json(p.tail_m);
    return j;
}

json path_to_json(const LrPath& p) {
    json j;
    j["type"] = "LR";
    j["s1"] = p.s1;
    j["s2"] = p.s2;
    j["bridge_entity"] = p.bridge_entity;
    j["head"] = mention_to_json(p.head_m);
    j["bridge1"] = mention_to_json(p.bridge_m1);
    j["bridge2"] = mention_to_json(p.bridge_m2);
    j["tail"] = mention_to_json(p.tail_m);
    return j;
}

json path_to_json(const CrPath& p) {
    json j;
    j["type"] = "CR";
    j["s1"] = p.s1;
    j["s2"] = p.s2;
    j["head"] = mention_to_json(p.head_m);
    j["tail"] = mention_to_json(p.tail_m);
    return j;
}

json coverage_to_json(const CoverageReport& rep) {
    json j;
    j["k"] = rep.k;
    j["documents"] = rep.n_documents;
    j["pairs"] = rep.n_pairs;
    j["pairs_fully_covered"] = rep.n_pairs_fully_covered;
    j["cover_pairs"] = rep.cover_pairs;
    j["cover_paths"] = rep.cover_paths;
    const char* names[3] = {"IR", "LR", "CR"};
    json avail, hist;
    for (int t = 0; t < 3; ++t) {
        avail[names[t]] = rep.type_available[static_cast<std::size_t>(t)];
        json h;
        for (const auto& [count, n] : rep.histogram[static_cast<std::size_t>(t)])
            h[count > 10 ? std::string(">10") : std::to_string(count)] = n;
        hist[names[t]] = h;
    }
    j["type_available"] = avail;
    j["path_count_histogram"] = hist;
    return j;
}

json eval_to_json(const EvalResult& r) {
    json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["ign_precision"] = r.ign_precision;
    j["ign_recall"] = r.ign_recall;
    j["ign_f1"] = r.ign_f1;
    j["theta"] = std::isfinite(r.theta) ? json(r.theta) : json("inf");
    j["predictions"] = r.n_pred;
    j["correct"] = r.n_correct;
    j["gold"] = r.n_gold;
    const char* names[3] = {"IR", "LR", "CR"};
    json tp, pred;
    for (int t = 0; t < 3; ++t) {
        tp[names[t]] = r.attribution_tp[static_cast<std::size_t>(t)];
        pred[names[t]] = r.attribution_pred[static_cast<std::size_t>(t)];
    }
    j["attribution_tp"] = tp;
    j["attribution_pred"] = pred;
    return j;
}

struct CommonFlags {
    std::string corpus, dev, vocab, config, checkpoint, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> k;
    int jobs = 1;
    std::optional<double> theta;
};

ModelConfig resolve_config(const CommonFlags& flags) {
    ModelConfig cfg;
    if (!flags.config.empty()) cfg = load_config(flags.config);
    apply_env_overrides(cfg);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.k) cfg.k = *flags.k;
    cfg.validate();
    return cfg;
}

Vocab vocab_for_model(const CommonFlags& flags) {
    if (flags.vocab.empty())
        throw ValidationError("this subcommand needs --vocab (saved during training)");
    return load_vocab(flags.vocab);
}

int cmd_ingest(const CommonFlags& flags, const std::string& vocab_out, int min_freq) {
    std::optional<Vocab> vocab_check;
    if (!flags.vocab.empty()) vocab_check = load_vocab(flags.vocab);
    Corpus corpus = load_corpus(flags.corpus, vocab_check);
    OutputSink sink(flags.out);
    sink.stream() << serialize_corpus(corpus) << "\n";
    if (!vocab_out.empty()) {
        const Vocab vocab = build_vocab(corpus, min_freq);
        save_vocab(vocab, vocab_out);
    }
    std::cerr << "ingested " << corpus.size() << " documents\n";
    return 0;
}

int cmd_stats(const CommonFlags& flags, bool coverage) {
    Corpus corpus = load_corpus(flags.corpus);
    if (corpus.empty()) throw ValidationError("stats: empty corpus");
    OutputSink sink(flags.out);
    if (coverage) {
        const CoverageReport rep = coverage_stats(corpus, flags.k.value_or(3));
        sink.stream() << coverage_to_json(rep).dump() << "\n";
        return 0;
    }
    std::vector<std::string> lines(corpus.size());
    parallel_for(static_cast<int>(corpus.size()), flags.jobs, [&](int d) {
        const HetGraph g = build_graph(corpus[static_cast<std::size_t>(d)]);
        json j;
        j["title"] = corpus[static_cast<std::size_t>(d)].title;
        j["nodes"] = g.n_nodes();
        j["mention_nodes"] = g.n_mentions;
        j["sentence_nodes"] = g.n_sentences;
        json edges;
        for (EdgeType t : kAllEdgeTypes)
            edges[edge_type_name(t)] = g.edges[static_cast<int>(t)].size();
        j["edges"] = edges;
        lines[static_cast<std::size_t>(d)] = j.dump();
    });
    for (const auto& line : lines) sink.stream() << line << "\n";
    return 0;
}

int cmd_paths(const CommonFlags& flags, int doc_filter, int head_filter, int tail_filter) {
    Corpus corpus = load_corpus(flags.corpus);
    const int k = flags.k.value_or(3);
    OutputSink sink(flags.out);
    std::vector<std::string> chunks(corpus.size());
    parallel_for(static_cast<int>(corpus.size()), flags.jobs, [&](int d) {
        if (doc_filter >= 0 && d != doc_filter) return;
        const Document& doc = corpus[static_cast<std::size_t>(d)];
        const int n = static_cast<int>(doc.entities.size());
        std::string out;
        for (int i = 0; i < n; ++i) {
            if (head_filter >= 0 && i != head_filter) continue;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                if (tail_filter >= 0 && j != tail_filter) continue;
                const PathSet ps = enumerate_paths(doc, i, j);
                const PathBundle bundle = select_paths(ps, k);
                json rec;
                rec["title"] = doc.title;
                rec["head"] = i;
                rec["tail"] = j;
                json counts;
                counts["IR"] = ps.ir.size();
                counts["LR"] = ps.lr.size();
                counts["CR"] = ps.cr.size();
                rec["counts"] = counts;
                json kept;
                kept["IR"] = bundle.ir.size();
                kept["LR"] = bundle.lr.size();
                kept["CR"] = bundle.cr.size();
                rec["kept"] = kept;
                json jp;
                json ir = json::array(), lr = json::array(), cr = json::array();
                for (const auto& p : bundle.ir) ir.push_back(path_to_json(p));
                for (const auto& p : bundle.lr) lr.push_back(path_to_json(p));
                for (const auto& p : bundle.cr) cr.push_back(path_to_json(p));
                jp["IR"] = ir;
                jp["LR"] = lr;
                jp["CR"] = cr;
                rec["paths"] = jp;
                out += rec.dump();
                out += "\n";
            }
        }
        chunks[static_cast<std::size_t>(d)] = std::move(out);
    });
    for (const auto& chunk : chunks) sink.stream() << chunk;
    return 0;
}

int cmd_synth(const CommonFlags& flags, int n_docs, const SynthConfig& synth_cfg,
              const std::string& plants_out) {
    const SynthResult result = synth_corpus(flags.seed.value_or(1), n_docs, synth_cfg);
    OutputSink sink(flags.out);
    sink.stream() << serialize_corpus(result.corpus) << "\n";
    if (!plants_out.empty()) {
        std::ofstream pf(plants_out);
        if (!pf) throw IoError("cannot write plants file: " + plants_out);
        for (const PlantRecord& p : result.plants) {
            json j;
            j["doc"] = p.doc_index;
            j["fact"] = p.fact_index;
            j["pattern"] = path_kind_name(p.pattern);
            pf << j.dump() << "\n";
        }
    }
    std::cerr << "generated " << result.corpus.size() << " documents, "
              << result.plants.size() << " planted facts\n";
    return 0;
}

int cmd_train(const CommonFlags& flags, const std::string& log_path,
              const std::string& vocab_out) {
    ModelConfig cfg = resolve_config(flags);
    const Corpus train = load_corpus(flags.corpus);
    if (train.empty()) throw ValidationError("train: empty training corpus");
    const Corpus dev = flags.dev.empty() ? train : load_corpus(flags.dev);

    Vocab vocab;
    if (!flags.vocab.empty())
        vocab = load_vocab(flags.vocab);
    else
        vocab = build_vocab(train, cfg.min_freq, cfg.lowercase);
    if (!vocab_out.empty()) save_vocab(vocab, vocab_out);

    RelationModel model(cfg, vocab);
    TrainOptions opts;
    opts.checkpoint_path = flags.out.empty() ? "model.ckpt" : flags.out;
    opts.log_path = log_path;
    opts.quiet = false;
    opts.jobs = flags.jobs;
    const TrainResult result = train_model(model, train, dev, opts);

    json j;
    j["epochs_run"] = result.epochs_run;
    j["best_epoch"] = result.best_epoch;
    j["best_f1"] = result.best_f1;
    j["best_ign_f1"] = result.best_ign_f1;
    j["theta"] = std::isfinite(result.best_theta) ? json(result.best_theta) : json("inf");
    j["checkpoint"] = opts.checkpoint_path;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& train_corpus_path) {
    const Vocab vocab = vocab_for_model(flags);
    auto model = RelationModel::load(flags.checkpoint, vocab);
    const Corpus corpus = load_corpus(flags.corpus, vocab);
    if (corpus.empty()) throw ValidationError("eval: empty corpus");

    FactNameSet train_facts;
    if (!train_corpus_path.empty())
        train_facts = collect_fact_names(load_corpus(train_corpus_path));

    auto preds = score_corpus(*model, corpus, flags.jobs);
    double theta;
    if (flags.theta) {
        theta = *flags.theta;
    } else {
        std::set<std::tuple<int, int, int, std::string>> gold;
        for (std::size_t d = 0; d < corpus.size(); ++d)
            for (const RelationFact& f : corpus[d].facts)
                gold.insert({static_cast<int>(d), f.head, f.tail, f.relation});
        std::vector<ScoreItem> items;
        for (const Prediction& p : preds)
            items.push_back({p.score, gold.count({p.doc_index, p.head, p.tail, p.relation}) > 0});
        theta = tune_threshold(items, count_gold_facts(corpus));
    }
    const EvalResult result = evaluate_predictions(preds, corpus, train_facts, theta);
    OutputSink sink(flags.out);
    sink.stream() << eval_to_json(result).dump() << "\n";
    return 0;
}

int cmd_predict(const CommonFlags& flags) {
    const Vocab vocab = vocab_for_model(flags);
    auto model = RelationModel::load(flags.checkpoint, vocab);
    const Corpus corpus = load_corpus(flags.corpus, vocab);
    const double theta = flags.theta.value_or(0.5);

    auto preds = score_corpus(*model, corpus, flags.jobs);
    std::vector<const Prediction*> kept;
    for (const auto& p : preds)
        if (p.score >= theta) kept.push_back(&p);
    std::stable_sort(kept.begin(), kept.end(), [](const Prediction* a, const Prediction* b) {
        if (a->title != b->title) return a->title < b->title;
        if (a->head != b->head) return a->head < b->head;
        if (a->tail != b->tail) return a->tail < b->tail;
        return a->score > b->score;
    });

    OutputSink sink(flags.out);
    for (const Prediction* p : kept) {
        json j;
        j["title"] = p->title;
        j["head"] = p->head;
        j["tail"] = p->tail;
        j["relation"] = p->relation;
        j["score"] = p->score;
        j["reasoning_type"] = path_kind_name(p->rtype);
        std::visit([&](const auto& path) { j["path"] = path_to_json(path); }, p->path);
        sink.stream() << j.dump() << "\n";
    }
    std::cerr << "wrote " << kept.size() << " predictions (theta=" << theta << ")\n";
    return 0;
}

int cmd_gradcheck(const CommonFlags& flags) {
    // Miniature model over a 2-sentence synthetic document; small dims
    // keep the full finite-difference sweep fast.
    SynthConfig synth_cfg;
    synth_cfg.n_sentences_min = 2;
    synth_cfg.n_sentences_max = 2;
    synth_cfg.sentence_len_min = 6;
    synth_cfg.sentence_len_max = 8;
    synth_cfg.n_entities_min = 3;
    synth_cfg.n_entities_max = 4;
    synth_cfg.facts_min = 1;
    synth_cfg.facts_max = 2;
    synth_cfg.n_relations = 3;
    const SynthResult data = synth_corpus(flags.seed.value_or(1), 1, synth_cfg);

    ModelConfig cfg;
    cfg.word_dim = 6;
    cfg.type_dim = 3;
    cfg.coref_dim = 3;
    cfg.hidden = 4;
    cfg.gcn_layers = 2;
    cfg.gcn_dim = 8;
    cfg.d_model = 8;
    cfg.d2 = 8;
    cfg.mlp_hidden = 12;
    cfg.coref_table = 8;
    cfg.dropout = 0.0;
    cfg.seed = flags.seed.value_or(1);

    const Vocab vocab = build_vocab(data.corpus, 1);
    RelationModel model(cfg, vocab);
    const GradCheckResult result = model_grad_check(model, data.corpus[0], 1e-5);

    json j;
    j["max_rel_err"] = result.max_rel_err;
    j["worst_param"] = result.worst_param;
    j["elements_checked"] = result.n_checked;
    j["parameters"] = model.params().size();
    std::cout << j.dump() << "\n";
    if (result.max_rel_err >= 1e-4)
        throw NumericError("gradcheck failed: max relative error " +
                           std::to_string(result.max_rel_err));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"document-level relation extraction over typed reasoning paths"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string log_path, vocab_out, plants_out, train_corpus_path;
    int min_freq = 1;
    int doc_filter = -1, head_filter = -1, tail_filter = -1;
    int n_docs = 10;
    bool coverage = false;
    SynthConfig synth_cfg;
    std::string force_pattern;

    auto add_common = [&](CLI::App* cmd, bool needs_corpus) {
        auto* c = cmd->add_option("--corpus", flags.corpus, "corpus JSON file");
        if (needs_corpus) c->required();
        cmd->add_option("--vocab", flags.vocab, "vocab JSON file");
        cmd->add_option("--config", flags.config, "config file (key=value lines)");
        cmd->add_option("--checkpoint", flags.checkpoint, "model checkpoint");
        cmd->add_option("--out", flags.out, "output file (default stdout)");
        cmd->add_option("--seed", flags.seed, "random seed");
        cmd->add_option("--k", flags.k, "paths kept per reasoning type");
        cmd->add_option("--jobs", flags.jobs, "worker threads for document-parallel work");
        cmd->add_option("--theta", flags.theta, "confidence threshold");
    };

    auto* ingest = app.add_subcommand("ingest", "validate and re-serialize a corpus");
    add_common(ingest, true);
    ingest->add_option("--vocab-out", vocab_out, "write the built vocab here");
    ingest->add_option("--min-freq", min_freq, "vocab frequency cutoff");

    auto* stats = app.add_subcommand("stats", "per-document graph statistics");
    add_common(stats, true);
    stats->add_flag("--coverage", coverage, "emit the path coverage report at --k instead");

    auto* paths = app.add_subcommand("paths", "reasoning paths per entity pair");
    add_common(paths, true);
    paths->add_option("--doc", doc_filter, "only this document index");
    paths->add_option("--head", head_filter, "only this head entity index");
    paths->add_option("--tail", tail_filter, "only this tail entity index");

    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
    add_common(synth, false);
    synth->add_option("--docs", n_docs, "number of documents");
    synth->add_option("--entities-min", synth_cfg.n_entities_min);
    synth->add_option("--entities-max", synth_cfg.n_entities_max);
    synth->add_option("--sentences-min", synth_cfg.n_sentences_min);
    synth->add_option("--sentences-max", synth_cfg.n_sentences_max);
    synth->add_option("--relations", synth_cfg.n_relations);
    synth->add_option("--facts-min", synth_cfg.facts_min);
    synth->add_option("--facts-max", synth_cfg.facts_max);
    synth->add_option("--force-pattern", force_pattern, "IR, LR or CR");
    synth->add_option("--plants-out", plants_out, "write planted-pattern records here");

    auto* train = app.add_subcommand("train", "train a model");
    add_common(train, true);
    train->add_option("--dev", flags.dev, "dev corpus (default: train corpus)");
    train->add_option("--log", log_path, "epoch log JSONL path");
    train->add_option("--vocab-out", vocab_out, "write the training vocab here");

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(eval, true);
    eval->add_option("--train-corpus", train_corpus_path,
                     "training corpus for the ignore-set metric");

    auto* predict = app.add_subcommand("predict", "write prediction JSONL");
    add_common(predict, true);

    auto* gradcheck =
        app.add_subcommand("gradcheck", "finite-difference check of the full model");
    add_common(gradcheck, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(flags, vocab_out, min_freq);
        if (stats->parsed()) return cmd_stats(flags, coverage);
        if (paths->parsed()) return cmd_paths(flags, doc_filter, head_filter, tail_filter);
        if (synth->parsed()) {
            if (!force_pattern.empty())
                synth_cfg.force_pattern = path_kind_from_name(force_pattern);
            return cmd_synth(flags, n_docs, synth_cfg, plants_out);
        }
        if (train->parsed()) return cmd_train(flags, log_path, vocab_out);
        if (eval->parsed()) return cmd_eval(flags, train_corpus_path);
        if (predict->parsed()) return cmd_predict(flags);
        if (gradcheck->parsed()) return cmd_gradcheck(flags);
    } catch (const IoError& e) {
        std::cerr << "error code=2 msg=\"" << e.what() << "\"\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error code=3 msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error code=4 msg=\"" << e.what() << "\"\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error code=1 msg=\"" << e.what() << "\"\n";
        return 1;
    }
    return 0;
}
