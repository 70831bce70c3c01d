#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include "doctest.h"
#include "docre/encoder.hpp"
#include "docre/synth.hpp"

using namespace docre;

namespace {

std::string fixture(const std::string& name) { return std::string(FIXTURES_DIR "/") + name; }

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.word_dim = 4;
    cfg.type_dim = 2;
    cfg.coref_dim = 2;
    cfg.hidden = 3;
    cfg.coref_table = 6;
    cfg.dropout = 0.0;
    return cfg;
}

Document sample_doc() {
    Document doc;
    doc.sentences = {{"Alice", "visits", "Berlin"}, {"Nice", "city"}};
    doc.entities.push_back({"PER", {{0, 0, 1, "Alice"}}});
    doc.entities.push_back({"LOC", {{0, 2, 3, "Berlin"}}});
    return doc;
}

}  // namespace

TEST_CASE("token representation width is the sum of the three tables") {
    CHECK(ModelConfig{}.token_dim() == 140);  // 100 + 20 + 20 defaults

    const ModelConfig cfg = tiny_config();
    const Document doc = sample_doc();
    const Vocab vocab = build_vocab({doc}, 1);
    Rng rng(1);
    ParamStore store;
    const EncoderParams params = create_encoder_params(store, cfg, vocab, rng);

    Tape tape;
    const auto ann = annotate_tokens(doc, vocab, cfg);
    const auto reps = embed_tokens(tape, ann, params, cfg, false, nullptr);
    REQUIRE(reps.size() == 2);
    CHECK(tape.value(reps[0]).rows == 3);
    CHECK(tape.value(reps[0]).cols == 8);  // 4 + 2 + 2
    CHECK(tape.value(reps[1]).rows == 2);
}

TEST_CASE("tokens outside mentions use the reserved none rows") {
    const ModelConfig cfg = tiny_config();
    const Document doc = sample_doc();
    const Vocab vocab = build_vocab({doc}, 1);
    const auto ann = annotate_tokens(doc, vocab, cfg);
    CHECK(ann.type_ids[0][1] == 0);  // "visits"
    CHECK(ann.coref_ids[0][1] == 0);
    CHECK(ann.type_ids[0][0] == vocab.type_id("PER") + 1);
    CHECK(ann.coref_ids[0][0] == 1);  // entity 0 ordinal + 1
    CHECK(ann.type_ids[0][2] == vocab.type_id("LOC") + 1);
    CHECK(ann.coref_ids[0][2] == 2);
    CHECK(ann.type_ids[1][0] == 0);
    CHECK_FALSE(ann.coref_clamped);
}

TEST_CASE("overlapping mentions: earliest start wins, ties prefer longer") {
    ModelConfig cfg = tiny_config();
    Document doc;
    doc.sentences = {{"t0", "t1", "t2", "t3", "t4"}};
    doc.entities.push_back({"PER", {{0, 1, 3, "t1 t2"}}});   // entity 0: [1,3)
    doc.entities.push_back({"ORG", {{0, 2, 4, "t2 t3"}}});   // entity 1: [2,4)
    doc.entities.push_back({"LOC", {{0, 1, 2, "t1"}}});      // entity 2: [1,2) same start as 0
    const Vocab vocab = build_vocab({doc}, 1);
    const auto ann = annotate_tokens(doc, vocab, cfg);
    // token 1: entities 0 ([1,3)) and 2 ([1,2)) both start at 1 -> longer span wins
    CHECK(ann.coref_ids[0][1] == 1);
    // token 2: entity 0 starts earlier than entity 1
    CHECK(ann.coref_ids[0][2] == 1);
    // token 3: only entity 1
    CHECK(ann.coref_ids[0][3] == 2);
    CHECK(ann.type_ids[0][3] == vocab.type_id("ORG") + 1);
}

TEST_CASE("coref ordinals clamp to the table and report it") {
    ModelConfig cfg = tiny_config();
    cfg.coref_table = 2;  // only none + one real row
    const Document doc = sample_doc();
    const Vocab vocab = build_vocab({doc}, 1);
    const auto ann = annotate_tokens(doc, vocab, cfg);
    CHECK(ann.coref_ids[0][0] == 1);
    CHECK(ann.coref_ids[0][2] == 1);  // clamped from 2
    CHECK(ann.coref_clamped);
}

TEST_CASE("zero weights and zero inputs give zero hidden states") {
    const ModelConfig cfg = tiny_config();
    const Document doc = sample_doc();
    const Vocab vocab = build_vocab({doc}, 1);
    Rng rng(1);
    ParamStore store;
    const EncoderParams params = create_encoder_params(store, cfg, vocab, rng);
    for (Parameter* p : store.all()) p->value.fill(0.0);  // includes the forget bias

    Tape tape;
    const auto ann = annotate_tokens(doc, vocab, cfg);
    const auto reps = embed_tokens(tape, ann, params, cfg, false, nullptr);
    const auto hidden = encode_document(tape, reps, bind_encoder(tape, params), cfg);
    for (Var h : hidden) {
        const Tensor v = tape.value(h);
        CHECK(v.cols == 6);  // 2 * hidden
        for (double x : v.data) CHECK(x == 0.0);
    }
}

TEST_CASE("hidden width follows the config") {
    ModelConfig cfg = tiny_config();
    cfg.hidden = 5;
    const Document doc = sample_doc();
    const Vocab vocab = build_vocab({doc}, 1);
    Rng rng(2);
    ParamStore store;
    const EncoderParams params = create_encoder_params(store, cfg, vocab, rng);
    Tape tape;
    const auto reps = embed_tokens(tape, annotate_tokens(doc, vocab, cfg), params, cfg,
                                   false, nullptr);
    const auto hidden = encode_document(tape, reps, bind_encoder(tape, params), cfg);
    CHECK(tape.value(hidden[0]).cols == 10);
}

TEST_CASE("reversing a sentence swaps the direction halves under shared weights") {
    const ModelConfig cfg = tiny_config();
    Document fwd_doc, rev_doc;
    fwd_doc.sentences = {{"a", "b", "c", "d"}};
    rev_doc.sentences = {{"d", "c", "b", "a"}};
    const Vocab vocab = build_vocab({fwd_doc}, 1);

    Rng rng(3);
    ParamStore store;
    const EncoderParams params = create_encoder_params(store, cfg, vocab, rng);
    // one weight set for both directions
    params.bwd_wx->value = params.fwd_wx->value;
    params.bwd_wh->value = params.fwd_wh->value;
    params.bwd_b->value = params.fwd_b->value;

    Tape tape;
    const BoundEncoder enc = bind_encoder(tape, params);
    const auto h_fwd = encode_document(
        tape, embed_tokens(tape, annotate_tokens(fwd_doc, vocab, cfg), params, cfg, false, nullptr),
        enc, cfg);
    const auto h_rev = encode_document(
        tape, embed_tokens(tape, annotate_tokens(rev_doc, vocab, cfg), params, cfg, false, nullptr),
        enc, cfg);

    const Tensor a = tape.value(h_fwd[0]);
    const Tensor b = tape.value(h_rev[0]);
    const std::size_t h = 3, len = 4;
    for (std::size_t j = 0; j < len; ++j) {
        for (std::size_t k = 0; k < h; ++k) {
            CHECK(b.at(j, k) == doctest::Approx(a.at(len - 1 - j, h + k)).epsilon(1e-12));
            CHECK(b.at(j, h + k) == doctest::Approx(a.at(len - 1 - j, k)).epsilon(1e-12));
        }
    }
}

TEST_CASE("document-contiguous encoding differs from per-sentence reset") {
    ModelConfig cfg = tiny_config();
    const Document doc = sample_doc();
    const Vocab vocab = build_vocab({doc}, 1);
    Rng rng(4);
    ParamStore store;
    const EncoderParams params = create_encoder_params(store, cfg, vocab, rng);

    Tape tape;
    const BoundEncoder enc = bind_encoder(tape, params);
    const auto reps = embed_tokens(tape, annotate_tokens(doc, vocab, cfg), params, cfg,
                                   false, nullptr);
    cfg.sentence_reset = true;
    const auto reset = encode_document(tape, reps, enc, cfg);
    cfg.sentence_reset = false;
    const auto contiguous = encode_document(tape, reps, enc, cfg);
    CHECK(tape.value(reset[1]).rows == tape.value(contiguous[1]).rows);
    // first sentence's forward pass is identical; the second differs
    bool differs = false;
    const Tensor r1 = tape.value(reset[1]);
    const Tensor c1 = tape.value(contiguous[1]);
    for (std::size_t i = 0; i < r1.size(); ++i) differs |= r1.data[i] != c1.data[i];
    CHECK(differs);
}

TEST_CASE("span mean and head state behave on fixtures") {
    Tape tape;
    Var h = tape.constant(Tensor(4, 2, {1, 2, 3, 4, 5, 6, 7, 8}));

    SUBCASE("single-token span is that row") {
        const Tensor v = tape.value(span_init_repr(tape, h, 2, 3));
        CHECK(v.data == std::vector<double>{5, 6});
    }
    SUBCASE("two identical rows keep the value") {
        Var h2 = tape.constant(Tensor(2, 2, {9, 9, 9, 9}));
        const Tensor v = tape.value(span_init_repr(tape, h2, 0, 2));
        CHECK(v.data == std::vector<double>{9, 9});
    }
    SUBCASE("three-row span is the arithmetic mean") {
        const Tensor v = tape.value(span_init_repr(tape, h, 0, 3));
        CHECK(v.at(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(v.at(0, 1) == doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("head state picks the first token by default") {
        ModelConfig cfg;
        const Tensor v = tape.value(head_state(tape, h, 2, 4, cfg));
        CHECK(v.data == std::vector<double>{5, 6});
        cfg.head_word = "last";
        const Tensor w = tape.value(head_state(tape, h, 2, 4, cfg));
        CHECK(w.data == std::vector<double>{7, 8});
    }
    SUBCASE("sentence head is row zero") {
        ModelConfig cfg;
        const Tensor v = tape.value(head_state(tape, h, 0, 4, cfg));
        CHECK(v.data == std::vector<double>{1, 2});
    }
    SUBCASE("single-token span: head equals mean") {
        ModelConfig cfg;
        const Tensor a = tape.value(head_state(tape, h, 1, 2, cfg));
        const Tensor b = tape.value(span_init_repr(tape, h, 1, 2));
        CHECK(a.data == b.data);
    }
    SUBCASE("empty spans error") {
        ModelConfig cfg;
        CHECK_THROWS_AS(span_init_repr(tape, h, 2, 2), ValidationError);
        CHECK_THROWS_AS(head_state(tape, h, 3, 3, cfg), ValidationError);
    }
}

TEST_CASE("pretrained vectors fill matching rows only") {
    const Corpus corpus = load_corpus(fixture("docred_sample.json"));
    const Vocab vocab = build_vocab(corpus, 1);
    Rng rng(5);
    ParamStore store;
    Parameter& table = store.create_normal("w", static_cast<std::size_t>(vocab.n_words()), 3,
                                           rng, 0.1);
    const Tensor before = table.value;
    const int loaded = load_word_vectors(fixture("vectors.txt"), vocab, table);
    CHECK(loaded == 2);  // alice, berlin; notinvocab skipped
    const auto alice = static_cast<std::size_t>(vocab.word_id("alice"));
    CHECK(table.value.at(alice, 0) == 0.5);
    CHECK(table.value.at(alice, 1) == -1.25);
    CHECK(table.value.at(alice, 2) == 3.0);
    const auto works = static_cast<std::size_t>(vocab.word_id("works"));
    CHECK(table.value.at(works, 0) == before.at(works, 0));  // untouched
    CHECK_THROWS_AS(load_word_vectors("/nonexistent/file", vocab, table), IoError);

    std::ofstream("/tmp/docre_short_vec.txt") << "alice 1.0 2.0\n";  // one value short
    CHECK_THROWS_AS(load_word_vectors("/tmp/docre_short_vec.txt", vocab, table),
                    ValidationError);
}

TEST_CASE("encoding is deterministic in eval mode") {
    const ModelConfig cfg = tiny_config();
    const auto data = synth_corpus(3, 1, {});
    const Vocab vocab = build_vocab(data.corpus, 1);
    Rng rng(6);
    ParamStore store;
    const EncoderParams params = create_encoder_params(store, cfg, vocab, rng);

    auto run = [&] {
        Tape tape;
        const auto reps = embed_tokens(tape, annotate_tokens(data.corpus[0], vocab, cfg),
                                       params, cfg, false, nullptr);
        const auto hidden = encode_document(tape, reps, bind_encoder(tape, params), cfg);
        std::vector<double> flat;
        for (Var h : hidden) {
            const Tensor v = tape.value(h);
            flat.insert(flat.end(), v.data.begin(), v.data.end());
        }
        return flat;
    };
    CHECK(run() == run());
}
