#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "docre/hetgcn.hpp"
#include "docre/synth.hpp"

using namespace docre;

namespace {

ModelConfig gcn_config(int layers = 2, int dim = 0) {
    ModelConfig cfg;
    cfg.word_dim = 2;
    cfg.type_dim = 1;
    cfg.coref_dim = 1;
    cfg.hidden = 1;  // d_enc = 2
    cfg.gcn_layers = layers;
    cfg.gcn_dim = dim;
    return cfg;
}

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) {
    Tensor t(r, c);
    for (auto& v : t.data) v = rng.normal(0.0, 0.8);
    return t;
}

}  // namespace

TEST_CASE("normalized adjacency averages over typed neighbors") {
    Document doc;
    doc.sentences = {{"a", "b"}, {"c"}, {"d"}};
    const HetGraph g = build_graph(doc);  // 3 sentence nodes, complete SS graph
    const Tensor a = normalized_adjacency(g, EdgeType::SentenceSentence);
    REQUIRE(a.rows == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.at(i, i) == 0.0);
        double sum = 0.0;
        for (std::size_t j = 0; j < 3; ++j) sum += a.at(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    // no mention edges anywhere
    const Tensor mm = normalized_adjacency(g, EdgeType::MentionMention);
    for (double v : mm.data) CHECK(v == 0.0);
}

TEST_CASE("zero weights collapse every node to the bias activation") {
    const ModelConfig cfg = gcn_config(2);
    const auto data = synth_corpus(12, 1, {});
    const HetGraph graph = build_graph(data.corpus[0]);

    Rng rng(1);
    ParamStore store;
    auto layers = create_gcn_params(store, cfg, rng);
    for (auto& layer : layers) {
        layer.w_self->value.fill(0.0);
        for (auto* w : layer.w_type) w->value.fill(0.0);
    }
    layers[0].b->value = Tensor(1, 2, {0.5, -0.25});
    layers[1].b->value = Tensor(1, 2, {-1.0, 2.0});

    Tape tape;
    Var inits = tape.constant(random_tensor(static_cast<std::size_t>(graph.n_nodes()), 2, rng));
    Var g = gcn_forward(tape, graph, inits, bind_gcn(tape, layers), cfg);
    const Tensor out = tape.value(g);
    CHECK(out.cols == 6);  // v_n plus two layer outputs
    for (std::size_t i = 0; i < out.rows; ++i) {
        CHECK(out.at(i, 2) == 0.5);  // relu(0.5)
        CHECK(out.at(i, 3) == 0.0);  // relu(-0.25)
        CHECK(out.at(i, 4) == 0.0);
        CHECK(out.at(i, 5) == 2.0);
    }
}

TEST_CASE("an isolated node depends only on its self term") {
    const ModelConfig cfg = gcn_config(1);
    Document doc;
    doc.sentences = {{"only", "sentence"}};
    const HetGraph graph = build_graph(doc);  // single node, no edges
    REQUIRE(graph.n_nodes() == 1);

    Rng rng(2);
    ParamStore store;
    auto layers = create_gcn_params(store, cfg, rng);
    Tape tape;
    const Tensor v = random_tensor(1, 2, rng);
    Var g = gcn_forward(tape, graph, tape.constant(v), bind_gcn(tape, layers), cfg);
    const Tensor out = tape.value(g);

    // direct recomputation of relu(v W_self + b)
    for (std::size_t j = 0; j < 2; ++j) {
        double s = layers[0].b->value.at(0, j);
        for (std::size_t k = 0; k < 2; ++k) s += v.at(0, k) * layers[0].w_self->value.at(k, j);
        CHECK(out.at(0, 2 + j) == doctest::Approx(std::max(0.0, s)).epsilon(1e-12));
    }
}

TEST_CASE("two-node message passing matches the hand computation") {
    const ModelConfig cfg = gcn_config(1);
    Document doc;
    doc.sentences = {{"m", "x"}};
    doc.entities.push_back({"PER", {{0, 0, 1, "m"}}});
    const HetGraph graph = build_graph(doc);  // mention node 0, sentence node 1, one SM edge
    REQUIRE(graph.n_nodes() == 2);
    REQUIRE(graph.edges[static_cast<int>(EdgeType::SentenceMention)].size() == 1);

    ParamStore store;
    Rng rng(3);
    auto layers = create_gcn_params(store, cfg, rng);
    layers[0].w_self->value = Tensor(2, 2, {1, 0, 0, 1});
    for (auto* w : layers[0].w_type) w->value.fill(0.0);
    layers[0].w_type[static_cast<int>(EdgeType::SentenceMention)]->value =
        Tensor(2, 2, {0, 1, 1, 0});  // swaps coordinates
    layers[0].b->value = Tensor(1, 2, {0.1, -0.1});

    Tape tape;
    Var inits = tape.constant(Tensor(2, 2, {1.0, 2.0, -3.0, 4.0}));
    Var g = gcn_forward(tape, graph, inits, bind_gcn(tape, layers), cfg);
    const Tensor out = tape.value(g);

    // node 0: relu([1,2] + swap([-3,4]) + [0.1,-0.1]) = relu([5.1, -1.1]) = [5.1, 0]
    CHECK(out.at(0, 2) == doctest::Approx(5.1).epsilon(1e-12));
    CHECK(out.at(0, 3) == 0.0);
    // node 1: relu([-3,4] + swap([1,2]) + [0.1,-0.1]) = relu([-0.9, 4.9]) = [0, 4.9]
    CHECK(out.at(1, 2) == 0.0);
    CHECK(out.at(1, 3) == doctest::Approx(4.9).epsilon(1e-12));
    // concatenation keeps the inits in front
    CHECK(out.at(0, 0) == 1.0);
    CHECK(out.at(1, 1) == 4.0);
}

TEST_CASE("relabeling entities permutes the outputs identically") {
    const ModelConfig cfg = gcn_config(2);
    Document a;
    a.sentences = {{"x", "y", "z"}, {"w", "v"}};
    a.entities.push_back({"PER", {{0, 0, 1, "x"}, {1, 0, 1, "w"}}});
    a.entities.push_back({"ORG", {{0, 2, 3, "z"}}});
    Document b = a;
    std::swap(b.entities[0], b.entities[1]);

    const HetGraph ga = build_graph(a);
    const HetGraph gb = build_graph(b);
    // row mapping a -> b: a mentions [e0m0, e0m1, e1m0] -> b rows [1, 2, 0]
    const std::vector<std::size_t> map_a_to_b = {1, 2, 0, 3, 4};

    ParamStore store;
    Rng rng(4);
    auto layers = create_gcn_params(store, cfg, rng);

    Rng data_rng(5);
    Tensor inits_a = random_tensor(5, 2, data_rng);
    Tensor inits_b(5, 2);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 2; ++j) inits_b.at(map_a_to_b[i], j) = inits_a.at(i, j);

    Tape tape;
    const Tensor out_a =
        tape.value(gcn_forward(tape, ga, tape.constant(inits_a), bind_gcn(tape, layers), cfg));
    const Tensor out_b =
        tape.value(gcn_forward(tape, gb, tape.constant(inits_b), bind_gcn(tape, layers), cfg));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < out_a.cols; ++j)
            CHECK(out_a.at(i, j) == doctest::Approx(out_b.at(map_a_to_b[i], j)).epsilon(1e-12));
}

TEST_CASE("zeroing one type's weights makes its edges irrelevant") {
    const ModelConfig cfg = gcn_config(2);
    SynthConfig synth_cfg;
    synth_cfg.extra_mention_prob = 0.9;
    const auto data = synth_corpus(31, 1, synth_cfg);
    const HetGraph graph = build_graph(data.corpus[0]);
    REQUIRE(!graph.edges[static_cast<int>(EdgeType::Coreference)].empty());

    ParamStore store;
    Rng rng(6);
    auto layers = create_gcn_params(store, cfg, rng);
    for (auto& layer : layers)
        layer.w_type[static_cast<int>(EdgeType::Coreference)]->value.fill(0.0);

    HetGraph stripped = graph;
    stripped.edges[static_cast<int>(EdgeType::Coreference)].clear();

    Rng data_rng(7);
    const Tensor inits = random_tensor(static_cast<std::size_t>(graph.n_nodes()), 2, data_rng);
    Tape tape;
    const Tensor with_edges =
        tape.value(gcn_forward(tape, graph, tape.constant(inits), bind_gcn(tape, layers), cfg));
    const Tensor without_edges = tape.value(
        gcn_forward(tape, stripped, tape.constant(inits), bind_gcn(tape, layers), cfg));
    CHECK(with_edges.data == without_edges.data);
}

TEST_CASE("output width equals the declared d1") {
    for (const char* mode : {"all", "skip_last"}) {
        ModelConfig cfg = gcn_config(2, 3);
        cfg.gcn_concat = mode;
        const auto data = synth_corpus(8, 1, {});
        const HetGraph graph = build_graph(data.corpus[0]);
        ParamStore store;
        Rng rng(8);
        auto layers = create_gcn_params(store, cfg, rng);
        Tape tape;
        Rng data_rng(9);
        Var inits =
            tape.constant(random_tensor(static_cast<std::size_t>(graph.n_nodes()), 2, data_rng));
        const Tensor out =
            tape.value(gcn_forward(tape, graph, inits, bind_gcn(tape, layers), cfg));
        CHECK(static_cast<int>(out.cols) == cfg.d1());
    }
}
