#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "docre/doccontext.hpp"

using namespace docre;

namespace {

ModelConfig attn_config() {
    ModelConfig cfg;
    cfg.word_dim = 2;
    cfg.type_dim = 1;
    cfg.coref_dim = 1;
    cfg.hidden = 1;  // d_enc = 2, d_model = d2 = 2
    return cfg;
}

}  // namespace

TEST_CASE("zero key projection gives uniform attention over tokens") {
    const ModelConfig cfg = attn_config();
    Tape tape;
    Var d_all = tape.constant(Tensor(4, 2, {1, 2, 3, 4, 5, 6, 7, 8}));
    Var w_k = tape.constant(Tensor(2, 2));
    Var w_v = tape.constant(Tensor::identity(2));
    const DocAttention attn(tape, d_all, w_k, w_v, cfg);
    Var q = tape.constant(Tensor(1, 2, {9.0, -3.0}));
    const Tensor w = tape.value(attn.weights(q));
    for (double v : w.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    const Tensor c = tape.value(attn.contexts(q));
    CHECK(c.at(0, 0) == doctest::Approx(4.0).epsilon(1e-12));  // mean of value rows
    CHECK(c.at(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("single-token document returns its value row for any query") {
    const ModelConfig cfg = attn_config();
    Tape tape;
    Var d_all = tape.constant(Tensor(1, 2, {0.5, -1.5}));
    Var w_k = tape.constant(Tensor(2, 2, {1, 2, 3, 4}));
    Var w_v = tape.constant(Tensor(2, 2, {2, 0, 0, 2}));
    const DocAttention attn(tape, d_all, w_k, w_v, cfg);
    const Tensor c1 = tape.value(attn.contexts(tape.constant(Tensor(1, 2, {1, 1}))));
    const Tensor c2 = tape.value(attn.contexts(tape.constant(Tensor(1, 2, {-7, 3}))));
    CHECK(c1.data == c2.data);
    CHECK(c1.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));   // 0.5 * 2
    CHECK(c1.at(0, 1) == doctest::Approx(-3.0).epsilon(1e-12));  // -1.5 * 2
}

TEST_CASE("three-token fixture matches an independent recomputation") {
    const ModelConfig cfg = attn_config();
    const double D[3][2] = {{1, 0}, {0, 1}, {1, 1}};
    const double WK[2][2] = {{1, 2}, {3, 4}};
    const double WV[2][2] = {{1, 0}, {0, 1}};
    const double Q[2] = {1, 2};

    Tape tape;
    Var d_all = tape.constant(Tensor(3, 2, {1, 0, 0, 1, 1, 1}));
    Var w_k = tape.constant(Tensor(2, 2, {1, 2, 3, 4}));
    Var w_v = tape.constant(Tensor(2, 2, {1, 0, 0, 1}));
    const DocAttention attn(tape, d_all, w_k, w_v, cfg);
    Var q = tape.constant(Tensor(1, 2, {1, 2}));
    const Tensor got_logits = tape.value(attn.logits(q));
    const Tensor got_weights = tape.value(attn.weights(q));
    const Tensor got_c = tape.value(attn.contexts(q));

    // plain-loop reference
    double K[3][2];
    for (int t = 0; t < 3; ++t)
        for (int j = 0; j < 2; ++j) {
            K[t][j] = 0;
            for (int k = 0; k < 2; ++k) K[t][j] += D[t][k] * WK[k][j];
        }
    double logits[3];
    for (int t = 0; t < 3; ++t) {
        logits[t] = 0;
        for (int j = 0; j < 2; ++j) logits[t] += Q[j] * K[t][j];
        logits[t] /= std::sqrt(2.0);
    }
    double mx = std::max({logits[0], logits[1], logits[2]});
    double weights[3], z = 0;
    for (int t = 0; t < 3; ++t) z += std::exp(logits[t] - mx);
    for (int t = 0; t < 3; ++t) weights[t] = std::exp(logits[t] - mx) / z;
    double c[2] = {0, 0};
    for (int t = 0; t < 3; ++t) {
        double v[2];
        for (int j = 0; j < 2; ++j) {
            v[j] = 0;
            for (int k = 0; k < 2; ++k) v[j] += D[t][k] * WV[k][j];
        }
        for (int j = 0; j < 2; ++j) c[j] += weights[t] * v[j];
    }

    for (int t = 0; t < 3; ++t) {
        CHECK(got_logits.at(0, static_cast<std::size_t>(t)) ==
              doctest::Approx(logits[t]).epsilon(1e-12));
        CHECK(got_weights.at(0, static_cast<std::size_t>(t)) ==
              doctest::Approx(weights[t]).epsilon(1e-12));
    }
    CHECK(got_c.at(0, 0) == doctest::Approx(c[0]).epsilon(1e-12));
    CHECK(got_c.at(0, 1) == doctest::Approx(c[1]).epsilon(1e-12));
}

TEST_CASE("attention weights are nonnegative and sum to one") {
    const ModelConfig cfg = attn_config();
    Rng rng(13);
    Tensor d(20, 2), wk(2, 2), wv(2, 2), q(5, 2);
    for (auto* t : {&d, &wk, &wv, &q})
        for (auto& v : t->data) v = rng.normal(0.0, 2.0);
    Tape tape;
    const DocAttention attn(tape, tape.constant(d), tape.constant(wk), tape.constant(wv), cfg);
    const Tensor w = tape.value(attn.weights(tape.constant(q)));
    for (std::size_t i = 0; i < w.rows; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) {
            CHECK(w.at(i, j) >= 0.0);
            sum += w.at(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
    }
}

TEST_CASE("doubling the query exactly doubles the logits") {
    const ModelConfig cfg = attn_config();
    Rng rng(17);
    Tensor d(7, 2), wk(2, 2), q(1, 2);
    for (auto* t : {&d, &wk, &q})
        for (auto& v : t->data) v = rng.normal(0.0, 1.0);
    Tape tape;
    const DocAttention attn(tape, tape.constant(d), tape.constant(wk),
                            tape.constant(Tensor::identity(2)), cfg);
    const Tensor base = tape.value(attn.logits(tape.constant(q)));
    Tensor q2 = q;
    for (auto& v : q2.data) v *= 2.0;  // power of two: exact in binary floating point
    const Tensor doubled = tape.value(attn.logits(tape.constant(q2)));
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(doubled.data[i] == 2.0 * base.data[i]);
}

TEST_CASE("contexts stay inside the value rows' coordinate bounds") {
    const ModelConfig cfg = attn_config();
    Rng rng(19);
    Tensor d(9, 2), wk(2, 2), wv(2, 2), q(4, 2);
    for (auto* t : {&d, &wk, &wv, &q})
        for (auto& v : t->data) v = rng.normal(0.0, 1.5);
    Tape tape;
    Var vd = tape.constant(d);
    const DocAttention attn(tape, vd, tape.constant(wk), tape.constant(wv), cfg);
    const Tensor values = tape.value(tape.matmul(vd, tape.constant(wv)));
    const Tensor c = tape.value(attn.contexts(tape.constant(q)));
    for (std::size_t j = 0; j < 2; ++j) {
        double lo = values.at(0, j), hi = values.at(0, j);
        for (std::size_t t = 1; t < values.rows; ++t) {
            lo = std::min(lo, values.at(t, j));
            hi = std::max(hi, values.at(t, j));
        }
        for (std::size_t i = 0; i < c.rows; ++i) {
            CHECK(c.at(i, j) >= lo - 1e-12);
            CHECK(c.at(i, j) <= hi + 1e-12);
        }
    }
}

TEST_CASE("an empty document is rejected") {
    const ModelConfig cfg = attn_config();
    Tape tape;
    Var empty = tape.constant(Tensor(0, 2));
    Var w = tape.constant(Tensor(2, 2));
    CHECK_THROWS_AS(DocAttention(tape, empty, w, w, cfg), ValidationError);
}

TEST_CASE("keys and values are shared across queries") {
    const ModelConfig cfg = attn_config();
    Rng rng(23);
    Tensor d(6, 2), wk(2, 2), wv(2, 2);
    for (auto* t : {&d, &wk, &wv})
        for (auto& v : t->data) v = rng.normal(0.0, 1.0);
    Tape tape;
    const DocAttention attn(tape, tape.constant(d), tape.constant(wk), tape.constant(wv), cfg);
    const std::size_t before = tape.n_nodes();
    Tensor q(1, 2, {1.0, -1.0});
    attn.contexts(tape.constant(q));
    const std::size_t per_query = tape.n_nodes() - before;
    attn.contexts(tape.constant(q));
    // the second query adds the same small node count: no K/V recompute
    CHECK(tape.n_nodes() - before == 2 * per_query);
}
