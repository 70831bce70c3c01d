#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>

#include "doctest.h"
#include "docre/optim.hpp"
#include "docre/tape.hpp"

using namespace docre;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Tensor t(r, c);
    for (auto& v : t.data) v = rng.normal(0.0, scale);
    return t;
}

// grad_check wrapper for a loss built from the store's parameters.
double check_loss(ParamStore& store, const std::function<Var(Tape&)>& build) {
    auto f = [&](bool with_grad) {
        Tape tape;
        Var loss = build(tape);
        if (with_grad) tape.backward(loss);
        return tape.scalar(loss);
    };
    return grad_check(f, store, 1e-6).max_rel_err;
}

}  // namespace

TEST_CASE("matmul against the identity") {
    Tape tape;
    Var a = tape.constant(Tensor(2, 2, {1, 2, 3, 4}));
    Var eye = tape.constant(Tensor::identity(2));
    const Tensor& out = tape.value(tape.matmul(a, eye));
    CHECK(out.data == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("softmax of a constant row is uniform") {
    Tape tape;
    const Tensor& out = tape.value(tape.softmax_axis(tape.constant(Tensor(1, 3)), 1));
    for (double v : out.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sigmoid slope at zero is a quarter") {
    ParamStore store;
    Parameter& x = store.create("x", 1, 1);
    Tape tape;
    Var y = tape.sigmoid(tape.param(x));
    tape.backward(y);
    CHECK(x.grad.data[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one") {
    Rng rng(3);
    Tape tape;
    Var x = tape.constant(random_tensor(6, 9, rng, 3.0));
    const Tensor& y = tape.value(tape.softmax_axis(x, 1));
    for (std::size_t i = 0; i < y.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < y.cols; ++j) s += y.at(i, j);
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("saturating inputs stay finite") {
    Tape tape;
    Var big = tape.constant(Tensor(1, 2, {1000.0, -1000.0}));
    CHECK(tape.value(tape.sigmoid(big)).all_finite());
    CHECK(tape.value(tape.tanh(big)).all_finite());
    CHECK(tape.value(tape.softmax_axis(big, 1)).all_finite());
}

TEST_CASE("every primitive passes the finite-difference check") {
    Rng rng(42);
    ParamStore store;
    Parameter& a = store.create("a", 3, 4);
    Parameter& b = store.create("b", 4, 3);
    Parameter& c = store.create("c", 3, 4);
    Parameter& row = store.create("row", 1, 4);
    a.value = random_tensor(3, 4, rng, 0.7);
    b.value = random_tensor(4, 3, rng, 0.7);
    c.value = random_tensor(3, 4, rng, 0.7);
    row.value = random_tensor(1, 4, rng, 0.7);

    const auto pa = [&](Tape& t) { return t.param(a); };
    const auto pb = [&](Tape& t) { return t.param(b); };
    const auto pc = [&](Tape& t) { return t.param(c); };

    SUBCASE("matmul") {
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.sum_all(t.tanh(t.matmul(pa(t), pb(t))));
              }) < 1e-6);
    }
    SUBCASE("matmul_bt") {
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.sum_all(t.tanh(t.matmul_bt(pa(t), pc(t))));
              }) < 1e-6);
    }
    SUBCASE("add, sub, mul") {
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.sum_all(t.sigmoid(t.mul(t.add(pa(t), pc(t)), t.sub(pa(t), pc(t)))));
              }) < 1e-6);
    }
    SUBCASE("add_row and scale") {
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.sum_all(t.tanh(t.scale(t.add_row(pa(t), t.param(row)), 0.5)));
              }) < 1e-6);
    }
    SUBCASE("concat rows and cols") {
        CHECK(check_loss(store, [&](Tape& t) {
                  Var r = t.concat_rows({pa(t), pc(t)});
                  Var cc = t.concat_cols({r, t.scale(r, 2.0)});
                  return t.sum_all(t.sigmoid(cc));
              }) < 1e-6);
    }
    SUBCASE("slices") {
        CHECK(check_loss(store, [&](Tape& t) {
                  Var s = t.slice_rows(pa(t), 1, 3);
                  Var s2 = t.slice_cols(s, 0, 2);
                  return t.sum_all(t.exp(s2));
              }) < 1e-6);
    }
    SUBCASE("mean over both axes") {
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.add(t.sum_all(t.mean_axis(pa(t), 0)),
                               t.sum_all(t.mean_axis(pa(t), 1)));
              }) < 1e-6);
    }
    SUBCASE("softmax both axes") {
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.sum_all(t.mul(t.softmax_axis(pa(t), 1), t.softmax_axis(pc(t), 0)));
              }) < 1e-6);
    }
    SUBCASE("max over both axes") {
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.add(t.sum_all(t.max_axis(pa(t), 0)),
                               t.sum_all(t.max_axis(pa(t), 1)));
              }) < 1e-6);
    }
    SUBCASE("relu, exp, log, tanh, sigmoid chain") {
        CHECK(check_loss(store, [&](Tape& t) {
                  Var z = t.relu(pa(t));
                  Var safe = t.log(t.add(t.exp(t.scale(z, 0.1)), t.exp(t.scale(z, -0.1))));
                  return t.sum_all(t.mul(t.tanh(safe), t.sigmoid(pc(t))));
              }) < 1e-6);
    }
    SUBCASE("bce_mean") {
        Rng trng(7);
        Tensor targets(3, 4);
        for (auto& v : targets.data) v = trng.uniform() < 0.5 ? 0.0 : 1.0;
        CHECK(check_loss(store, [&](Tape& t) {
                  return t.bce_mean(t.sigmoid(pa(t)), targets);
              }) < 1e-6);
    }
}

TEST_CASE("embedding gathers rows and scatters gradients") {
    Rng rng(5);
    ParamStore store;
    Parameter& table = store.create("table", 5, 3);
    table.value = random_tensor(5, 3, rng, 0.5);

    Tape tape;
    Var e = tape.embedding(table, {1, 3, 1});
    const Tensor& v = tape.value(e);
    REQUIRE(v.rows == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(v.at(0, j) == table.value.at(1, j));
        CHECK(v.at(1, j) == table.value.at(3, j));
        CHECK(v.at(2, j) == table.value.at(1, j));
    }

    CHECK(check_loss(store, [&](Tape& t) {
              return t.sum_all(t.tanh(t.embedding(table, {1, 3, 1})));
          }) < 1e-6);

    CHECK_THROWS_AS(tape.embedding(table, {9}), ShapeError);
}

TEST_CASE("max routes gradient to the first index on ties") {
    ParamStore store;
    Parameter& x = store.create("x", 3, 2);
    x.value = Tensor(3, 2, {5, 1, 5, 2, 3, 2});  // col 0 ties rows 0/1; col 1 ties rows 1/2
    Tape tape;
    Var m = tape.max_axis(tape.param(x), 0);
    const auto& args = tape.argmax_of(m);
    CHECK(args[0] == 0);
    CHECK(args[1] == 1);
    tape.backward(tape.sum_all(m));
    CHECK(x.grad.data == std::vector<double>{1, 0, 0, 1, 0, 0});
}

TEST_CASE("max output is covariant with row permutation") {
    Rng rng(11);
    Tensor t = random_tensor(4, 5, rng);
    Tensor permuted(4, 5);
    const std::size_t perm[4] = {2, 0, 3, 1};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) permuted.at(perm[i], j) = t.at(i, j);
    Tape tape;
    const Tensor a = tape.value(tape.max_axis(tape.constant(t), 0));
    const Tensor b = tape.value(tape.max_axis(tape.constant(permuted), 0));
    CHECK(a.data == b.data);
}

TEST_CASE("dropout masks at train rate and backpropagates the mask") {
    ParamStore store;
    Parameter& x = store.create("x", 1, 1000);
    x.value.fill(1.0);
    Rng rng(9);
    Tape tape;
    Var y = tape.dropout(tape.param(x), 0.5, rng);
    const Tensor v = tape.value(y);  // copy: later pushes may relocate nodes
    int kept = 0;
    for (double d : v.data) {
        CHECK((d == 0.0 || d == 2.0));  // inverted dropout at rate 0.5
        if (d != 0.0) ++kept;
    }
    CHECK(kept > 400);
    CHECK(kept < 600);
    tape.backward(tape.sum_all(y));
    for (std::size_t i = 0; i < 1000; ++i) CHECK(x.grad.data[i] == v.data[i]);
    CHECK_THROWS_AS(tape.dropout(y, 1.0, rng), NumericError);
}

TEST_CASE("shape mismatches name the operation") {
    Tape tape;
    Var a = tape.constant(Tensor(2, 3));
    Var b = tape.constant(Tensor(2, 3));
    CHECK_THROWS_WITH_AS(tape.matmul(a, b), doctest::Contains("matmul"), ShapeError);
    CHECK_THROWS_AS(tape.add(a, tape.constant(Tensor(3, 2))), ShapeError);
    CHECK_THROWS_AS(tape.slice_rows(a, 1, 5), ShapeError);
    CHECK_THROWS_AS(tape.concat_cols({a, tape.constant(Tensor(1, 1))}), ShapeError);
}

TEST_CASE("grad_check workflow on sum(sigmoid(Wx))") {
    Rng rng(17);
    ParamStore store;
    Parameter& w = store.create("w", 4, 3);
    Parameter& x = store.create("x", 3, 2);
    w.value = random_tensor(4, 3, rng, 0.6);
    x.value = random_tensor(3, 2, rng, 0.6);
    auto f = [&](bool with_grad) {
        Tape tape;
        Var loss = tape.sum_all(tape.sigmoid(tape.matmul(tape.param(w), tape.param(x))));
        if (with_grad) tape.backward(loss);
        return tape.scalar(loss);
    };
    const auto report = grad_check(f, store, 1e-5);
    CHECK(report.max_rel_err < 1e-5);
    CHECK(report.n_checked == 18);
    CHECK(report.per_param.count("w") == 1);
}

TEST_CASE("grad is exactly zero for an unused parameter") {
    Rng rng(19);
    ParamStore store;
    Parameter& used = store.create("used", 2, 2);
    Parameter& unused = store.create("unused", 2, 2);
    used.value = random_tensor(2, 2, rng);
    unused.value = random_tensor(2, 2, rng);
    store.zero_grads();
    Tape tape;
    Var loss = tape.sum_all(tape.tanh(tape.param(used)));
    tape.backward(loss);
    for (double g : unused.grad.data) CHECK(g == 0.0);
    bool any = false;
    for (double g : used.grad.data) any |= g != 0.0;
    CHECK(any);
}

TEST_CASE("backward needs a scalar") {
    Tape tape;
    Var a = tape.constant(Tensor(2, 2));
    CHECK_THROWS_AS(tape.backward(a), ShapeError);
}

TEST_CASE("adamw: zero gradient with zero decay leaves parameters alone") {
    ParamStore store;
    Parameter& p = store.create("p", 2, 2);
    p.value = Tensor(2, 2, {1, 2, 3, 4});
    AdamW opt(store, {0.1, 0.0, 0.9, 0.999, 1e-8});
    store.zero_grads();
    opt.step();
    CHECK(p.value.data == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("adamw: first bias-corrected step moves by about lr") {
    ParamStore store;
    Parameter& p = store.create("theta", 1, 1);
    p.value.data[0] = 1.0;
    AdamW opt(store, {0.1, 0.0, 0.9, 0.999, 1e-8});
    p.grad.data[0] = 1.0;
    opt.step();
    CHECK(p.value.data[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("adamw: decay is decoupled from the moments") {
    ParamStore store;
    Parameter& p = store.create("theta", 1, 1);
    p.value.data[0] = 1.0;
    AdamW opt(store, {0.1, 0.1, 0.9, 0.999, 1e-8});
    store.zero_grads();  // gradient zero: only the decay path moves theta
    opt.step();
    CHECK(p.value.data[0] == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("adamw rejects a non-positive learning rate") {
    ParamStore store;
    store.create("p", 1, 1);
    CHECK_THROWS_AS(AdamW(store, {0.0, 0.0, 0.9, 0.999, 1e-8}), NumericError);
    CHECK_THROWS_AS(AdamW(store, {-1.0, 0.0, 0.9, 0.999, 1e-8}), NumericError);
}

TEST_CASE("default optimizer config matches the training recipe") {
    AdamWConfig cfg;
    CHECK(cfg.lr == doctest::Approx(1e-3));
    CHECK(cfg.weight_decay == doctest::Approx(1e-4));
}

TEST_CASE("gradient clipping rescales only above the threshold") {
    ParamStore store;
    Parameter& p = store.create("p", 1, 2);
    p.grad = Tensor(1, 2, {3.0, 4.0});  // norm 5
    clip_grad_norm(store, 10.0);
    CHECK(p.grad.data == std::vector<double>{3.0, 4.0});
    clip_grad_norm(store, 2.5);
    CHECK(global_grad_norm(store) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    Rng rng(23);
    ParamStore store;
    Parameter& a = store.create("alpha", 3, 4);
    Parameter& b = store.create("beta", 2, 2);
    a.value = random_tensor(3, 4, rng, 1e3);
    b.value = random_tensor(2, 2, rng, 1e-7);
    b.value.data[0] = 0.1 + 0.2;  // not exactly representable as text

    const std::string path = "/tmp/docre_test_ckpt.bin";
    save_checkpoint(path, "hidden=4\n", store);
    const Checkpoint ckpt = load_checkpoint(path);
    CHECK(ckpt.config_text == "hidden=4\n");
    REQUIRE(ckpt.tensors.size() == 2);
    CHECK(ckpt.tensors[0].first == "alpha");
    CHECK(std::memcmp(ckpt.tensors[0].second.data.data(), a.value.data.data(),
                      a.value.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(ckpt.tensors[1].second.data.data(), b.value.data.data(),
                      b.value.size() * sizeof(double)) == 0);

    ParamStore other;
    other.create("alpha", 3, 4);
    other.create("beta", 2, 2);
    restore_params(ckpt, other);
    CHECK(other.at("alpha").value.data == a.value.data);

    ParamStore wrong;
    wrong.create("alpha", 3, 4);
    CHECK_THROWS_AS(restore_params(ckpt, wrong), ValidationError);
    ParamStore wrong_shape;
    wrong_shape.create("alpha", 3, 4);
    wrong_shape.create("beta", 2, 3);
    CHECK_THROWS_AS(restore_params(ckpt, wrong_shape), ValidationError);
}

TEST_CASE("parameter names are unique and lookups work") {
    ParamStore store;
    store.create("x", 1, 1);
    CHECK_THROWS_AS(store.create("x", 2, 2), ValidationError);
    CHECK(store.find("y") == nullptr);
    CHECK_THROWS_AS(store.at("y"), ValidationError);
    CHECK(store.total_elements() == 1);
}
