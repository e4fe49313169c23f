#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "switchspace/autodiff.hpp"
#include "switchspace/params.hpp"
#include "switchspace/rng.hpp"

using namespace swx;

TEST_CASE("dot gradient: d/dx (x.x) = 2x") {
    Tape tape;
    Var x = tape.input({3.0, -1.5, 0.25}, true);
    Var y = tape.dot(x, x);
    CHECK(tape.scalar_value(y) == doctest::Approx(9.0 + 2.25 + 0.0625));
    tape.backward(y);
    const auto& g = tape.grad(x);
    CHECK(g[0] == doctest::Approx(6.0));
    CHECK(g[1] == doctest::Approx(-3.0));
    CHECK(g[2] == doctest::Approx(0.5));
}

TEST_CASE("softmax sums to one and its sum has zero gradient") {
    Tape tape;
    Var x = tape.input({0.3, -1.2, 2.0, 0.0}, true);
    Var s = tape.softmax_(x);
    Var total = tape.sum(s);
    CHECK(tape.scalar_value(total) == doctest::Approx(1.0).epsilon(1e-12));
    tape.backward(total);
    for (double g : tape.grad(x)) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("shared subexpressions accumulate: d/dx (x + x) = 2") {
    Tape tape;
    Var x = tape.input({1.5}, true);
    Var y = tape.add(x, x);
    tape.backward(y);
    CHECK(tape.grad(x)[0] == doctest::Approx(2.0));
}

TEST_CASE("backward may run once per tape") {
    Tape tape;
    Var x = tape.input({2.0}, true);
    Var y = tape.mul(x, x);
    tape.backward(y);
    CHECK_THROWS_AS(tape.backward(y), ContractViolation);
}

TEST_CASE("backward requires a scalar root") {
    Tape tape;
    Var x = tape.input({1.0, 2.0}, true);
    CHECK_THROWS_AS(tape.backward(x), ContractViolation);
}

TEST_CASE("finite-difference agreement on a composite expression") {
    // f(x, w) = log(1 + exp(w . tanh(x))) exercises matvec-free chains
    DiffFn f = [](Tape& t, const std::vector<Var>& in) {
        return t.softplus_(t.dot(in[0], t.tanh_(in[1])));
    };
    GradCheckResult r = grad_check(f, {{0.3, -0.8, 1.1}, {0.5, 0.25, -1.0}});
    CHECK(r.conclusive);
    CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("finite-difference agreement for structural ops") {
    DiffFn f = [](Tape& t, const std::vector<Var>& in) {
        Var m = t.interleave(t.even(in[0]), t.odd(in[0]));
        Var s = t.slice(t.concat({m, in[1]}), 1, 4);
        return t.norm(s);
    };
    GradCheckResult r = grad_check(f, {{0.4, -0.2, 0.9, 1.3}, {0.7, -0.6}});
    CHECK(r.conclusive);
    CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("finite-difference agreement for matmul") {
    DiffFn f = [](Tape& t, const std::vector<Var>& in) {
        return t.sum(t.matmul(in[0], 2, 3, in[1], 2));
    };
    GradCheckResult r = grad_check(f, {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6},
                                       {1.0, -1.0, 0.5, 0.25, -0.75, 2.0}});
    CHECK(r.conclusive);
    CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("randomized gradient checks across primitives") {
    Rng rng(7);
    auto sampler = [&rng] {
        std::vector<std::vector<double>> in(2, std::vector<double>(4));
        for (auto& v : in)
            for (double& x : v) x = rng.uniform(-0.9, 0.9);
        return in;
    };
    DiffFn f = [](Tape& t, const std::vector<Var>& in) {
        Var a = t.sin_(in[0]);
        Var b = t.cos_(in[1]);
        Var c = t.div(t.exp_(a), t.add_const(t.mul(b, b), 2.0));
        return t.add(t.sum(c), t.atan_(t.norm(in[1])));
    };
    GradCheckResult r = grad_check_random(f, sampler);
    CHECK(r.conclusive);
    CHECK(r.max_rel_err < 1e-4);
}

TEST_CASE("adam first step matches the closed form") {
    // With m=v=0, one bias-corrected step moves by lr * g / (|g| + eps).
    ParamStore store;
    store.add("p", {2}, {0.0, 1.0});
    GradMap grads{{"p", {1.0, -2.0}}};
    adam_step(store, grads, AdamConfig{.lr = 0.1});
    const Param& p = store.at("p");
    CHECK(p.value[0] == doctest::Approx(-0.0999999990).epsilon(1e-12));
    CHECK(p.value[1] == doctest::Approx(1.0999999995).epsilon(1e-12));
    CHECK(p.step == 1);
}

TEST_CASE("adam converges on a quadratic") {
    ParamStore store;
    store.add("p", {1}, {5.0});
    AdamConfig cfg{.lr = 0.05};
    for (int i = 0; i < 2000; ++i) {
        double x = store.at("p").value[0];
        adam_step(store, GradMap{{"p", {2.0 * (x - 3.0)}}}, cfg);
    }
    CHECK(store.at("p").value[0] == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("forward_backward returns zeros for unreachable parameters") {
    Tape tape;
    Var a = tape.input({1.0, 2.0}, true);
    Var b = tape.input({3.0}, true);
    Var loss = tape.dot(a, a);
    GradMap g = forward_backward(loss, {{"a", a}, {"b", b}});
    CHECK(g.at("a")[0] == doctest::Approx(2.0));
    CHECK(g.at("b") == std::vector<double>{0.0});
}

TEST_CASE("checkpoint round trip preserves values, optimizer state, and metadata") {
    ParamStore store;
    store.add("w", {2, 2}, {1.0, -2.0, 0.5, 3.25});
    store.add("b", {2}, {0.0, 1e-8});
    store.meta()["task"] = "kg";
    store.meta()["signature"] = "P4,E4";
    adam_step(store, GradMap{{"w", {1.0, 1.0, 1.0, 1.0}}, {"b", {0.5, -0.5}}},
              AdamConfig{});

    std::string path = "paramstore_roundtrip.ckpt";
    store.save(path);
    ParamStore loaded = ParamStore::load(path);

    CHECK(loaded.meta() == store.meta());
    for (const std::string& name : store.names()) {
        const Param& a = store.at(name);
        const Param& b = loaded.at(name);
        CHECK(a.shape == b.shape);
        CHECK(a.value == b.value);  // bit-exact
        CHECK(a.m == b.m);
        CHECK(a.v == b.v);
        CHECK(a.step == b.step);
    }
    std::remove(path.c_str());
}

TEST_CASE("numeric failures are detected when finite checking is on") {
    Tape tape(/*check_finite=*/true);
    Var x = tape.input({0.0}, true);
    CHECK_THROWS_AS(tape.log_(x), NumericFailure);
}
