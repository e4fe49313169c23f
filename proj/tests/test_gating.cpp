#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "switchspace/gating.hpp"
#include "switchspace/product.hpp"

using namespace swx;

namespace {

ParamMap<EagerBackend> eager_view(const ParamStore& store) {
    ParamMap<EagerBackend> P;
    for (const auto& [name, p] : store) P[name] = p.value;
    return P;
}

}  // namespace

TEST_CASE("gate variant names round trip") {
    for (GateVariant v :
         {GateVariant::FlatLinear, GateVariant::FlatConv1d, GateVariant::MatrixConv2d})
        CHECK(parse_gate_variant(format_gate_variant(v)) == v);
    CHECK_THROWS_AS(parse_gate_variant("dense"), std::invalid_argument);
}

TEST_CASE("feature lengths per variant") {
    GateConfig cfg;
    cfg.n_spaces = 3;
    cfg.input_len = 20;
    cfg.variant = GateVariant::FlatLinear;
    CHECK(cfg.feature_len() == 20);
    cfg.variant = GateVariant::FlatConv1d;  // positions: (20-5)/3+1 = 6
    CHECK(cfg.conv_positions_1d() == 6);
    CHECK(cfg.feature_len() == 4 * 6);
    cfg.variant = GateVariant::MatrixConv2d;
    cfg.rows = 4;
    cfg.cols = 5;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);  // rows < kernel
    cfg.rows = 5;
    cfg.cols = 4;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);  // cols < kernel
    cfg.rows = 8;
    cfg.cols = 11;
    cfg.input_len = 88;  // conv grid: rows (8-5)/3+1 = 2, cols (11-5)/3+1 = 3
    CHECK(cfg.conv_rows() == 2);
    CHECK(cfg.conv_cols() == 3);
    CHECK(cfg.feature_len() == 4 * 2 * 3);
    cfg.validate();
}

TEST_CASE("top-k picks the largest logits and softmaxes over them") {
    // bias-only linear gate: zero weights, biases = desired logits
    GateConfig cfg;
    cfg.variant = GateVariant::FlatLinear;
    cfg.n_spaces = 4;
    cfg.input_len = 2;
    ParamStore store;
    Rng rng(3);
    init_gate_params(store, "gate", cfg, rng);
    store.at("gate.f1.lin.w").value.assign(8, 0.0);
    store.at("gate.f1.lin.b").value = {3.0, 0.5, 2.0, -1.0};

    EagerBackend bk;
    ParamMap<EagerBackend> P = eager_view(store);
    GateResult<EagerBackend> r =
        noisy_topk_gates(bk, P, "gate", cfg, {0.0, 0.0}, 2, /*training=*/false, nullptr);

    CHECK(r.dec.active == std::vector<int>{0, 2});
    // softmax over logits {3, 2}: (e/(e+1), 1/(e+1))
    double g0 = std::exp(1.0) / (std::exp(1.0) + 1.0);
    CHECK(r.dec.gates[0] == doctest::Approx(g0).epsilon(1e-12));
    CHECK(r.dec.gates[2] == doctest::Approx(1.0 - g0).epsilon(1e-12));
    CHECK(r.dec.gates[1] == 0.0);
    CHECK(r.dec.gates[3] == 0.0);
    double total = 0.0;
    for (double g : r.dec.gates) total += g;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ties at the k-th logit break toward the lowest index") {
    GateConfig cfg;
    cfg.variant = GateVariant::FlatLinear;
    cfg.n_spaces = 3;
    cfg.input_len = 1;
    ParamStore store;
    Rng rng(4);
    init_gate_params(store, "gate", cfg, rng);
    store.at("gate.f1.lin.w").value.assign(3, 0.0);
    store.at("gate.f1.lin.b").value = {1.0, 1.0, 1.0};

    EagerBackend bk;
    ParamMap<EagerBackend> P = eager_view(store);
    GateResult<EagerBackend> r =
        noisy_topk_gates(bk, P, "gate", cfg, {0.0}, 2, false, nullptr);
    CHECK(r.dec.active == std::vector<int>{0, 1});
    CHECK(r.dec.gates[0] == doctest::Approx(0.5));
    CHECK(r.dec.gates[1] == doctest::Approx(0.5));
}

TEST_CASE("K is validated") {
    GateConfig cfg;
    cfg.variant = GateVariant::FlatLinear;
    cfg.n_spaces = 3;
    cfg.input_len = 1;
    ParamStore store;
    Rng rng(5);
    init_gate_params(store, "gate", cfg, rng);
    EagerBackend bk;
    ParamMap<EagerBackend> P = eager_view(store);
    CHECK_THROWS_AS(noisy_topk_gates(bk, P, "gate", cfg, {0.3}, 0, false, nullptr),
                    ContractViolation);
    CHECK_THROWS_AS(noisy_topk_gates(bk, P, "gate", cfg, {0.3}, 4, false, nullptr),
                    ContractViolation);
    CHECK_THROWS_AS(noisy_topk_gates(bk, P, "gate", cfg, {0.3}, 2, true, nullptr),
                    ContractViolation);  // training noise needs an rng
}

TEST_CASE("training noise is reproducible and absent at evaluation") {
    GateConfig cfg;
    cfg.variant = GateVariant::FlatLinear;
    cfg.n_spaces = 4;
    cfg.input_len = 3;
    ParamStore store;
    Rng init(6);
    init_gate_params(store, "gate", cfg, init);
    EagerBackend bk;
    ParamMap<EagerBackend> P = eager_view(store);
    std::vector<double> x = {0.4, -0.7, 0.9};

    Rng r1(99), r2(99);
    auto a = noisy_topk_gates(bk, P, "gate", cfg, x, 2, true, &r1);
    auto b = noisy_topk_gates(bk, P, "gate", cfg, x, 2, true, &r2);
    CHECK(a.dec.noisy_logits == b.dec.noisy_logits);
    CHECK(a.dec.active == b.dec.active);

    auto c = noisy_topk_gates(bk, P, "gate", cfg, x, 2, false, nullptr);
    CHECK(c.dec.noisy_logits == c.dec.clean_logits);
}

TEST_CASE("conv gate heads run and differentiate") {
    for (GateVariant v : {GateVariant::FlatConv1d, GateVariant::MatrixConv2d}) {
        CAPTURE(format_gate_variant(v));
        GateConfig cfg;
        cfg.variant = v;
        cfg.n_spaces = 3;
        if (v == GateVariant::MatrixConv2d) {
            cfg.rows = 6;
            cfg.cols = 8;
            cfg.input_len = 48;
        } else {
            cfg.input_len = 48;
        }
        ParamStore store;
        Rng rng(8);
        init_gate_params(store, "gate", cfg, rng);
        // non-trivial weights so gradients are not identically zero
        for (auto& [name, p] : store)
            for (std::size_t i = 0; i < p.value.size(); ++i)
                p.value[i] = 0.05 * std::sin(0.7 * static_cast<double>(i + 1));

        std::vector<double> x(48);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = 0.3 * std::cos(0.31 * static_cast<double>(i));

        // eager and taped evaluation agree
        EagerBackend ebk;
        ParamMap<EagerBackend> EP = eager_view(store);
        auto eager = noisy_topk_gates(ebk, EP, "gate", cfg, x, 2, false, nullptr);

        Tape tape;
        TapeBackend tbk(tape);
        std::map<std::string, Var> TP = bind_params(tape, store);
        auto taped = noisy_topk_gates(tbk, TP, "gate", cfg, tape.constant_vec(x), 2, false,
                                      nullptr);
        CHECK(taped.dec.active == eager.dec.active);
        for (int i = 0; i < cfg.n_spaces; ++i)
            CHECK(taped.dec.gates[static_cast<std::size_t>(i)] ==
                  doctest::Approx(eager.dec.gates[static_cast<std::size_t>(i)])
                      .epsilon(1e-12));

        // gradient of the max gate w.r.t. the input matches finite differences
        DiffFn f = [&](Tape& t, const std::vector<Var>& in) {
            TapeBackend bk(t);
            std::map<std::string, Var> P = bind_params(t, store);
            auto r = noisy_topk_gates(bk, P, "gate", cfg, in[0], 2, false, nullptr);
            return t.slice(r.active_gates, 0, 1);
        };
        GradCheckResult gr = grad_check(f, {x});
        CHECK(gr.conclusive);
        CHECK(gr.max_rel_err < 1e-5);
    }
}

TEST_CASE("importance loss is the squared coefficient of variation") {
    // Two single-example decisions, both routed entirely to space 0 of 2:
    // importance = (2, 0), mean 1, population variance 1, CV^2 = 1.
    EagerBackend bk;
    GateResult<EagerBackend> r;
    r.dec.active = {0};
    r.dec.gates = {1.0, 0.0};
    r.active_gates = {1.0};
    std::vector<GateResult<EagerBackend>> batch = {r, r};
    CHECK(importance_loss(bk, std::span<const GateResult<EagerBackend>>(batch), 2, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // Perfectly balanced batch: CV^2 = 0.
    GateResult<EagerBackend> b0 = r, b1;
    b1.dec.active = {1};
    b1.dec.gates = {0.0, 1.0};
    b1.active_gates = {1.0};
    std::vector<GateResult<EagerBackend>> balanced = {b0, b1};
    CHECK(importance_loss(bk, std::span<const GateResult<EagerBackend>>(balanced), 2, 1.0) ==
          doctest::Approx(0.0).epsilon(1e-12));
    // the weight scales the loss
    CHECK(importance_loss(bk, std::span<const GateResult<EagerBackend>>(batch), 2, 0.01) ==
          doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("switch score against hand values") {
    std::vector<double> scores = {1.0, 2.0}, gates = {0.7, 0.3};
    // log(0.7 e^1 + 0.3 e^2)
    CHECK(switch_score(scores, gates, ScoreMode::Lse) ==
          doctest::Approx(std::log(0.7 * std::exp(1.0) + 0.3 * std::exp(2.0))).epsilon(1e-12));
    CHECK(switch_score(scores, gates, ScoreMode::Lse) == doctest::Approx(1.4157352218).epsilon(1e-9));
    // unweighted: log(e^1 + e^2)
    CHECK(switch_score(scores, gates, ScoreMode::Lse, false) ==
          doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0))).epsilon(1e-12));
    // zero-gated entries are skipped entirely
    std::vector<double> s3 = {1.0, 1e9, 2.0}, g3 = {0.7, 0.0, 0.3};
    CHECK(switch_score(s3, g3, ScoreMode::Lse) ==
          doctest::Approx(switch_score(scores, gates, ScoreMode::Lse)).epsilon(1e-12));
    std::vector<double> zero_gates = {0.0, 0.0};
    CHECK_THROWS_AS(switch_score(scores, zero_gates, ScoreMode::Lse), ContractViolation);
    // extreme scores stay finite (max-shifted)
    std::vector<double> huge = {1000.0, 999.0};
    CHECK(std::isfinite(switch_score(huge, gates, ScoreMode::Lse)));
}

TEST_CASE("sum mode recovers the product-space decomposition") {
    Signature sig = parse_signature("P2,E2,D2");
    std::vector<double> x = {0.1, -0.2, 1.0, 0.5, 0.3, 0.1};
    std::vector<double> y = {-0.3, 0.25, 0.0, -1.0, -0.2, 0.4};
    ProductPoint px = split(x, sig), py = split(y, sig);
    std::vector<double> scores(3), gates(3, 1.0 / 3.0);
    for (int i = 0; i < 3; ++i) {
        double d = dist(px.components[static_cast<std::size_t>(i)],
                        py.components[static_cast<std::size_t>(i)],
                        sig.components[static_cast<std::size_t>(i)].curvature);
        scores[static_cast<std::size_t>(i)] = -d * d;
    }
    CHECK(switch_score(scores, gates, ScoreMode::Sum) ==
          doctest::Approx(-product_sq_dist(px, py, sig)).epsilon(1e-12));
}

TEST_CASE("switch_score_active matches the dense-vector function") {
    EagerBackend bk;
    std::vector<double> scores = {0.4, -1.2, 2.2}, gates = {0.2, 0.5, 0.3};
    CHECK(switch_score_active(bk, scores, gates, true) ==
          doctest::Approx(switch_score(scores, gates, ScoreMode::Lse, true)).epsilon(1e-12));
    CHECK(switch_score_active(bk, scores, gates, false) ==
          doctest::Approx(switch_score(scores, gates, ScoreMode::Lse, false)).epsilon(1e-12));
}
