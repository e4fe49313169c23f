#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "switchspace/train.hpp"

using namespace swx;

namespace {

// Small star-shaped KG: hub -> spokes under r0, spokes -> hub under r1.
// Validation and test memorize training edges, so a model that fits the
// training set ranks well.
TripleStore star_kg(int n_spokes) {
    TripleStore s;
    auto entity = [&](const std::string& name) {
        auto [it, fresh] = s.entity_ids.emplace(name, static_cast<int>(s.entity_names.size()));
        if (fresh) s.entity_names.push_back(name);
        return it->second;
    };
    auto relation = [&](const std::string& name) {
        auto [it, fresh] =
            s.relation_ids.emplace(name, static_cast<int>(s.relation_names.size()));
        if (fresh) s.relation_names.push_back(name);
        return it->second;
    };
    int hub = entity("hub");
    int r0 = relation("r0"), r1 = relation("r1");
    for (int i = 0; i < n_spokes; ++i) {
        int e = entity("spoke" + std::to_string(i));
        s.train.push_back({hub, r0, e});
        s.train.push_back({e, r1, hub});
    }
    s.valid = {s.train.begin(), s.train.begin() + 4};
    s.test = {s.train.begin() + 4, s.train.begin() + 8};
    for (const auto& [h, r, t] : s.train) s.true_keys.insert(s.key(h, r, t));
    return s;
}

InteractionStore block_interactions(int n_users, int n_items) {
    // users in the first half like the first half of the items, and so on
    std::vector<RawEvent> events;
    for (int u = 0; u < n_users; ++u)
        for (int i = 0; i < n_items; ++i)
            if ((u < n_users / 2) == (i < n_items / 2))
                events.push_back({"u" + std::to_string(u), "i" + std::to_string(i)});
    Rng rng(9);
    return split_interactions(events, 0.7, 0.1, 0.2, rng);
}

}  // namespace

TEST_CASE("config files parse and reject unknown keys") {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / "swx_run.cfg";
    {
        std::ofstream out(p);
        out << "# comment\n"
               "task = kg\n"
               "signature = P8,E8\n"
               "k = 1\n"
               "lr = 0.01\n"
               "weight_by_gate = false\n"
               "seed = 7\n";
    }
    RunConfig cfg = load_run_config(p.string());
    CHECK(cfg.task == "kg");
    CHECK(cfg.signature == "P8,E8");
    CHECK(cfg.k == 1);
    CHECK(cfg.lr == doctest::Approx(0.01));
    CHECK_FALSE(cfg.weight_by_gate);
    CHECK(cfg.seed == 7);
    fs::remove(p);

    RunConfig c2;
    CHECK_THROWS_AS(apply_config_kv(c2, "learning_rate", "0.1"), ContractViolation);
    CHECK_THROWS_AS(apply_config_kv(c2, "k", "two"), ContractViolation);
    CHECK_THROWS_AS(apply_config_kv(c2, "verbose", "maybe"), ContractViolation);
    apply_config_kv(c2, "epochs", "25");
    CHECK(c2.epochs == 25);
}

TEST_CASE("defaults depend on the task") {
    RunConfig cfg;
    cfg.task = "kg";
    CHECK(default_batch_size(cfg) == 512);
    cfg.task = "rec";
    CHECK(default_batch_size(cfg) == 1024);
    cfg.batch_size = 33;
    CHECK(default_batch_size(cfg) == 33);
    CHECK(default_gate_variant("kg") == GateVariant::MatrixConv2d);
    CHECK(default_gate_variant("rec") == GateVariant::FlatLinear);
}

TEST_CASE("kg training improves validation MRR on a memorizable graph") {
    TripleStore data = star_kg(8);
    KGModelConfig mc;
    mc.sig = parse_signature("P8,E8");
    mc.K = 1;
    mc.gate_variant = GateVariant::FlatLinear;
    KGModel model(mc, data.n_entities(), data.n_relations());
    Rng init(3);
    model.init_params(init);
    double before = eval_kg(model, data, Split::Valid).mrr;

    RunConfig cfg;
    cfg.task = "kg";
    cfg.lr = 0.05;
    cfg.epochs = 25;
    cfg.batch_size = 64;
    cfg.n_neg = 4;
    cfg.patience = 25;
    cfg.seed = 3;
    cfg.verbose = false;
    TrainResult res = train_kg(model, data, cfg);

    CHECK(res.epochs_run >= 1);
    CHECK(std::isfinite(res.final_train_loss));
    CHECK(res.best_valid > before);
    CHECK(res.best_valid > 0.5);
    CHECK(eval_kg(model, data, Split::Valid).mrr == doctest::Approx(res.best_valid));
}

TEST_CASE("kg training is bit-identical under a fixed seed") {
    TripleStore data = star_kg(5);
    auto run = [&] {
        KGModelConfig mc;
        mc.sig = parse_signature("P4,E4");
        mc.K = 1;
        mc.gate_variant = GateVariant::FlatLinear;
        KGModel model(mc, data.n_entities(), data.n_relations());
        Rng init(11);
        model.init_params(init);
        RunConfig cfg;
        cfg.task = "kg";
        cfg.epochs = 3;
        cfg.batch_size = 32;
        cfg.n_neg = 3;
        cfg.seed = 11;
        cfg.verbose = false;
        train_kg(model, data, cfg);
        return model;
    };
    KGModel a = run(), b = run();
    for (const std::string& name : a.params().names())
        CHECK(a.params().at(name).value == b.params().at(name).value);  // bit-exact
}

TEST_CASE("rec training improves validation MAP on block-structured data") {
    InteractionStore data = block_interactions(12, 20);  // 10 items per user: 7/1/2 split
    RecModelConfig mc;
    mc.sig = parse_signature("P4,E4");
    mc.K = 1;
    mc.gate_variant = GateVariant::FlatLinear;
    RecModel model(mc, data.n_users(), data.n_items());
    Rng init(5);
    model.init_params(init);
    double before = eval_rec(model, data, Split::Valid).map;

    RunConfig cfg;
    cfg.task = "rec";
    cfg.lr = 0.05;
    cfg.epochs = 20;
    cfg.batch_size = 128;
    cfg.patience = 20;
    cfg.seed = 5;
    cfg.reg = 1e-4;
    cfg.verbose = false;
    TrainResult res = train_rec(model, data, cfg);

    CHECK(std::isfinite(res.final_train_loss));
    CHECK(res.best_valid >= before);
    CHECK(res.best_valid > 0.3);
}
