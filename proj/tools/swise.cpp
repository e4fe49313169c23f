// Command-line front end: train / eval / time-sweep for switch-space models.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "switchspace/bench.hpp"
#include "switchspace/train.hpp"

using nlohmann::json;
using namespace swx;

namespace {

std::string meta_get(const ParamStore& store, const std::string& key) {
    auto it = store.meta().find(key);
    if (it == store.meta().end())
        throw std::runtime_error("checkpoint is missing metadata key '" + key + "'");
    return it->second;
}

KGModel load_kg_model(ParamStore store) {
    KGModelConfig cfg;
    cfg.sig = parse_signature(meta_get(store, "signature"));
    cfg.K = std::stoi(meta_get(store, "k"));
    cfg.gate_variant = parse_gate_variant(meta_get(store, "gate_variant"));
    cfg.weight_by_gate = meta_get(store, "weight_by_gate") == "1";
    cfg.trainable_curvature = meta_get(store, "trainable_curvature") == "1";
    KGModel model(cfg, std::stoi(meta_get(store, "n_entities")),
                  std::stoi(meta_get(store, "n_base_relations")));
    model.params() = std::move(store);
    model.check_shapes();
    return model;
}

RecModel load_rec_model(ParamStore store) {
    RecModelConfig cfg;
    cfg.sig = parse_signature(meta_get(store, "signature"));
    cfg.K = std::stoi(meta_get(store, "k"));
    cfg.gate_variant = parse_gate_variant(meta_get(store, "gate_variant"));
    cfg.weight_by_gate = meta_get(store, "weight_by_gate") == "1";
    if (auto it = store.meta().find("sum_all"); it != store.meta().end())
        cfg.sum_all = it->second == "1";
    RecModel model(cfg, std::stoi(meta_get(store, "n_users")),
                   std::stoi(meta_get(store, "n_items")));
    model.params() = std::move(store);
    model.check_shapes();
    return model;
}

json to_json(const KGMetrics& m) {
    return {{"mrr", m.mrr}, {"hr1", m.hr1}, {"hr3", m.hr3}, {"hr10", m.hr10},
            {"n_ranks", m.n_ranks}};
}

json to_json(const RecMetrics& m) {
    return {{"map", m.map}, {"p5", m.p5}, {"p10", m.p10}, {"r5", m.r5}, {"r10", m.r10},
            {"n_users", m.n_users}};
}

void emit(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write metrics file: " + path);
        out << j.dump(2) << "\n";
    }
}

std::string active_key(const std::vector<int>& active) {
    std::string key;
    for (std::size_t i = 0; i < active.size(); ++i)
        key += (i ? "|" : "") + std::to_string(active[i]);
    return key;
}

// Gate decisions over the test split: one JSONL record per query plus a CSV
// histogram of active component sets.
void log_gates_kg(const KGModel& model, const TripleStore& data, const std::string& prefix) {
    std::ofstream jsonl(prefix + ".jsonl"), csv(prefix + ".csv");
    if (!jsonl || !csv) throw std::runtime_error("cannot write gate logs at prefix " + prefix);
    ParamMap<EagerBackend> P = model.eager_params();
    EagerBackend bk;
    std::map<std::string, long> hist;
    auto record = [&](int h, int r, bool reciprocal) {
        auto qc = model.query(bk, P, h, r, /*training=*/false, nullptr);
        json rec = {{"h", h}, {"r", reciprocal ? r - data.n_relations() : r},
                    {"reciprocal", reciprocal}, {"active", qc.gate.dec.active},
                    {"gates", qc.gate.dec.gates}};
        jsonl << rec.dump() << "\n";
        ++hist[active_key(qc.gate.dec.active)];
    };
    for (const auto& [h, r, t] : data.test) {
        record(h, r, false);
        record(t, r + data.n_relations(), true);
    }
    csv << "active_set,count\n";
    for (const auto& [key, count] : hist) csv << key << "," << count << "\n";
}

void log_gates_rec(const RecModel& model, const InteractionStore& data,
                   const std::string& prefix) {
    std::ofstream jsonl(prefix + ".jsonl"), csv(prefix + ".csv");
    if (!jsonl || !csv) throw std::runtime_error("cannot write gate logs at prefix " + prefix);
    ParamMap<EagerBackend> P = model.eager_params();
    EagerBackend bk;
    std::map<std::string, long> hist;
    for (int u = 0; u < data.n_users(); ++u)
        for (int i : data.test[static_cast<std::size_t>(u)]) {
            auto pr = model.switch_score(bk, P, u, i, /*training=*/false, nullptr);
            json rec = {{"user", u}, {"item", i}, {"active", pr.gate.dec.active},
                        {"gates", pr.gate.dec.gates}};
            jsonl << rec.dump() << "\n";
            ++hist[active_key(pr.gate.dec.active)];
        }
    csv << "active_set,count\n";
    for (const auto& [key, count] : hist) csv << key << "," << count << "\n";
}

int cmd_train(const RunConfig& cfg, const std::string& metrics_path) {
    if (cfg.task != "kg" && cfg.task != "rec")
        throw ContractViolation("--task must be 'kg' or 'rec'");
    if (cfg.data.empty()) throw ContractViolation("--data is required for training");

    json out = {{"task", cfg.task}, {"signature", cfg.signature}, {"k", cfg.k},
                {"seed", cfg.seed}};
    Rng init_rng(cfg.seed);

    if (cfg.task == "kg") {
        TripleStore data = load_kg(cfg.data);
        KGModelConfig mc;
        mc.sig = parse_signature(cfg.signature);
        mc.K = cfg.k;
        mc.gate_variant = cfg.gate_variant.empty() ? default_gate_variant(cfg.task)
                                                   : parse_gate_variant(cfg.gate_variant);
        mc.w_aux = cfg.w_aux;
        mc.weight_by_gate = cfg.weight_by_gate;
        mc.trainable_curvature = cfg.trainable_curvature;
        KGModel model(mc, data.n_entities(), data.n_relations());
        model.init_params(init_rng);

        TrainResult res = train_kg(model, data, cfg);
        out["best_epoch"] = res.best_epoch;
        out["epochs_run"] = res.epochs_run;
        out["valid"] = to_json(eval_kg(model, data, Split::Valid));
        out["test"] = to_json(eval_kg(model, data, Split::Test));
        if (!cfg.out.empty()) model.params().save(cfg.out);
    } else {
        Rng split_rng(cfg.seed ^ 0x73706c6974ULL);
        InteractionStore data = load_movielens(cfg.data, split_rng);
        RecModelConfig mc;
        mc.sig = parse_signature(cfg.signature);
        mc.K = cfg.k;
        mc.gate_variant = cfg.gate_variant.empty() ? default_gate_variant(cfg.task)
                                                   : parse_gate_variant(cfg.gate_variant);
        mc.margin = cfg.margin;
        mc.w_aux = cfg.w_aux;
        mc.reg = cfg.reg;
        mc.weight_by_gate = cfg.weight_by_gate;
        RecModel model(mc, data.n_users(), data.n_items());
        model.init_params(init_rng);

        TrainResult res = train_rec(model, data, cfg);
        out["best_epoch"] = res.best_epoch;
        out["epochs_run"] = res.epochs_run;
        out["valid"] = to_json(eval_rec(model, data, Split::Valid));
        out["test"] = to_json(eval_rec(model, data, Split::Test));
        if (!cfg.out.empty()) model.params().save(cfg.out);
    }
    emit(out, metrics_path);
    return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data_path, const std::string& split_s,
             std::uint64_t seed, const std::string& gate_prefix,
             const std::string& metrics_path) {
    Split split = split_s == "valid" ? Split::Valid : Split::Test;
    if (split_s != "valid" && split_s != "test")
        throw ContractViolation("--split must be 'valid' or 'test'");

    ParamStore store = ParamStore::load(ckpt);
    std::string task = meta_get(store, "task");
    json out = {{"task", task}, {"split", split_s}, {"checkpoint", ckpt}};

    if (task == "kg") {
        KGModel model = load_kg_model(std::move(store));
        TripleStore data = load_kg(data_path);
        if (data.n_entities() != model.n_entities() ||
            data.n_relations() != model.n_base_relations())
            throw std::runtime_error("checkpoint was trained on a different dataset: " +
                                     std::to_string(model.n_entities()) + " entities / " +
                                     std::to_string(model.n_base_relations()) + " relations " +
                                     "expected");
        out["metrics"] = to_json(eval_kg(model, data, split));
        if (!gate_prefix.empty()) log_gates_kg(model, data, gate_prefix);
    } else if (task == "rec") {
        RecModel model = load_rec_model(std::move(store));
        Rng split_rng(seed ^ 0x73706c6974ULL);
        InteractionStore data = load_movielens(data_path, split_rng);
        if (data.n_users() != model.n_users() || data.n_items() != model.n_items())
            throw std::runtime_error("checkpoint was trained on a different dataset: " +
                                     std::to_string(model.n_users()) + " users / " +
                                     std::to_string(model.n_items()) + " items expected");
        out["metrics"] = to_json(eval_rec(model, data, split));
        if (!gate_prefix.empty()) log_gates_rec(model, data, gate_prefix);
    } else {
        throw std::runtime_error("checkpoint has unknown task '" + task + "'");
    }
    emit(out, metrics_path);
    return 0;
}

int cmd_time_sweep(const std::vector<int>& ns, int k, int dim, int entities, int queries,
                   std::uint64_t seed, const std::string& metrics_path) {
    json points = json::array();
    for (int n : ns) {
        SweepPoint pt = time_kg_scoring(n, k, dim, entities, queries, seed);
        points.push_back({{"n_spaces", pt.n_spaces},
                          {"sec_per_candidate", pt.sec_per_candidate},
                          {"dist_evals", pt.dist_evals}});
        std::cerr << "N=" << n << "  " << pt.sec_per_candidate * 1e9 << " ns/candidate\n";
    }
    emit({{"k", k}, {"dim", dim}, {"entities", entities}, {"queries", queries},
          {"points", points}},
         metrics_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"switch-space representation learning (product manifolds with sparse gating)"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path, metrics_path;

    CLI::App* train = app.add_subcommand("train", "train a model and report metrics");
    train->add_option("--config", config_path, "key = value config file");
    train->add_option("--task", cfg.task, "kg | rec");
    train->add_option("--data", cfg.data, "dataset directory or ratings file");
    train->add_option("--out", cfg.out, "checkpoint output path");
    train->add_option("--signature", cfg.signature, "e.g. P32,D32,E32 or P10@-0.5");
    train->add_option("--k", cfg.k, "active components per example");
    train->add_option("--gate-variant", cfg.gate_variant,
                      "flat-linear | flat-conv1d | matrix-conv2d");
    train->add_option("--lr", cfg.lr, "Adam learning rate");
    train->add_option("--epochs", cfg.epochs, "maximum epochs");
    train->add_option("--batch-size", cfg.batch_size, "0 = task default");
    train->add_option("--n-neg", cfg.n_neg, "negatives per positive (kg)");
    train->add_option("--margin", cfg.margin, "hinge margin (rec)");
    train->add_option("--reg", cfg.reg, "L2 regularization (rec)");
    train->add_option("--w-aux", cfg.w_aux, "load-balancing loss weight");
    train->add_option("--patience", cfg.patience, "early-stopping patience");
    train->add_option("--seed", cfg.seed, "rng seed");
    train->add_option("--eval-every", cfg.eval_every, "validate every n epochs");
    train->add_flag("!--no-gate-weights", cfg.weight_by_gate,
                    "combine scores without gate weighting");
    train->add_flag("!--fixed-curvature", cfg.trainable_curvature,
                    "freeze curvatures at their signature values (kg)");
    train->add_flag("!--quiet", cfg.verbose, "suppress progress logging");
    train->add_option("--metrics-out", metrics_path, "write metrics JSON here, not stdout");

    std::string ckpt, data_path, split_s = "test", gate_prefix;
    std::uint64_t eval_seed = 42;
    CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    ev->add_option("--checkpoint", ckpt, "checkpoint path")->required();
    ev->add_option("--data", data_path, "dataset directory or ratings file")->required();
    ev->add_option("--split", split_s, "valid | test");
    ev->add_option("--seed", eval_seed, "split seed (rec; must match training)");
    ev->add_option("--log-gates", gate_prefix,
                   "write <prefix>.jsonl gate decisions and <prefix>.csv histogram");
    ev->add_option("--metrics-out", metrics_path, "write metrics JSON here, not stdout");

    std::vector<int> sweep_ns = {5, 10, 20};
    int sweep_k = 2, sweep_dim = 6, sweep_entities = 2000, sweep_queries = 10;
    std::uint64_t sweep_seed = 1;
    CLI::App* sweep = app.add_subcommand(
        "time-sweep", "per-candidate inference cost as the number of spaces grows");
    sweep->add_option("--n", sweep_ns, "space counts to time");
    sweep->add_option("--k", sweep_k, "active components");
    sweep->add_option("--dim", sweep_dim, "dimension per component (even)");
    sweep->add_option("--entities", sweep_entities, "candidate entities");
    sweep->add_option("--queries", sweep_queries, "queries per measurement");
    sweep->add_option("--seed", sweep_seed, "rng seed");
    sweep->add_option("--metrics-out", metrics_path, "write timings JSON here, not stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            if (!config_path.empty()) {
                // start from the file, then let parsed flags win
                RunConfig merged = load_run_config(config_path);
                auto keep = [&](auto& dst, const auto& src, const char* flag) {
                    if (train->count(flag) > 0) dst = src;
                };
                keep(merged.task, cfg.task, "--task");
                keep(merged.data, cfg.data, "--data");
                keep(merged.out, cfg.out, "--out");
                keep(merged.signature, cfg.signature, "--signature");
                keep(merged.k, cfg.k, "--k");
                keep(merged.gate_variant, cfg.gate_variant, "--gate-variant");
                keep(merged.lr, cfg.lr, "--lr");
                keep(merged.epochs, cfg.epochs, "--epochs");
                keep(merged.batch_size, cfg.batch_size, "--batch-size");
                keep(merged.n_neg, cfg.n_neg, "--n-neg");
                keep(merged.margin, cfg.margin, "--margin");
                keep(merged.reg, cfg.reg, "--reg");
                keep(merged.w_aux, cfg.w_aux, "--w-aux");
                keep(merged.patience, cfg.patience, "--patience");
                keep(merged.seed, cfg.seed, "--seed");
                keep(merged.eval_every, cfg.eval_every, "--eval-every");
                keep(merged.weight_by_gate, cfg.weight_by_gate, "--no-gate-weights");
                keep(merged.trainable_curvature, cfg.trainable_curvature, "--fixed-curvature");
                keep(merged.verbose, cfg.verbose, "--quiet");
                cfg = merged;
            }
            return cmd_train(cfg, metrics_path);
        }
        if (ev->parsed())
            return cmd_eval(ckpt, data_path, split_s, eval_seed, gate_prefix, metrics_path);
        if (sweep->parsed())
            return cmd_time_sweep(sweep_ns, sweep_k, sweep_dim, sweep_entities, sweep_queries,
                                  sweep_seed, metrics_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
