#pragma once

#include <cstdint>
#include <string>

#include "switchspace/data.hpp"
#include "switchspace/eval.hpp"
#include "switchspace/kg.hpp"
#include "switchspace/rec.hpp"

namespace swx {

// One training run's hyperparameters. Loadable from a `key = value` config
// file; the CLI overrides individual fields with flags.
struct RunConfig {
    std::string task;  // "kg" or "rec"
    std::string data;  // dataset directory/file
    std::string out;   // checkpoint path ("" = don't save)

    std::string signature = "P32,D32,E32";
    int k = 2;
    std::string gate_variant;  // "" = task default (kg: matrix-conv2d, rec: flat-linear)

    double lr = 1e-3;
    int epochs = 100;
    int batch_size = 0;  // 0 = task default (kg: 512, rec: 1024)
    int n_neg = 50;      // kg negatives per positive
    double margin = 0.5;
    double reg = 0.0;  // rec tangent-space L2
    double w_aux = 0.01;
    int patience = 10;  // early-stopping epochs without validation improvement
    std::uint64_t seed = 42;
    bool weight_by_gate = true;
    bool trainable_curvature = true;
    int eval_every = 1;
    bool verbose = true;
};

// Applies one `key = value` assignment; throws ContractViolation on unknown
// keys or unparsable values.
void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// Reads a config file of `key = value` lines ('#' comments, blank lines ok).
RunConfig load_run_config(const std::string& path);

int default_batch_size(const RunConfig& cfg);
GateVariant default_gate_variant(const std::string& task);

struct TrainResult {
    int epochs_run = 0;
    int best_epoch = -1;
    double best_valid = 0.0;  // MRR for kg, MAP for rec
    double final_train_loss = 0.0;
};

// Mini-batch training with Adam and early stopping on the validation metric.
// On return the model holds the best-validation parameters.
TrainResult train_kg(KGModel& model, const TripleStore& data, const RunConfig& cfg);
TrainResult train_rec(RecModel& model, const InteractionStore& data, const RunConfig& cfg);

// Eager evaluation helpers shared by the trainer and the CLI.
KGMetrics eval_kg(const KGModel& model, const TripleStore& data, Split split);
RecMetrics eval_rec(const RecModel& model, const InteractionStore& data, Split split);

}  // namespace swx
