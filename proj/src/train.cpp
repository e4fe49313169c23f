#include "switchspace/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace swx {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ContractViolation("config: bad numeric value for '" + key + "': " + v);
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ContractViolation("config: bad integer value for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ContractViolation("config: bad boolean value for '" + key + "': " + v);
}

// Fisher-Yates with our deterministic rng.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.next_below(i)]);
}

}  // namespace

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "task") cfg.task = value;
    else if (key == "data") cfg.data = value;
    else if (key == "out") cfg.out = value;
    else if (key == "signature") cfg.signature = value;
    else if (key == "k") cfg.k = parse_int(key, value);
    else if (key == "gate_variant") cfg.gate_variant = value;
    else if (key == "lr") cfg.lr = parse_double(key, value);
    else if (key == "epochs") cfg.epochs = parse_int(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
    else if (key == "n_neg") cfg.n_neg = parse_int(key, value);
    else if (key == "margin") cfg.margin = parse_double(key, value);
    else if (key == "reg") cfg.reg = parse_double(key, value);
    else if (key == "w_aux") cfg.w_aux = parse_double(key, value);
    else if (key == "patience") cfg.patience = parse_int(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "weight_by_gate") cfg.weight_by_gate = parse_bool(key, value);
    else if (key == "trainable_curvature") cfg.trainable_curvature = parse_bool(key, value);
    else if (key == "eval_every") cfg.eval_every = parse_int(key, value);
    else if (key == "verbose") cfg.verbose = parse_bool(key, value);
    else throw ContractViolation("config: unknown key '" + key + "'");
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ContractViolation("config: line " + std::to_string(lineno) +
                                    " is not 'key = value': " + s);
        apply_config_kv(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
}

int default_batch_size(const RunConfig& cfg) {
    if (cfg.batch_size > 0) return cfg.batch_size;
    return cfg.task == "rec" ? 1024 : 512;
}

GateVariant default_gate_variant(const std::string& task) {
    return task == "rec" ? GateVariant::FlatLinear : GateVariant::MatrixConv2d;
}

KGMetrics eval_kg(const KGModel& model, const TripleStore& data, Split split) {
    ParamMap<EagerBackend> P = model.eager_params();
    KGScorer scorer = [&](int h, int r, std::span<double> out) {
        model.score_all_tails(P, h, r, out);
    };
    return kg_rank_metrics(scorer, data, split);
}

RecMetrics eval_rec(const RecModel& model, const InteractionStore& data, Split split) {
    ParamMap<EagerBackend> P = model.eager_params();
    RecScorer scorer = [&](int u, std::span<double> out) { model.score_all_items(P, u, out); };
    return rec_rank_metrics(scorer, data, split);
}

namespace {

void check_loss_finite(double loss, const char* where) {
    if (!std::isfinite(loss))
        throw NumericFailure(where, "non-finite training loss " + std::to_string(loss));
}

// Copy current values into a snapshot (optimizer state included).
ParamStore snapshot(const ParamStore& s) { return s; }

}  // namespace

TrainResult train_kg(KGModel& model, const TripleStore& data, const RunConfig& cfg) {
    Rng rng(cfg.seed ^ 0x7261696e6b67ULL);  // independent of init stream
    const int n_rel = data.n_relations();

    // Train on both directions: head prediction becomes tail prediction under
    // the reciprocal relation id r + |R|.
    std::vector<Triple> positives;
    positives.reserve(2 * data.train.size());
    for (const auto& [h, r, t] : data.train) {
        positives.push_back({h, r, t});
        positives.push_back({t, r + n_rel, h});
    }
    auto is_true = [&](int h, int r, int t) {
        return r < n_rel ? data.is_true(h, r, t) : data.is_true(t, r - n_rel, h);
    };

    const int batch = default_batch_size(cfg);
    AdamConfig adam{.lr = cfg.lr};
    TrainResult res;
    ParamStore best = snapshot(model.params());
    int stale = 0;

    std::vector<std::size_t> order(positives.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
            std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch));
            Tape tape(/*check_finite=*/true);
            TapeBackend bk(tape);
            std::map<std::string, Var> P = bind_params(tape, model.params());

            std::vector<GateResult<TapeBackend>> gates;
            Var total;  // mean per-sample loss over the batch
            int n_terms = 0;
            for (std::size_t bi = start; bi < stop; ++bi) {
                const Triple& pos = positives[order[bi]];
                KGModel::Query<TapeBackend> qc =
                    model.query(bk, P, pos.h, pos.r, /*training=*/true, &rng);
                gates.push_back(qc.gate);

                // log(1 + exp(-y s)): softplus(-s) for the positive,
                // softplus(s) for each negative. The gate decision is shared.
                Var term = tape.softplus_(tape.neg(model.tail_score(bk, P, qc, pos.t)));
                for (const Triple& neg : sample_negatives(pos, cfg.n_neg, rng,
                                                          data.n_entities(), is_true))
                    term = tape.add(term, tape.softplus_(model.tail_score(bk, P, qc, neg.t)));
                total = total.valid() ? tape.add(total, term) : term;
                n_terms += 1 + cfg.n_neg;
            }
            Var loss = tape.scale_const(total, 1.0 / n_terms);
            if (cfg.w_aux > 0.0)
                loss = tape.add(loss, importance_loss(bk,
                                                      std::span<const GateResult<TapeBackend>>(gates),
                                                      model.gate_config().n_spaces, cfg.w_aux));
            double lv = tape.scalar_value(loss);
            check_loss_finite(lv, "train_kg");
            epoch_loss += lv;
            ++n_batches;

            adam_step(model.params(), forward_backward(loss, P), adam);
        }
        res.final_train_loss = epoch_loss / static_cast<double>(n_batches);
        res.epochs_run = epoch;

        if (epoch % cfg.eval_every != 0 && epoch != cfg.epochs) continue;
        KGMetrics vm = eval_kg(model, data, Split::Valid);
        if (cfg.verbose)
            std::cerr << "epoch " << epoch << "  loss " << res.final_train_loss << "  val MRR "
                      << vm.mrr << "  HR@10 " << vm.hr10 << "\n";
        if (vm.mrr > res.best_valid) {
            res.best_valid = vm.mrr;
            res.best_epoch = epoch;
            best = snapshot(model.params());
            stale = 0;
        } else if (++stale >= cfg.patience) {
            if (cfg.verbose)
                std::cerr << "early stop at epoch " << epoch << " (best epoch " << res.best_epoch
                          << ")\n";
            break;
        }
    }
    model.params() = best;
    return res;
}

TrainResult train_rec(RecModel& model, const InteractionStore& data, const RunConfig& cfg) {
    Rng rng(cfg.seed ^ 0x7261696e726563ULL);

    std::vector<std::array<int, 2>> positives;  // {user, item}
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(data.n_users()));
    for (int u = 0; u < data.n_users(); ++u) {
        seen[static_cast<std::size_t>(u)].assign(static_cast<std::size_t>(data.n_items()), 0);
        for (int i : data.train[static_cast<std::size_t>(u)]) {
            positives.push_back({u, i});
            seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)] = 1;
        }
    }
    auto sample_negative = [&](int u) {
        for (int tries = 0; tries < 200; ++tries) {
            int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(data.n_items())));
            if (!seen[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)]) return i;
        }
        throw NumericFailure("train_rec", "cannot sample a negative item (user has seen "
                                          "essentially every item)");
    };

    const int batch = default_batch_size(cfg);
    const int d = model.total_dim();
    AdamConfig adam{.lr = cfg.lr};
    TrainResult res;
    ParamStore best = snapshot(model.params());
    int stale = 0;

    std::vector<std::size_t> order(positives.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
            std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch));
            Tape tape(/*check_finite=*/true);
            TapeBackend bk(tape);
            std::map<std::string, Var> P = bind_params(tape, model.params());

            std::vector<GateResult<TapeBackend>> gates;
            Var total;
            int n_terms = 0;
            for (std::size_t bi = start; bi < stop; ++bi) {
                auto [u, ip] = positives[order[bi]];
                int in = sample_negative(u);
                auto pos = model.switch_score(bk, P, u, ip, /*training=*/true, &rng);
                auto neg = model.switch_score(bk, P, u, in, /*training=*/true, &rng);
                gates.push_back(pos.gate);
                gates.push_back(neg.gate);
                Var term = model.hinge_loss(bk, pos.score, neg.score);
                if (cfg.reg > 0.0) {
                    // L2 on the tangent-space embeddings touched by the sample
                    Var uu = tape.slice(P.at("user"), u * d, d);
                    Var vp = tape.slice(P.at("item"), ip * d, d);
                    Var vn = tape.slice(P.at("item"), in * d, d);
                    Var sq = tape.add(tape.add(tape.dot(uu, uu), tape.dot(vp, vp)),
                                      tape.dot(vn, vn));
                    term = tape.add(term, tape.scale_const(sq, cfg.reg));
                }
                total = total.valid() ? tape.add(total, term) : term;
                ++n_terms;
            }
            Var loss = tape.scale_const(total, 1.0 / n_terms);
            if (cfg.w_aux > 0.0)
                loss = tape.add(loss, importance_loss(bk,
                                                      std::span<const GateResult<TapeBackend>>(gates),
                                                      model.gate_config().n_spaces, cfg.w_aux));
            double lv = tape.scalar_value(loss);
            check_loss_finite(lv, "train_rec");
            epoch_loss += lv;
            ++n_batches;

            adam_step(model.params(), forward_backward(loss, P), adam);
        }
        res.final_train_loss = epoch_loss / static_cast<double>(n_batches);
        res.epochs_run = epoch;

        if (epoch % cfg.eval_every != 0 && epoch != cfg.epochs) continue;
        RecMetrics vm = eval_rec(model, data, Split::Valid);
        if (cfg.verbose)
            std::cerr << "epoch " << epoch << "  loss " << res.final_train_loss << "  val MAP "
                      << vm.map << "  P@10 " << vm.p10 << "\n";
        if (vm.map > res.best_valid) {
            res.best_valid = vm.map;
            res.best_epoch = epoch;
            best = snapshot(model.params());
            stale = 0;
        } else if (++stale >= cfg.patience) {
            if (cfg.verbose)
                std::cerr << "early stop at epoch " << epoch << " (best epoch " << res.best_epoch
                          << ")\n";
            break;
        }
    }
    model.params() = best;
    return res;
}

}  // namespace swx
