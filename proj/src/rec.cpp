#include "switchspace/rec.hpp"

namespace swx {

RecModel::RecModel(RecModelConfig cfg, int n_users, int n_items)
    : cfg_(std::move(cfg)), n_users_(n_users), n_items_(n_items) {
    d_ = cfg_.sig.total_dim();
    const int N = cfg_.sig.size();
    for (int i = 0; i < N; ++i) offsets_.push_back(cfg_.sig.offset(i));
    if (cfg_.K < 1 || cfg_.K > N) throw ContractViolation("rec model: K must be in [1, N]");

    gate_cfg_.variant = cfg_.gate_variant;
    gate_cfg_.n_spaces = N;
    gate_cfg_.input_len = 2 * d_;
    if (gate_cfg_.variant == GateVariant::MatrixConv2d) {
        if (!cfg_.sig.uniform_dim())
            throw ContractViolation("rec model: matrix gate needs equal component dims");
        gate_cfg_.rows = 2 * N;
        gate_cfg_.cols = cfg_.sig.components.front().dim;
    }
    gate_cfg_.validate();
}

void RecModel::init_params(Rng& rng) {
    auto normal_vec = [&rng](std::size_t n, double std) {
        std::vector<double> v(n);
        for (double& x : v) x = rng.normal(0.0, std);
        return v;
    };
    const auto U = static_cast<std::size_t>(n_users_);
    const auto I = static_cast<std::size_t>(n_items_);
    const auto D = static_cast<std::size_t>(d_);
    store_.add("user", {U, D}, normal_vec(U * D, 0.05));
    store_.add("item", {I, D}, normal_vec(I * D, 0.05));
    init_gate_params(store_, "gate", gate_cfg_, rng);
    stamp_meta();
}

void RecModel::stamp_meta() {
    auto& m = store_.meta();
    m["task"] = "rec";
    m["signature"] = format_signature(cfg_.sig);
    m["k"] = std::to_string(cfg_.K);
    m["gate_variant"] = format_gate_variant(cfg_.gate_variant);
    m["n_users"] = std::to_string(n_users_);
    m["n_items"] = std::to_string(n_items_);
    m["weight_by_gate"] = cfg_.weight_by_gate ? "1" : "0";
    m["sum_all"] = cfg_.sum_all ? "1" : "0";
}

void RecModel::check_shapes() const {
    auto expect = [&](const std::string& name, std::vector<std::size_t> shape) {
        if (!store_.has(name))
            throw std::runtime_error("checkpoint mismatch: missing parameter '" + name + "'");
        const Param& p = store_.at(name);
        if (p.shape != shape) {
            auto fmt = [](const std::vector<std::size_t>& s) {
                std::string out = "(";
                for (std::size_t i = 0; i < s.size(); ++i)
                    out += (i ? "," : "") + std::to_string(s[i]);
                return out + ")";
            };
            throw std::runtime_error("checkpoint mismatch for '" + name + "': expected " +
                                     fmt(shape) + ", found " + fmt(p.shape));
        }
    };
    expect("user", {static_cast<std::size_t>(n_users_), static_cast<std::size_t>(d_)});
    expect("item", {static_cast<std::size_t>(n_items_), static_cast<std::size_t>(d_)});
}

ParamMap<EagerBackend> RecModel::eager_params() const {
    ParamMap<EagerBackend> P;
    for (const auto& [name, p] : store_) P[name] = p.value;
    return P;
}

void RecModel::score_all_items(const ParamMap<EagerBackend>& P, int u,
                               std::span<double> out) const {
    EagerBackend bk;
    for (int i = 0; i < n_items_; ++i)
        out[static_cast<std::size_t>(i)] =
            switch_score(bk, P, u, i, /*training=*/false, nullptr).score;
}

}  // namespace swx
