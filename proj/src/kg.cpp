#include "switchspace/kg.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace swx {

std::vector<double> rotate(const std::vector<double>& x, const std::vector<double>& gamma) {
    return rotate(EagerBackend{}, x, gamma);
}

KGModel::KGModel(KGModelConfig cfg, int n_entities, int n_base_relations)
    : cfg_(std::move(cfg)), n_entities_(n_entities), n_rel_base_(n_base_relations) {
    d_ = cfg_.sig.total_dim();
    const int N = cfg_.sig.size();
    for (int i = 0; i < N; ++i) {
        const ComponentSpace& c = cfg_.sig.components[static_cast<std::size_t>(i)];
        if (c.dim % 2 != 0)
            throw ContractViolation("kg model: component dims must be even (2x2 rotation blocks)");
        offsets_.push_back(cfg_.sig.offset(i));
        noneuc_index_.push_back(c.kind == SpaceKind::Euclidean ? -1 : n_noneuc_++);
    }
    if (cfg_.K < 1 || cfg_.K > N) throw ContractViolation("kg model: K must be in [1, N]");

    gate_cfg_.variant = cfg_.gate_variant;
    gate_cfg_.n_spaces = N;
    gate_cfg_.input_len = 3 * d_;
    if (gate_cfg_.variant == GateVariant::MatrixConv2d) {
        if (!cfg_.sig.uniform_dim())
            throw ContractViolation("kg model: matrix gate needs equal component dims");
        gate_cfg_.rows = 3 * N;
        gate_cfg_.cols = cfg_.sig.components.front().dim;
    }
    gate_cfg_.validate();
}

void KGModel::init_params(Rng& rng) {
    auto normal_vec = [&rng](std::size_t n, double std) {
        std::vector<double> v(n);
        for (double& x : v) x = rng.normal(0.0, std);
        return v;
    };
    const auto E = static_cast<std::size_t>(n_entities_);
    const auto R = static_cast<std::size_t>(n_relations_total());
    const auto D = static_cast<std::size_t>(d_);

    store_.add("entity", {E, D}, normal_vec(E * D, 0.05));
    store_.add("rel.alpha", {R, D}, normal_vec(R * D, 0.05));
    store_.add("rel.beta", {R, D}, normal_vec(R * D, 0.05));
    std::vector<double> gamma(R * D);
    for (double& g : gamma) g = rng.uniform(-std::numbers::pi, std::numbers::pi);
    store_.add("rel.gamma", {R, D}, std::move(gamma));
    store_.add("bias.head", {E}, std::vector<double>(E, 0.0));
    store_.add("bias.tail", {E}, std::vector<double>(E, 0.0));
    if (cfg_.trainable_curvature && n_noneuc_ > 0) {
        std::vector<double> raw(R * static_cast<std::size_t>(n_noneuc_));
        std::size_t idx = 0;
        for (std::size_t r = 0; r < R; ++r)
            for (const auto& c : cfg_.sig.components) {
                if (c.kind == SpaceKind::Euclidean) continue;
                // softplus(raw) == |curvature| at init
                raw[idx++] = std::log(std::expm1(std::abs(c.curvature)));
            }
        store_.add("rel.curv", {R, static_cast<std::size_t>(n_noneuc_)}, std::move(raw));
    }
    init_gate_params(store_, "gate", gate_cfg_, rng);
    stamp_meta();
}

void KGModel::stamp_meta() {
    auto& m = store_.meta();
    m["task"] = "kg";
    m["signature"] = format_signature(cfg_.sig);
    m["k"] = std::to_string(cfg_.K);
    m["gate_variant"] = format_gate_variant(cfg_.gate_variant);
    m["n_entities"] = std::to_string(n_entities_);
    m["n_base_relations"] = std::to_string(n_rel_base_);
    m["weight_by_gate"] = cfg_.weight_by_gate ? "1" : "0";
    m["trainable_curvature"] = cfg_.trainable_curvature ? "1" : "0";
}

void KGModel::check_shapes() const {
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
    const auto E = static_cast<std::size_t>(n_entities_);
    const auto R = static_cast<std::size_t>(n_relations_total());
    const auto D = static_cast<std::size_t>(d_);
    expect("entity", {E, D});
    expect("rel.alpha", {R, D});
    expect("rel.beta", {R, D});
    expect("rel.gamma", {R, D});
    expect("bias.head", {E});
    expect("bias.tail", {E});
    if (cfg_.trainable_curvature && n_noneuc_ > 0)
        expect("rel.curv", {R, static_cast<std::size_t>(n_noneuc_)});
}

ParamMap<EagerBackend> KGModel::eager_params() const {
    ParamMap<EagerBackend> P;
    for (const auto& [name, p] : store_) P[name] = p.value;
    return P;
}

void KGModel::score_all_tails(const ParamMap<EagerBackend>& P, int h, int r,
                              std::span<double> out) const {
    EagerBackend bk;
    Query<EagerBackend> qc = query(bk, P, h, r, /*training=*/false, nullptr);
    for (int t = 0; t < n_entities_; ++t)
        out[static_cast<std::size_t>(t)] = tail_score(bk, P, qc, t);
}

std::vector<Triple> sample_negatives(const Triple& positive, int n_neg, Rng& rng,
                                     int n_entities,
                                     const std::function<bool(int, int, int)>& is_true) {
    std::vector<Triple> out;
    out.reserve(static_cast<std::size_t>(n_neg));
    int attempts = 0;
    const int max_attempts = n_neg * 50 + 100;
    while (static_cast<int>(out.size()) < n_neg && attempts < max_attempts) {
        ++attempts;
        int t = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_entities)));
        if (is_true(positive.h, positive.r, t)) continue;
        out.push_back({positive.h, positive.r, t});
    }
    if (static_cast<int>(out.size()) < n_neg)
        std::cerr << "warning: negative sampling exhausted after " << attempts
                  << " attempts; returning " << out.size() << " of " << n_neg << "\n";
    return out;
}

}  // namespace swx
