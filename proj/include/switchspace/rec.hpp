#pragma once

#include "switchspace/gating.hpp"
#include "switchspace/product.hpp"

namespace swx {

struct RecModelConfig {
    Signature sig;
    int K = 4;
    GateVariant gate_variant = GateVariant::FlatLinear;
    double margin = 0.5;
    double w_aux = 0.01;
    double reg = 0.0;  // L2 on tangent-space embeddings
    bool weight_by_gate = true;
    // Product-space baseline: bypass the gate and sum all component scores
    // (the negated product-space decomposition) instead of the top-K log-sum-exp.
    bool sum_all = false;
};

// Metric-learning collaborative filtering in switch spaces: the preference is
// the negated squared gyrospace distance per component, combined by
// the gate; single-space signatures recover CML / HyperML up to the factor-2
// distance convention (our flat distance is 2||u-v||, so scores are 4x the
// classic CML values; rankings are unchanged).
class RecModel {
public:
    RecModel(RecModelConfig cfg, int n_users, int n_items);

    void init_params(Rng& rng);
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }
    const RecModelConfig& config() const { return cfg_; }
    const GateConfig& gate_config() const { return gate_cfg_; }
    int n_users() const { return n_users_; }
    int n_items() const { return n_items_; }
    int total_dim() const { return d_; }

    void stamp_meta();
    void check_shapes() const;

    template <class B>
    struct Pair {
        GateResult<B> gate;
        typename B::S score;
    };

    template <class B>
    typename B::V gate_input(const B& bk, const ParamMap<B>& P, int u, int i) const {
        std::array<typename B::V, 2> parts = {bk.slice(P.at("user"), u * d_, d_),
                                              bk.slice(P.at("item"), i * d_, d_)};
        return bk.concat(std::span<const typename B::V>(parts));
    }

    // Preference for one component: -d^2(exp_0(u), exp_0(v)).
    template <class B>
    typename B::S component_score(const B& bk, const ParamMap<B>& P, int u, int i,
                                  int comp) const {
        int off = offsets_[static_cast<std::size_t>(comp)];
        int b = cfg_.sig.components[static_cast<std::size_t>(comp)].dim;
        Curv<B> k = make_curv(bk, cfg_.sig.components[static_cast<std::size_t>(comp)].curvature);
        typename B::V uu = exp_map_origin(bk, bk.slice(P.at("user"), u * d_ + off, b), k);
        typename B::V vi = exp_map_origin(bk, bk.slice(P.at("item"), i * d_ + off, b), k);
        return bk.neg(sq_dist(bk, uu, vi, k));
    }

    // Gate + log-sum-exp combination of the active component scores.
    template <class B>
    Pair<B> switch_score(const B& bk, const ParamMap<B>& P, int u, int i, bool training,
                         Rng* rng) const {
        Pair<B> out;
        if (cfg_.sum_all) {
            const int n = gate_cfg_.n_spaces;
            out.gate.dec.active.resize(static_cast<std::size_t>(n));
            for (int c = 0; c < n; ++c) out.gate.dec.active[static_cast<std::size_t>(c)] = c;
            out.gate.dec.gates.assign(static_cast<std::size_t>(n), 1.0 / n);
            out.gate.active_gates =
                bk.cv(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
            typename B::S acc = component_score(bk, P, u, i, 0);
            for (int c = 1; c < n; ++c) acc = bk.add(acc, component_score(bk, P, u, i, c));
            out.score = acc;
            return out;
        }
        out.gate = noisy_topk_gates(bk, P, "gate", gate_cfg_, gate_input(bk, P, u, i), cfg_.K,
                                    training, rng);
        std::vector<typename B::S> scores;
        scores.reserve(out.gate.dec.active.size());
        for (int comp : out.gate.dec.active)
            scores.push_back(component_score(bk, P, u, i, comp));
        out.score = switch_score_active(bk,
                                        bk.from_scalars(std::span<const typename B::S>(scores)),
                                        out.gate.active_gates, cfg_.weight_by_gate);
        return out;
    }

    // Margin hinge for one (user, positive, negative) sample: scores are
    // preferences (negated squared distances), so the positive must beat the
    // negative by the margin.
    template <class B>
    typename B::S hinge_loss(const B& bk, typename B::S s_pos, typename B::S s_neg) const {
        return bk.relu_(bk.add_const(bk.sub(s_neg, s_pos), cfg_.margin));
    }

    // Eager scoring of every item for one user (gate evaluated per pair; the
    // gate input involves the item embedding).
    void score_all_items(const ParamMap<EagerBackend>& P, int u, std::span<double> out) const;

    ParamMap<EagerBackend> eager_params() const;

private:
    RecModelConfig cfg_;
    GateConfig gate_cfg_;
    int n_users_, n_items_, d_;
    std::vector<int> offsets_;
    ParamStore store_;
};

}  // namespace swx
