#pragma once

#include <array>
#include <optional>
#include <unordered_set>

#include "switchspace/gating.hpp"
#include "switchspace/product.hpp"

namespace swx {

// Block-diagonal 2x2 rotation; angles are the even-indexed entries of gamma
// (one angle per coordinate pair, odd entries unused). Preserves the norm.
template <class B>
typename B::V rotate(const B& bk, const typename B::V& x, const typename B::V& gamma) {
    if (bk.size(x) % 2 != 0) throw ContractViolation("rotate: dimension must be even");
    using V = typename B::V;
    V theta = bk.even(gamma);
    V c = bk.vcos(theta), s = bk.vsin(theta);
    V xe = bk.even(x), xo = bk.odd(x);
    V ye = bk.vsub(bk.vmul(c, xe), bk.vmul(s, xo));
    V yo = bk.vadd(bk.vmul(s, xe), bk.vmul(c, xo));
    return bk.interleave(ye, yo);
}

std::vector<double> rotate(const std::vector<double>& x, const std::vector<double>& gamma);

struct KGModelConfig {
    Signature sig;
    int K = 2;
    GateVariant gate_variant = GateVariant::MatrixConv2d;
    double w_aux = 0.01;
    bool weight_by_gate = true;
    bool trainable_curvature = true;
};

// A labeled triple; relation ids >= n_base_relations are reciprocal.
struct Triple {
    int h, r, t;
};

// SwisE: per-component rotation-translation scorers combined by the sparse
// gate. Entities and relation parameters live in tangent space; the gate input
// is the stacked (e_h, alpha_r, beta_r) matrix of shape 3N x b.
class KGModel {
public:
    KGModel(KGModelConfig cfg, int n_entities, int n_base_relations);

    void init_params(Rng& rng);

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }
    const KGModelConfig& config() const { return cfg_; }
    const GateConfig& gate_config() const { return gate_cfg_; }
    int n_entities() const { return n_entities_; }
    int n_base_relations() const { return n_rel_base_; }
    int n_relations_total() const { return 2 * n_rel_base_; }
    int total_dim() const { return d_; }

    // Fills store metadata / verifies a loaded store matches this model.
    void stamp_meta();
    void check_shapes() const;

    template <class B>
    Curv<B> component_curv(const B& bk, const ParamMap<B>& P, int r, int comp) const {
        const ComponentSpace& c = cfg_.sig.components[static_cast<std::size_t>(comp)];
        int sign = kind_sign(c.kind);
        if (sign == 0) return make_curv(bk, 0.0);
        if (!cfg_.trainable_curvature) return make_curv(bk, c.curvature);
        typename B::S raw = bk.at(P.at("rel.curv"), r * n_noneuc_ + noneuc_index_[comp]);
        return curv_from_raw(bk, sign, raw);
    }

    // State shared by all candidate tails of one (h, r) query: the gate
    // decision and the relation transform of the head per active component.
    template <class B>
    struct Query {
        int h, r;
        GateResult<B> gate;
        std::vector<typename B::V> q;  // aligned with gate.dec.active
        std::vector<Curv<B>> curvs;
    };

    template <class B>
    typename B::V gate_input(const B& bk, const ParamMap<B>& P, int h, int r) const {
        std::array<typename B::V, 3> parts = {
            bk.slice(P.at("entity"), h * d_, d_),
            bk.slice(P.at("rel.alpha"), r * d_, d_),
            bk.slice(P.at("rel.beta"), r * d_, d_),
        };
        return bk.concat(std::span<const typename B::V>(parts));
    }

    // Relation transform for one component:
    // Q = Rot(exp0(e_h) (+) exp0(alpha), gamma) (+) exp0(beta)
    template <class B>
    typename B::V transform(const B& bk, const ParamMap<B>& P, int h, int r, int comp,
                            const Curv<B>& k) const {
        int off = offsets_[static_cast<std::size_t>(comp)];
        int b = cfg_.sig.components[static_cast<std::size_t>(comp)].dim;
        typename B::V eh = exp_map_origin(bk, bk.slice(P.at("entity"), h * d_ + off, b), k);
        typename B::V al = exp_map_origin(bk, bk.slice(P.at("rel.alpha"), r * d_ + off, b), k);
        typename B::V be = exp_map_origin(bk, bk.slice(P.at("rel.beta"), r * d_ + off, b), k);
        typename B::V ga = bk.slice(P.at("rel.gamma"), r * d_ + off, b);
        return mobius_add(bk, rotate(bk, mobius_add(bk, eh, al, k), ga), be, k);
    }

    template <class B>
    Query<B> query(const B& bk, const ParamMap<B>& P, int h, int r, bool training,
                   Rng* rng) const {
        Query<B> out;
        out.h = h;
        out.r = r;
        out.gate = noisy_topk_gates(bk, P, "gate", gate_cfg_, gate_input(bk, P, h, r), cfg_.K,
                                    training, rng);
        for (int comp : out.gate.dec.active) {
            Curv<B> k = component_curv(bk, P, r, comp);
            out.q.push_back(transform(bk, P, h, r, comp, k));
            out.curvs.push_back(k);
        }
        return out;
    }

    // Component score -d(Q, exp0(e_t))^2 + b_h + b_t for a prepared query.
    template <class B>
    typename B::S component_score(const B& bk, const ParamMap<B>& P, const Query<B>& qc,
                                  std::size_t active_idx, int t) const {
        int comp = qc.gate.dec.active[active_idx];
        int off = offsets_[static_cast<std::size_t>(comp)];
        int b = cfg_.sig.components[static_cast<std::size_t>(comp)].dim;
        const Curv<B>& k = qc.curvs[active_idx];
        typename B::V et = exp_map_origin(bk, bk.slice(P.at("entity"), t * d_ + off, b), k);
        typename B::S s = bk.neg(sq_dist(bk, qc.q[active_idx], et, k));
        s = bk.add(s, bk.at(P.at("bias.head"), qc.h));
        return bk.add(s, bk.at(P.at("bias.tail"), t));
    }

    // Log-sum-exp switch score over the active components.
    template <class B>
    typename B::S tail_score(const B& bk, const ParamMap<B>& P, const Query<B>& qc,
                             int t) const {
        std::vector<typename B::S> scores;
        scores.reserve(qc.q.size());
        for (std::size_t i = 0; i < qc.q.size(); ++i)
            scores.push_back(component_score(bk, P, qc, i, t));
        return switch_score_active(bk, bk.from_scalars(std::span<const typename B::S>(scores)),
                                   qc.gate.active_gates, cfg_.weight_by_gate);
    }

    // Full switch score of one triple (gate included).
    template <class B>
    std::pair<typename B::S, GateDecision> swise_score(const B& bk, const ParamMap<B>& P, int h,
                                                       int r, int t, bool training,
                                                       Rng* rng) const {
        Query<B> qc = query(bk, P, h, r, training, rng);
        return {tail_score(bk, P, qc, t), qc.gate.dec};
    }

    // Eager scoring of every entity as the tail of (h, r); gate evaluated once.
    void score_all_tails(const ParamMap<EagerBackend>& P, int h, int r,
                         std::span<double> out) const;

    ParamMap<EagerBackend> eager_params() const;

private:
    KGModelConfig cfg_;
    GateConfig gate_cfg_;
    int n_entities_, n_rel_base_, d_, n_noneuc_ = 0;
    std::vector<int> offsets_;
    std::vector<int> noneuc_index_;
    ParamStore store_;
};

// Tail-corrupted negatives, filtered against known-true triples, labeled -1 by
// the caller. May return fewer than n_neg (with a stderr warning) if sampling
// keeps hitting true triples.
std::vector<Triple> sample_negatives(const Triple& positive, int n_neg, Rng& rng,
                                     int n_entities,
                                     const std::function<bool(int h, int r, int t)>& is_true);

// Per-sample logistic loss term log(1 + exp(-y * s)).
inline double kg_log_loss(double y, double s) {
    double x = -y * s;
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace swx
