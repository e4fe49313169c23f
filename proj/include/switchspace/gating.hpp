#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "switchspace/backend.hpp"
#include "switchspace/params.hpp"
#include "switchspace/rng.hpp"

namespace swx {

enum class GateVariant { FlatLinear, FlatConv1d, MatrixConv2d };

GateVariant parse_gate_variant(const std::string& s);
std::string format_gate_variant(GateVariant v);

// Shape of the gating network. Two parallel heads f1 (logits) and f2 (noise
// scale) share this structure with independent weights.
struct GateConfig {
    GateVariant variant = GateVariant::FlatLinear;
    int n_spaces = 0;   // N
    int input_len = 0;  // flat input length; rows*cols for the matrix variant
    int rows = 0, cols = 0;
    int kernel = 5, stride = 3, channels = 4;

    int conv_positions_1d() const { return (input_len - kernel) / stride + 1; }
    int conv_rows() const { return (rows - kernel) / stride + 1; }
    int conv_cols() const { return (cols - kernel) / stride + 1; }
    // length of the vector entering the final linear layer
    int feature_len() const {
        switch (variant) {
            case GateVariant::FlatLinear: return input_len;
            case GateVariant::FlatConv1d: return channels * conv_positions_1d();
            case GateVariant::MatrixConv2d: return channels * conv_rows() * conv_cols();
        }
        return 0;
    }
    void validate() const;
};

// Per-example gating outcome (plain values; usable from both backends).
struct GateDecision {
    std::vector<double> clean_logits;
    std::vector<double> noisy_logits;
    std::vector<double> gates;  // length N, zero outside `active`, sums to 1
    std::vector<int> active;    // sorted ascending, size min(K, N)
};

template <class B>
struct GateResult {
    GateDecision dec;
    typename B::V active_gates;  // length |active|, aligned with dec.active
};

void init_gate_params(ParamStore& store, const std::string& prefix, const GateConfig& cfg,
                      Rng& rng);

// general matmul through the backend (matvec covers cb==1 only)
template <class B>
typename B::V matmul2(const B& bk, const typename B::V& a, int ra, int ca,
                      const typename B::V& b, int cb);

template <>
inline EagerBackend::V matmul2<EagerBackend>(const EagerBackend&, const EagerBackend::V& a,
                                             int ra, int ca, const EagerBackend::V& b, int cb) {
    EagerBackend::V out(static_cast<std::size_t>(ra) * cb, 0.0);
    for (int i = 0; i < ra; ++i)
        for (int k = 0; k < ca; ++k) {
            double aik = a[static_cast<std::size_t>(i) * ca + k];
            if (aik == 0.0) continue;
            for (int j = 0; j < cb; ++j)
                out[static_cast<std::size_t>(i) * cb + j] += aik * b[static_cast<std::size_t>(k) * cb + j];
        }
    return out;
}

template <>
inline TapeBackend::V matmul2<TapeBackend>(const TapeBackend& bk, const TapeBackend::V& a,
                                           int ra, int ca, const TapeBackend::V& b, int cb) {
    return bk.t->matmul(a, ra, ca, b, cb);
}

// One head of the gating network: input -> N raw logits.
template <class B>
typename B::V gate_head(const B& bk, const ParamMap<B>& P, const std::string& prefix,
                        const char* head, const GateConfig& cfg, const typename B::V& x) {
    using V = typename B::V;
    const std::string base = prefix + "." + head;
    V features = x;
    if (cfg.variant != GateVariant::FlatLinear) {
        // im2col: gather conv patches with slices, then one matmul against the
        // (kernel_elems x channels) kernel matrix.
        std::vector<V> patches;
        if (cfg.variant == GateVariant::FlatConv1d) {
            for (int p = 0; p < cfg.conv_positions_1d(); ++p)
                patches.push_back(bk.slice(x, p * cfg.stride, cfg.kernel));
        } else {
            for (int r = 0; r < cfg.conv_rows(); ++r)
                for (int cpos = 0; cpos < cfg.conv_cols(); ++cpos) {
                    std::vector<V> rows;
                    for (int i = 0; i < cfg.kernel; ++i)
                        rows.push_back(bk.slice(x, (r * cfg.stride + i) * cfg.cols +
                                                       cpos * cfg.stride,
                                                cfg.kernel));
                    patches.push_back(bk.concat(std::span<const V>(rows)));
                }
        }
        int npatch = static_cast<int>(patches.size());
        int kelems = bk.size(patches.front());
        V patch_mat = bk.concat(std::span<const V>(patches));
        V feat = matmul2(bk, patch_mat, npatch, kelems, P.at(base + ".conv.w"), cfg.channels);
        // bias broadcast: ones(npatch x 1) * bias(1 x C)
        V ones = bk.cv(std::vector<double>(static_cast<std::size_t>(npatch), 1.0));
        V bias_mat = matmul2(bk, ones, npatch, 1, P.at(base + ".conv.b"), cfg.channels);
        features = bk.vrelu(bk.vadd(feat, bias_mat));
    }
    typename B::V logits = bk.matvec(P.at(base + ".lin.w"), cfg.n_spaces, cfg.feature_len(),
                                     features);
    return bk.vadd(logits, P.at(base + ".lin.b"));
}

// Noisy top-K gate (softplus-scaled Gaussian noise while training; evaluation
// is deterministic).
// Ties in the K-th value break toward the lowest index.
template <class B>
GateResult<B> noisy_topk_gates(const B& bk, const ParamMap<B>& P, const std::string& prefix,
                               const GateConfig& cfg, const typename B::V& input, int K,
                               bool training, Rng* rng) {
    using V = typename B::V;
    const int N = cfg.n_spaces;
    if (K < 1 || K > N) throw ContractViolation("noisy_topk_gates: K must be in [1, N]");

    V clean = gate_head(bk, P, prefix, "f1", cfg, input);
    V noisy = clean;
    if (training) {
        if (!rng) throw ContractViolation("noisy_topk_gates: training noise needs an rng");
        std::vector<double> n(static_cast<std::size_t>(N));
        for (double& x : n) x = rng->normal();
        V std_head = gate_head(bk, P, prefix, "f2", cfg, input);
        V noise_std = [&] {
            if constexpr (B::taped) return bk.t->softplus_(std_head);
            else {
                typename B::V out(std_head.size());
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = bk.softplus_(std_head[i]);
                return out;
            }
        }();
        noisy = bk.vadd(clean, bk.vmul(bk.cv(std::move(n)), noise_std));
    }

    GateResult<B> res;
    res.dec.clean_logits = bk.values(clean);
    res.dec.noisy_logits = bk.values(noisy);

    std::vector<int> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    const auto& lv = res.dec.noisy_logits;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lv[a] > lv[b]; });
    res.dec.active.assign(order.begin(), order.begin() + K);
    std::sort(res.dec.active.begin(), res.dec.active.end());

    std::vector<typename B::S> picked;
    picked.reserve(static_cast<std::size_t>(K));
    for (int i : res.dec.active) picked.push_back(bk.at(noisy, i));
    res.active_gates = bk.softmax(bk.from_scalars(std::span<const typename B::S>(picked)));

    res.dec.gates.assign(static_cast<std::size_t>(N), 0.0);
    std::vector<double> gv = bk.values(res.active_gates);
    for (std::size_t j = 0; j < res.dec.active.size(); ++j)
        res.dec.gates[static_cast<std::size_t>(res.dec.active[j])] = gv[j];
    return res;
}

// Load-balancing auxiliary loss: w_aux * squared coefficient of variation of
// per-space summed gate values over the batch.
template <class B>
typename B::S importance_loss(const B& bk, std::span<const GateResult<B>> batch, int n_spaces,
                              double w_aux) {
    using S = typename B::S;
    if (batch.empty()) throw ContractViolation("importance_loss: empty batch");
    std::vector<std::vector<S>> per_space(static_cast<std::size_t>(n_spaces));
    for (const auto& r : batch)
        for (std::size_t j = 0; j < r.dec.active.size(); ++j)
            per_space[static_cast<std::size_t>(r.dec.active[j])].push_back(
                bk.at(r.active_gates, static_cast<int>(j)));

    std::vector<S> importance;
    importance.reserve(per_space.size());
    for (auto& terms : per_space) {
        if (terms.empty()) {
            importance.push_back(bk.cs(0.0));
            continue;
        }
        S acc = terms[0];
        for (std::size_t i = 1; i < terms.size(); ++i) acc = bk.add(acc, terms[i]);
        importance.push_back(acc);
    }
    typename B::V imp = bk.from_scalars(std::span<const S>(importance));
    S mean = bk.scale_const(bk.sum(imp), 1.0 / n_spaces);
    if (bk.val(mean) <= 0.0) throw ContractViolation("importance_loss: zero mean importance");
    typename B::V ones = bk.cv(std::vector<double>(static_cast<std::size_t>(n_spaces), 1.0));
    typename B::V diff = bk.vsub(imp, bk.smul(mean, ones));
    S var = bk.scale_const(bk.dot(diff, diff), 1.0 / n_spaces);
    return bk.scale_const(bk.div(var, bk.mul(mean, mean)), w_aux);
}

// Log-sum-exp switch score over active component scores only (skip-inactive
// path).
template <class B>
typename B::S switch_score_active(const B& bk, const typename B::V& scores_active,
                                  const typename B::V& gates_active,
                                  bool weight_by_gate = true) {
    std::vector<double> sv = bk.values(scores_active);
    double m = *std::max_element(sv.begin(), sv.end());
    typename B::V e = bk.vexp(bk.vadd_const(scores_active, -m));
    typename B::S z = weight_by_gate ? bk.dot(gates_active, e) : bk.sum(e);
    return bk.add_const(bk.log_(z), m);
}

enum class ScoreMode { Lse, Sum };

// Switch score over full length-N vectors (inactive entries zero).
// Sum mode requires K == N and recovers the product-space decomposition.
double switch_score(std::span<const double> component_scores, std::span<const double> gates,
                    ScoreMode mode, bool weight_by_gate = true);

}  // namespace swx
