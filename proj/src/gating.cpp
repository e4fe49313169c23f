#include "switchspace/gating.hpp"

#include <cmath>
#include <stdexcept>

namespace swx {

GateVariant parse_gate_variant(const std::string& s) {
    if (s == "flat-linear") return GateVariant::FlatLinear;
    if (s == "flat-conv1d") return GateVariant::FlatConv1d;
    if (s == "matrix-conv2d") return GateVariant::MatrixConv2d;
    throw std::invalid_argument("unknown gate variant: " + s);
}

std::string format_gate_variant(GateVariant v) {
    switch (v) {
        case GateVariant::FlatLinear: return "flat-linear";
        case GateVariant::FlatConv1d: return "flat-conv1d";
        case GateVariant::MatrixConv2d: return "matrix-conv2d";
    }
    return "?";
}

void GateConfig::validate() const {
    if (n_spaces < 1) throw ContractViolation("gate config: n_spaces must be >= 1");
    switch (variant) {
        case GateVariant::FlatLinear:
            if (input_len < 1) throw ContractViolation("gate config: empty input");
            break;
        case GateVariant::FlatConv1d:
            if (input_len < kernel)
                throw ContractViolation("gate config: input shorter than conv kernel");
            break;
        case GateVariant::MatrixConv2d:
            if (rows < kernel || cols < kernel)
                throw ContractViolation("gate config: matrix smaller than conv kernel");
            if (rows * cols != input_len)
                throw ContractViolation("gate config: rows*cols != input_len");
            break;
    }
}

void init_gate_params(ParamStore& store, const std::string& prefix, const GateConfig& cfg,
                      Rng& rng) {
    cfg.validate();
    auto normal_vec = [&rng](std::size_t n, double std) {
        std::vector<double> v(n);
        for (double& x : v) x = rng.normal(0.0, std);
        return v;
    };
    for (const char* head : {"f1", "f2"}) {
        std::string base = prefix + "." + std::string(head);
        if (cfg.variant != GateVariant::FlatLinear) {
            int kelems = cfg.variant == GateVariant::FlatConv1d ? cfg.kernel
                                                                : cfg.kernel * cfg.kernel;
            store.add(base + ".conv.w",
                      {static_cast<std::size_t>(kelems), static_cast<std::size_t>(cfg.channels)},
                      normal_vec(static_cast<std::size_t>(kelems) * cfg.channels, 0.01));
            store.add(base + ".conv.b", {static_cast<std::size_t>(cfg.channels)},
                      std::vector<double>(static_cast<std::size_t>(cfg.channels), 0.0));
        }
        store.add(base + ".lin.w",
                  {static_cast<std::size_t>(cfg.n_spaces),
                   static_cast<std::size_t>(cfg.feature_len())},
                  normal_vec(static_cast<std::size_t>(cfg.n_spaces) * cfg.feature_len(), 0.01));
        store.add(base + ".lin.b", {static_cast<std::size_t>(cfg.n_spaces)},
                  std::vector<double>(static_cast<std::size_t>(cfg.n_spaces), 0.0));
    }
}

double switch_score(std::span<const double> component_scores, std::span<const double> gates,
                    ScoreMode mode, bool weight_by_gate) {
    if (component_scores.size() != gates.size())
        throw ContractViolation("switch_score: score/gate length mismatch");
    if (mode == ScoreMode::Sum) {
        double s = 0.0;
        for (double x : component_scores) s += x;
        return s;
    }
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gates.size(); ++i)
        if (gates[i] > 0.0) m = std::max(m, component_scores[i]);
    if (!std::isfinite(m)) throw ContractViolation("switch_score: all gates are zero");
    double z = 0.0;
    for (std::size_t i = 0; i < gates.size(); ++i) {
        if (gates[i] <= 0.0) continue;
        z += (weight_by_gate ? gates[i] : 1.0) * std::exp(component_scores[i] - m);
    }
    return m + std::log(z);
}

}  // namespace swx
