#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "switchspace/autodiff.hpp"

namespace swx {

// One named trainable array plus its Adam state.
struct Param {
    std::vector<double> value;
    std::vector<std::size_t> shape;  // row-major
    std::vector<double> m;           // first moment
    std::vector<double> v;           // second moment
    std::int64_t step = 0;

    std::size_t size() const { return value.size(); }
};

// Named parameter arrays with per-parameter Adam state.
//
// Serializes to the checkpoint format described in the README:
// a little-endian binary container of name -> shape -> float64 payload,
// with optimizer state included so training can resume.
class ParamStore {
public:
    Param& add(const std::string& name, std::vector<std::size_t> shape,
               std::vector<double> init);
    bool has(const std::string& name) const { return params_.count(name) > 0; }
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    std::vector<std::string> names() const;
    std::size_t count() const { return params_.size(); }

    // Metadata travels with the checkpoint (task, signature, gate variant...).
    std::map<std::string, std::string>& meta() { return meta_; }
    const std::map<std::string, std::string>& meta() const { return meta_; }

    void save(const std::string& path) const;
    static ParamStore load(const std::string& path);

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::map<std::string, Param> params_;
    std::map<std::string, std::string> meta_;
};

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam update for every parameter named in `grads`.
// Gradient shape must match the parameter; step counters increment by one.
void adam_step(ParamStore& params, const GradMap& grads, const AdamConfig& cfg);

// Registers every parameter as a tape input (requires_grad on) and returns the
// name -> Var binding used with forward_backward.
std::map<std::string, Var> bind_params(Tape& tape, const ParamStore& params);

}  // namespace swx
