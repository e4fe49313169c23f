#include "switchspace/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace swx {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

Param& ParamStore::add(const std::string& name, std::vector<std::size_t> shape,
                       std::vector<double> init) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    if (n != init.size()) throw ContractViolation("ParamStore::add: shape/value mismatch");
    if (params_.count(name)) throw ContractViolation("ParamStore::add: duplicate name " + name);
    Param p;
    p.value = std::move(init);
    p.shape = std::move(shape);
    p.m.assign(n, 0.0);
    p.v.assign(n, 0.0);
    return params_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractViolation("ParamStore: unknown parameter " + name);
    return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
    return const_cast<ParamStore*>(this)->at(name);
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [k, _] : params_) out.push_back(k);
    return out;
}

// --- checkpoint io ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'W', 'X', 'C', 'K', 'P', 'T', '1'};

template <class T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    auto n = read_pod<std::uint32_t>(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    return s;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& is, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void ParamStore::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(meta_.size()));
    for (const auto& [k, v] : meta_) {
        write_string(os, k);
        write_string(os, v);
    }
    write_pod<std::uint64_t>(os, params_.size());
    for (const auto& [name, p] : params_) {
        write_string(os, name);
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(p.shape.size()));
        for (std::size_t d : p.shape) write_pod<std::uint64_t>(os, d);
        write_pod<std::int64_t>(os, p.step);
        write_doubles(os, p.value);
        write_doubles(os, p.m);
        write_doubles(os, p.v);
    }
    if (!os) throw std::runtime_error("short write on checkpoint: " + path);
}

ParamStore ParamStore::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a switchspace checkpoint: " + path);
    ParamStore store;
    auto nmeta = read_pod<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < nmeta; ++i) {
        std::string k = read_string(is);
        store.meta_[k] = read_string(is);
    }
    auto nparams = read_pod<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < nparams; ++i) {
        std::string name = read_string(is);
        auto ndim = read_pod<std::uint32_t>(is);
        std::vector<std::size_t> shape(ndim);
        std::size_t n = 1;
        for (auto& d : shape) n *= (d = static_cast<std::size_t>(read_pod<std::uint64_t>(is)));
        Param p;
        p.shape = std::move(shape);
        p.step = read_pod<std::int64_t>(is);
        read_doubles(is, p.value, n);
        read_doubles(is, p.m, n);
        read_doubles(is, p.v, n);
        if (!is) throw std::runtime_error("truncated checkpoint: " + path);
        store.params_.emplace(std::move(name), std::move(p));
    }
    return store;
}

// --- optimizer -------------------------------------------------------------

void adam_step(ParamStore& params, const GradMap& grads, const AdamConfig& cfg) {
    for (const auto& [name, g] : grads) {
        Param& p = params.at(name);
        if (g.size() != p.value.size())
            throw ContractViolation("adam_step: gradient shape mismatch for " + name);
        p.step += 1;
        double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
        double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
        for (std::size_t i = 0; i < g.size(); ++i) {
            p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * g[i];
            p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            double mhat = p.m[i] / bc1;
            double vhat = p.v[i] / bc2;
            p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

std::map<std::string, Var> bind_params(Tape& tape, const ParamStore& params) {
    std::map<std::string, Var> out;
    for (const auto& [name, p] : params) out[name] = tape.input(p.value, true);
    return out;
}

}  // namespace swx
