#include "switchspace/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace swx {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace

void Tape::check(const std::vector<double>& v, const char* op) const {
    if (!check_finite_) return;
    for (double x : v)
        if (!std::isfinite(x)) throw NumericFailure(op, "non-finite value");
}

Var Tape::push(std::vector<double> val, const char* op, bool requires_grad,
               std::function<void(Tape&)> back) {
    check(val, op);
    Node n;
    n.val = std::move(val);
    n.requires_grad = requires_grad;
    n.op = op;
    if (requires_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

std::vector<double>& Tape::grad_buf(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty()) n.grad.assign(n.val.size(), 0.0);
    return n.grad;
}

void Tape::accumulate(int id, std::span<const double> g) {
    auto& buf = grad_buf(id);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

void Tape::accumulate_at(int id, int index, double g) {
    grad_buf(id)[static_cast<std::size_t>(index)] += g;
}

Var Tape::input(std::vector<double> value, bool requires_grad) {
    return push(std::move(value), "input", requires_grad, nullptr);
}

double Tape::scalar_value(Var v) const {
    const Node& n = node(v);
    require(n.val.size() == 1, "scalar_value on non-scalar node");
    return n.val[0];
}

const std::vector<double>& Tape::grad(Var v) const {
    Node& n = const_cast<Tape*>(this)->node(v);
    if (n.grad.empty()) n.grad.assign(n.val.size(), 0.0);
    return n.grad;
}

// --- elementwise binary ------------------------------------------------------

Var Tape::add(Var a, Var b) {
    const auto &av = value(a), &bv = value(b);
    require(av.size() == bv.size(), "add: size mismatch");
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "add", requires_grad(a) || requires_grad(b),
                [ia, ib, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    if (t.nodes_[ia].requires_grad) t.accumulate(ia, g);
                    if (t.nodes_[ib].requires_grad) t.accumulate(ib, g);
                });
}

Var Tape::sub(Var a, Var b) {
    const auto &av = value(a), &bv = value(b);
    require(av.size() == bv.size(), "sub: size mismatch");
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "sub", requires_grad(a) || requires_grad(b),
                [ia, ib, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    if (t.nodes_[ia].requires_grad) t.accumulate(ia, g);
                    if (t.nodes_[ib].requires_grad) {
                        auto& gb = t.grad_buf(ib);
                        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
                    }
                });
}

Var Tape::mul(Var a, Var b) {
    const auto &av = value(a), &bv = value(b);
    require(av.size() == bv.size(), "mul: size mismatch");
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "mul", requires_grad(a) || requires_grad(b),
                [ia, ib, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    const auto &av = t.nodes_[ia].val, &bv = t.nodes_[ib].val;
                    if (t.nodes_[ia].requires_grad) {
                        auto& ga = t.grad_buf(ia);
                        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
                    }
                    if (t.nodes_[ib].requires_grad) {
                        auto& gb = t.grad_buf(ib);
                        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
                    }
                });
}

Var Tape::div(Var a, Var b) {
    const auto &av = value(a), &bv = value(b);
    require(av.size() == bv.size(), "div: size mismatch");
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "div", requires_grad(a) || requires_grad(b),
                [ia, ib, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    const auto &av = t.nodes_[ia].val, &bv = t.nodes_[ib].val;
                    if (t.nodes_[ia].requires_grad) {
                        auto& ga = t.grad_buf(ia);
                        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] / bv[i];
                    }
                    if (t.nodes_[ib].requires_grad) {
                        auto& gb = t.grad_buf(ib);
                        for (std::size_t i = 0; i < gb.size(); ++i)
                            gb[i] -= g[i] * av[i] / (bv[i] * bv[i]);
                    }
                });
}

Var Tape::maximum(Var a, Var b) {
    const auto &av = value(a), &bv = value(b);
    require(av.size() == bv.size(), "max: size mismatch");
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(av[i], bv[i]);
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "max", requires_grad(a) || requires_grad(b),
                [ia, ib, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    const auto &av = t.nodes_[ia].val, &bv = t.nodes_[ib].val;
                    // ties route to the first argument
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        int target = av[i] >= bv[i] ? ia : ib;
                        if (t.nodes_[target].requires_grad)
                            t.accumulate_at(target, static_cast<int>(i), g[i]);
                    }
                });
}

Var Tape::neg(Var a) {
    const auto& av = value(a);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -av[i];
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "neg", requires_grad(a), [ia, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] -= g[i];
    });
}

Var Tape::smul(Var scalar, Var vec) {
    require(value(scalar).size() == 1, "smul: first arg must be scalar");
    double s = value(scalar)[0];
    const auto& v = value(vec);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * v[i];
    int is = scalar.id, iv = vec.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "smul", requires_grad(scalar) || requires_grad(vec),
                [is, iv, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    const auto& v = t.nodes_[iv].val;
                    double s = t.nodes_[is].val[0];
                    if (t.nodes_[is].requires_grad) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * v[i];
                        t.accumulate_at(is, 0, acc);
                    }
                    if (t.nodes_[iv].requires_grad) {
                        auto& gv = t.grad_buf(iv);
                        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g[i] * s;
                    }
                });
}

Var Tape::add_const(Var a, double c) {
    const auto& av = value(a);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + c;
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "add_const", requires_grad(a), [ia, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (!g.empty() && t.nodes_[ia].requires_grad) t.accumulate(ia, g);
    });
}

Var Tape::scale_const(Var a, double c) {
    const auto& av = value(a);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "scale_const", requires_grad(a), [ia, c, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * c;
    });
}

// --- elementwise unary -------------------------------------------------------

Var Tape::unary(Var a, const char* name, double (*f)(double), double (*df)(double, double)) {
    const auto& av = value(a);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), name, requires_grad(a), [ia, df, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        const auto &x = t.nodes_[ia].val, &y = t.nodes_[self].val;
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
    });
}

Var Tape::tanh_(Var a) {
    return unary(a, "tanh", [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; });
}

Var Tape::tan_(Var a) {
    return unary(a, "tan", [](double x) { return std::tan(x); },
                 [](double, double y) { return 1.0 + y * y; });
}

Var Tape::atan_(Var a) {
    return unary(a, "atan", [](double x) { return std::atan(x); },
                 [](double x, double) { return 1.0 / (1.0 + x * x); });
}

Var Tape::atanh_(Var a) {
    return unary(a, "atanh", [](double x) { return std::atanh(x); },
                 [](double x, double) { return 1.0 / (1.0 - x * x); });
}

Var Tape::exp_(Var a) {
    return unary(a, "exp", [](double x) { return std::exp(x); },
                 [](double, double y) { return y; });
}

Var Tape::log_(Var a) {
    return unary(a, "log", [](double x) { return std::log(x); },
                 [](double x, double) { return 1.0 / x; });
}

Var Tape::softplus_(Var a) {
    // log(1+exp(x)) computed without overflow for large |x|
    return unary(a, "softplus",
                 [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
                 [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var Tape::relu_(Var a) {
    return unary(a, "relu", [](double x) { return x > 0 ? x : 0.0; },
                 [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var Tape::sin_(Var a) {
    return unary(a, "sin", [](double x) { return std::sin(x); },
                 [](double x, double) { return std::cos(x); });
}

Var Tape::cos_(Var a) {
    return unary(a, "cos", [](double x) { return std::cos(x); },
                 [](double x, double) { return -std::sin(x); });
}

Var Tape::softmax_(Var a) {
    const auto& av = value(a);
    require(!av.empty(), "softmax: empty input");
    double m = *std::max_element(av.begin(), av.end());
    std::vector<double> out(av.size());
    double z = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) z += (out[i] = std::exp(av[i] - m));
    for (double& y : out) y /= z;
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "softmax", requires_grad(a), [ia, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        const auto& y = t.nodes_[self].val;
        double gy = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * y[i];
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += y[i] * (g[i] - gy);
    });
}

// --- reductions ----------------------------------------------------------------

Var Tape::dot(Var a, Var b) {
    const auto &av = value(a), &bv = value(b);
    require(av.size() == bv.size(), "dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push({s}, "dot", requires_grad(a) || requires_grad(b), [ia, ib, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty()) return;
        double g0 = g[0];
        const auto &av = t.nodes_[ia].val, &bv = t.nodes_[ib].val;
        if (t.nodes_[ia].requires_grad) {
            auto& ga = t.grad_buf(ia);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g0 * bv[i];
        }
        if (t.nodes_[ib].requires_grad) {
            auto& gb = t.grad_buf(ib);
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g0 * av[i];
        }
    });
}

Var Tape::norm(Var a) {
    const auto& av = value(a);
    double s = 0.0;
    for (double x : av) s += x * x;
    s = std::sqrt(s);
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push({s}, "norm", requires_grad(a), [ia, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        double n = std::max(t.nodes_[self].val[0], 1e-30);
        double g0 = g[0];
        const auto& x = t.nodes_[ia].val;
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g0 * x[i] / n;
    });
}

Var Tape::sum(Var a) {
    const auto& av = value(a);
    double s = 0.0;
    for (double x : av) s += x;
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push({s}, "sum", requires_grad(a), [ia, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        auto& ga = t.grad_buf(ia);
        for (double& gi : ga) gi += g[0];
    });
}

// --- structure --------------------------------------------------------------

Var Tape::matmul(Var a, int ra, int ca, Var b, int cb) {
    const auto &av = value(a), &bv = value(b);
    require(static_cast<int>(av.size()) == ra * ca, "matmul: lhs shape mismatch");
    require(static_cast<int>(bv.size()) == ca * cb, "matmul: rhs shape mismatch");
    std::vector<double> out(static_cast<std::size_t>(ra) * cb, 0.0);
    for (int i = 0; i < ra; ++i)
        for (int k = 0; k < ca; ++k) {
            double aik = av[static_cast<std::size_t>(i) * ca + k];
            if (aik == 0.0) continue;
            for (int j = 0; j < cb; ++j)
                out[static_cast<std::size_t>(i) * cb + j] += aik * bv[static_cast<std::size_t>(k) * cb + j];
        }
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "matmul", requires_grad(a) || requires_grad(b),
                [ia, ib, ra, ca, cb, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    const auto &av = t.nodes_[ia].val, &bv = t.nodes_[ib].val;
                    if (t.nodes_[ia].requires_grad) {  // dA = G * B^T
                        auto& ga = t.grad_buf(ia);
                        for (int i = 0; i < ra; ++i)
                            for (int k = 0; k < ca; ++k) {
                                double acc = 0.0;
                                for (int j = 0; j < cb; ++j)
                                    acc += g[static_cast<std::size_t>(i) * cb + j] *
                                           bv[static_cast<std::size_t>(k) * cb + j];
                                ga[static_cast<std::size_t>(i) * ca + k] += acc;
                            }
                    }
                    if (t.nodes_[ib].requires_grad) {  // dB = A^T * G
                        auto& gb = t.grad_buf(ib);
                        for (int k = 0; k < ca; ++k)
                            for (int j = 0; j < cb; ++j) {
                                double acc = 0.0;
                                for (int i = 0; i < ra; ++i)
                                    acc += av[static_cast<std::size_t>(i) * ca + k] *
                                           g[static_cast<std::size_t>(i) * cb + j];
                                gb[static_cast<std::size_t>(k) * cb + j] += acc;
                            }
                    }
                });
}

Var Tape::concat(std::span<const Var> parts) {
    require(!parts.empty(), "concat: no parts");
    std::vector<double> out;
    std::vector<int> ids, sizes;
    bool rg = false;
    for (Var p : parts) {
        const auto& v = value(p);
        out.insert(out.end(), v.begin(), v.end());
        ids.push_back(p.id);
        sizes.push_back(static_cast<int>(v.size()));
        rg = rg || requires_grad(p);
    }
    int self = static_cast<int>(nodes_.size());
    return push(std::move(out), "concat", rg,
                [ids = std::move(ids), sizes = std::move(sizes), self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    std::size_t off = 0;
                    for (std::size_t p = 0; p < ids.size(); ++p) {
                        if (t.nodes_[ids[p]].requires_grad)
                            t.accumulate(ids[p], std::span<const double>(g.data() + off,
                                                                         static_cast<std::size_t>(sizes[p])));
                        off += static_cast<std::size_t>(sizes[p]);
                    }
                });
}

Var Tape::slice(Var a, int start, int len) {
    const auto& av = value(a);
    require(start >= 0 && len >= 0 && start + len <= static_cast<int>(av.size()),
            "slice: out of range");
    std::vector<double> out(av.begin() + start, av.begin() + start + len);
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "slice", requires_grad(a), [ia, start, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[static_cast<std::size_t>(start) + i] += g[i];
    });
}

Var Tape::even(Var a) {
    const auto& av = value(a);
    std::vector<double> out((av.size() + 1) / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[2 * i];
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "even", requires_grad(a), [ia, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[2 * i] += g[i];
    });
}

Var Tape::odd(Var a) {
    const auto& av = value(a);
    std::vector<double> out(av.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[2 * i + 1];
    int ia = a.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "odd", requires_grad(a), [ia, self](Tape& t) {
        const auto& g = t.nodes_[self].grad;
        if (g.empty() || !t.nodes_[ia].requires_grad) return;
        auto& ga = t.grad_buf(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[2 * i + 1] += g[i];
    });
}

Var Tape::interleave(Var a, Var b) {
    const auto &av = value(a), &bv = value(b);
    require(av.size() == bv.size(), "interleave: size mismatch");
    std::vector<double> out(av.size() * 2);
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[2 * i] = av[i];
        out[2 * i + 1] = bv[i];
    }
    int ia = a.id, ib = b.id, self = static_cast<int>(nodes_.size());
    return push(std::move(out), "interleave", requires_grad(a) || requires_grad(b),
                [ia, ib, self](Tape& t) {
                    const auto& g = t.nodes_[self].grad;
                    if (g.empty()) return;
                    std::size_t n = g.size() / 2;
                    if (t.nodes_[ia].requires_grad) {
                        auto& ga = t.grad_buf(ia);
                        for (std::size_t i = 0; i < n; ++i) ga[i] += g[2 * i];
                    }
                    if (t.nodes_[ib].requires_grad) {
                        auto& gb = t.grad_buf(ib);
                        for (std::size_t i = 0; i < n; ++i) gb[i] += g[2 * i + 1];
                    }
                });
}

// --- backward ----------------------------------------------------------------

void Tape::backward(Var root) {
    if (node(root).val.size() != 1)
        throw ContractViolation("backward: root must be a scalar");
    if (backward_done_) throw ContractViolation("backward: already run on this tape");
    backward_done_ = true;
    grad_buf(root.id)[0] = 1.0;
    for (int i = root.id; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.requires_grad || n.grad.empty() || !n.back) continue;
        if (check_finite_) check(n.grad, n.op);
        n.back(*this);
    }
}

GradMap forward_backward(Var loss_root, const std::map<std::string, Var>& params) {
    if (!loss_root.valid()) throw ContractViolation("forward_backward: invalid root");
    Tape& t = *loss_root.tape;
    t.backward(loss_root);
    GradMap out;
    for (const auto& [name, v] : params) out[name] = t.grad(v);
    return out;
}

// --- gradient checking ----------------------------------------------------------

GradCheckResult grad_check(const DiffFn& f, const std::vector<std::vector<double>>& inputs,
                           double eps) {
    // analytic gradients
    std::vector<std::vector<double>> analytic(inputs.size());
    {
        Tape t(false);
        std::vector<Var> vars;
        vars.reserve(inputs.size());
        for (const auto& x : inputs) vars.push_back(t.input(x, true));
        Var y = f(t, vars);
        if (t.size(y) != 1) throw ContractViolation("grad_check: op must be scalar-valued");
        t.backward(y);
        for (std::size_t i = 0; i < inputs.size(); ++i) analytic[i] = t.grad(vars[i]);
    }

    auto eval = [&](const std::vector<std::vector<double>>& xs) {
        Tape t(false);
        std::vector<Var> vars;
        vars.reserve(xs.size());
        for (const auto& x : xs) vars.push_back(t.input(x, false));
        return t.scalar_value(f(t, vars));
    };

    GradCheckResult res;
    std::vector<std::vector<double>> xs = inputs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            double orig = xs[i][j];
            xs[i][j] = orig + eps;
            double fp = eval(xs);
            xs[i][j] = orig - eps;
            double fm = eval(xs);
            xs[i][j] = orig;
            double cd = (fp - fm) / (2.0 * eps);
            double err = std::abs(analytic[i][j] - cd) / std::max(1.0, std::abs(cd));
            res.max_rel_err = std::max(res.max_rel_err, err);
        }
    }
    return res;
}

GradCheckResult grad_check_random(
    const DiffFn& f, const std::function<std::vector<std::vector<double>>()>& sampler,
    double eps, double tol, int max_resample) {
    GradCheckResult last;
    for (int attempt = 0; attempt < max_resample; ++attempt) {
        last = grad_check(f, sampler(), eps);
        if (last.max_rel_err < tol) return last;
    }
    last.conclusive = false;
    return last;
}

}  // namespace swx
