#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "switchspace/autodiff.hpp"

namespace swx {

// The differentiable layers (manifold ops, gating, task scores) are written as
// templates over a backend. EagerBackend evaluates with plain doubles for fast
// inference; TapeBackend builds the same computation on a Tape so gradients
// come from the reverse sweep. Both expose scalars (S) and vectors (V).

struct EagerBackend {
    using S = double;
    using V = std::vector<double>;
    static constexpr bool taped = false;

    S cs(double x) const { return x; }
    V cv(std::vector<double> v) const { return v; }
    double val(S s) const { return s; }
    std::vector<double> values(const V& v) const { return v; }
    int size(const V& v) const { return static_cast<int>(v.size()); }

    S add(S a, S b) const { return a + b; }
    S sub(S a, S b) const { return a - b; }
    S mul(S a, S b) const { return a * b; }
    S div(S a, S b) const { return a / b; }
    S neg(S a) const { return -a; }
    S add_const(S a, double c) const { return a + c; }
    S scale_const(S a, double c) const { return a * c; }
    S tanh_(S a) const { return std::tanh(a); }
    S tan_(S a) const { return std::tan(a); }
    S atan_(S a) const { return std::atan(a); }
    S atanh_(S a) const { return std::atanh(a); }
    S exp_(S a) const { return std::exp(a); }
    S log_(S a) const { return std::log(a); }
    S softplus_(S a) const {
        return a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
    }
    S relu_(S a) const { return a > 0 ? a : 0.0; }
    S maximum(S a, S b) const { return std::max(a, b); }

    V vadd(const V& a, const V& b) const { return zip(a, b, [](double x, double y) { return x + y; }); }
    V vsub(const V& a, const V& b) const { return zip(a, b, [](double x, double y) { return x - y; }); }
    V vmul(const V& a, const V& b) const { return zip(a, b, [](double x, double y) { return x * y; }); }
    V vneg(const V& a) const { return map(a, [](double x) { return -x; }); }
    V vrelu(const V& a) const { return map(a, [](double x) { return x > 0 ? x : 0.0; }); }
    V vsin(const V& a) const { return map(a, [](double x) { return std::sin(x); }); }
    V vcos(const V& a) const { return map(a, [](double x) { return std::cos(x); }); }
    V vexp(const V& a) const { return map(a, [](double x) { return std::exp(x); }); }
    V vadd_const(const V& a, double c) const { return map(a, [c](double x) { return x + c; }); }
    V smul(S s, const V& v) const { return map(v, [s](double x) { return s * x; }); }

    S dot(const V& a, const V& b) const {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    S norm(const V& a) const { return std::sqrt(dot(a, a)); }
    S sum(const V& a) const {
        double s = 0.0;
        for (double x : a) s += x;
        return s;
    }

    V matvec(const V& w, int rows, int cols, const V& x) const {
        V out(static_cast<std::size_t>(rows), 0.0);
        for (int i = 0; i < rows; ++i) {
            double acc = 0.0;
            const double* row = w.data() + static_cast<std::size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = acc;
        }
        return out;
    }

    V concat(std::span<const V> parts) const {
        V out;
        for (const V& p : parts) out.insert(out.end(), p.begin(), p.end());
        return out;
    }
    V slice(const V& a, int start, int len) const {
        return V(a.begin() + start, a.begin() + start + len);
    }
    V even(const V& a) const {
        V out((a.size() + 1) / 2);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[2 * i];
        return out;
    }
    V odd(const V& a) const {
        V out(a.size() / 2);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[2 * i + 1];
        return out;
    }
    V interleave(const V& a, const V& b) const {
        V out(a.size() * 2);
        for (std::size_t i = 0; i < a.size(); ++i) {
            out[2 * i] = a[i];
            out[2 * i + 1] = b[i];
        }
        return out;
    }
    V softmax(const V& a) const {
        double m = *std::max_element(a.begin(), a.end());
        V out(a.size());
        double z = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) z += (out[i] = std::exp(a[i] - m));
        for (double& y : out) y /= z;
        return out;
    }
    S at(const V& a, int i) const { return a[static_cast<std::size_t>(i)]; }
    V from_scalars(std::span<const S> xs) const { return V(xs.begin(), xs.end()); }

private:
    template <class F>
    static V map(const V& a, F f) {
        V out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
        return out;
    }
    template <class F>
    static V zip(const V& a, const V& b, F f) {
        V out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
        return out;
    }
};

struct TapeBackend {
    Tape* t;
    using S = Var;
    using V = Var;
    static constexpr bool taped = true;

    explicit TapeBackend(Tape& tape) : t(&tape) {}

    S cs(double x) const { return t->constant(x); }
    V cv(std::vector<double> v) const { return t->constant_vec(std::move(v)); }
    double val(S s) const { return t->scalar_value(s); }
    std::vector<double> values(const V& v) const { return t->value(v); }
    int size(const V& v) const { return t->size(v); }

    S add(S a, S b) const { return t->add(a, b); }
    S sub(S a, S b) const { return t->sub(a, b); }
    S mul(S a, S b) const { return t->mul(a, b); }
    S div(S a, S b) const { return t->div(a, b); }
    S neg(S a) const { return t->neg(a); }
    S add_const(S a, double c) const { return t->add_const(a, c); }
    S scale_const(S a, double c) const { return t->scale_const(a, c); }
    S tanh_(S a) const { return t->tanh_(a); }
    S tan_(S a) const { return t->tan_(a); }
    S atan_(S a) const { return t->atan_(a); }
    S atanh_(S a) const { return t->atanh_(a); }
    S exp_(S a) const { return t->exp_(a); }
    S log_(S a) const { return t->log_(a); }
    S softplus_(S a) const { return t->softplus_(a); }
    S relu_(S a) const { return t->relu_(a); }
    S maximum(S a, S b) const { return t->maximum(a, b); }

    V vadd(V a, V b) const { return t->add(a, b); }
    V vsub(V a, V b) const { return t->sub(a, b); }
    V vmul(V a, V b) const { return t->mul(a, b); }
    V vneg(V a) const { return t->neg(a); }
    V vrelu(V a) const { return t->relu_(a); }
    V vsin(V a) const { return t->sin_(a); }
    V vcos(V a) const { return t->cos_(a); }
    V vexp(V a) const { return t->exp_(a); }
    V vadd_const(V a, double c) const { return t->add_const(a, c); }
    V smul(S s, V v) const { return t->smul(s, v); }

    S dot(V a, V b) const { return t->dot(a, b); }
    S norm(V a) const { return t->norm(a); }
    S sum(V a) const { return t->sum(a); }
    V matvec(V w, int rows, int cols, V x) const { return t->matvec(w, rows, cols, x); }
    V concat(std::span<const V> parts) const { return t->concat(parts); }
    V slice(V a, int start, int len) const { return t->slice(a, start, len); }
    V even(V a) const { return t->even(a); }
    V odd(V a) const { return t->odd(a); }
    V interleave(V a, V b) const { return t->interleave(a, b); }
    V softmax(V a) const { return t->softmax_(a); }
    S at(V a, int i) const { return t->slice(a, i, 1); }
    V from_scalars(std::span<const S> xs) const { return t->concat(xs); }
};

// Per-backend view of the parameter store: name -> whole array as one V.
template <class B>
using ParamMap = std::map<std::string, typename B::V>;

}  // namespace swx
