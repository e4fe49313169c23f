#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "switchspace/backend.hpp"

namespace swx {

// Below this curvature magnitude every operation takes its exact Euclidean
// limit branch (tan_c/arctan_c lose precision as c -> 0).
inline constexpr double kCurvatureEps = 1e-7;

enum class SpaceKind { Euclidean, PoincareBall, ProjSphere };  // E, P, D

inline char kind_letter(SpaceKind k) {
    switch (k) {
        case SpaceKind::Euclidean: return 'E';
        case SpaceKind::PoincareBall: return 'P';
        case SpaceKind::ProjSphere: return 'D';
    }
    return '?';
}

inline int kind_sign(SpaceKind k) {
    switch (k) {
        case SpaceKind::Euclidean: return 0;
        case SpaceKind::PoincareBall: return -1;
        case SpaceKind::ProjSphere: return 1;
    }
    return 0;
}

// One constant-curvature component of a product space.
struct ComponentSpace {
    SpaceKind kind = SpaceKind::Euclidean;
    int dim = 0;
    double curvature = 0.0;  // sign matches kind; 0 for Euclidean
    bool trainable_curvature = false;
    double raw_curvature = 0.0;  // curvature = sign * softplus(raw) when trainable

    bool operator==(const ComponentSpace&) const = default;
};

// Counts component distance evaluations; the computational-sparsity and
// constant-cost checks read it.
inline thread_local long g_dist_evals = 0;

// Curvature in backend scalars. sign is fixed at construction (a space never
// changes type); sign == 0 selects the exact flat branch everywhere.
template <class B>
struct Curv {
    int sign = 0;
    typename B::S c{};         // signed curvature
    typename B::S sqrt_abs{};  // sqrt(|c|)
};

template <class B>
typename B::S sqrt_scalar(const B& bk, typename B::S x) {
    return bk.exp_(bk.scale_const(bk.log_(x), 0.5));
}

template <class B>
Curv<B> make_curv(const B& bk, double c) {
    Curv<B> out;
    if (std::abs(c) < kCurvatureEps) {
        out.sign = 0;
        return out;
    }
    out.sign = c > 0 ? 1 : -1;
    out.c = bk.cs(c);
    out.sqrt_abs = bk.cs(std::sqrt(std::abs(c)));
    return out;
}

// Trainable curvature: |c| = softplus(raw), sign fixed by the space kind.
template <class B>
Curv<B> curv_from_raw(const B& bk, int sign, typename B::S raw) {
    if (sign == 0) throw ContractViolation("curv_from_raw: Euclidean curvature is not trainable");
    Curv<B> out;
    out.sign = sign;
    typename B::S mag = bk.softplus_(raw);
    out.c = sign > 0 ? mag : bk.neg(mag);
    out.sqrt_abs = sqrt_scalar(bk, mag);
    return out;
}

// tan for spherical (sign>0), tanh for hyperbolic (sign<0), identity flat.
template <class B>
typename B::S tan_c(const B& bk, typename B::S z, int sign) {
    if (sign == 0) return z;
    if (sign < 0) return bk.tanh_(z);
    double zv = bk.val(z);
    double m = std::remainder(zv, std::numbers::pi);
    if (std::abs(std::abs(m) - std::numbers::pi / 2) < 1e-9)
        throw DomainError("tan_c: argument too close to a pole");
    return bk.tan_(z);
}

template <class B>
typename B::S arctan_c(const B& bk, typename B::S z, int sign) {
    if (sign == 0) return z;
    return sign < 0 ? bk.atanh_(z) : bk.atan_(z);
}

// Möbius addition of the gyrovector space (both curvature signs).
template <class B>
typename B::V mobius_add(const B& bk, const typename B::V& x, const typename B::V& y,
                         const Curv<B>& k) {
    using S = typename B::S;
    if (k.sign == 0) return bk.vadd(x, y);
    S xy = bk.dot(x, y);
    S x2 = bk.dot(x, x);
    S y2 = bk.dot(y, y);
    S two_c_xy = bk.scale_const(bk.mul(k.c, xy), 2.0);
    S ax = bk.add_const(bk.neg(bk.add(two_c_xy, bk.mul(k.c, y2))), 1.0);
    S ay = bk.add_const(bk.mul(k.c, x2), 1.0);
    S den = bk.add_const(bk.sub(bk.mul(bk.mul(k.c, k.c), bk.mul(x2, y2)), two_c_xy), 1.0);
    if (std::abs(bk.val(den)) < 1e-15)
        throw NumericFailure("mobius_add", "singular denominator (antipodal points)");
    return bk.vadd(bk.smul(bk.div(ax, den), x), bk.smul(bk.div(ay, den), y));
}

// Gyrospace distance; exactly 2||x-y|| in the flat branch.
template <class B>
typename B::S dist(const B& bk, const typename B::V& x, const typename B::V& y,
                   const Curv<B>& k) {
    ++g_dist_evals;
    if (k.sign == 0) return bk.scale_const(bk.norm(bk.vsub(x, y)), 2.0);
    typename B::V m = mobius_add(bk, bk.vneg(x), y, k);
    typename B::S arg = bk.mul(k.sqrt_abs, bk.norm(m));
    return bk.scale_const(bk.div(arctan_c(bk, arg, k.sign), k.sqrt_abs), 2.0);
}

template <class B>
typename B::S sq_dist(const B& bk, const typename B::V& x, const typename B::V& y,
                      const Curv<B>& k) {
    typename B::S d = dist(bk, x, y, k);
    return bk.mul(d, d);
}

// lambda_x^c = 2 / (1 + c ||x||^2)
template <class B>
typename B::S conformal_factor(const B& bk, const typename B::V& x, const Curv<B>& k) {
    if (k.sign == 0) return bk.cs(2.0);
    typename B::S den = bk.add_const(bk.mul(k.c, bk.dot(x, x)), 1.0);
    if (bk.val(den) <= 1e-15)
        throw DomainError("conformal_factor: point outside the valid region");
    return bk.div(bk.cs(2.0), den);
}

// Exponential map at x. Flat branch: x + v.
template <class B>
typename B::V exp_map(const B& bk, const typename B::V& x, const typename B::V& v,
                      const Curv<B>& k) {
    using S = typename B::S;
    if (k.sign == 0) return bk.vadd(x, v);
    S nv = bk.norm(v);
    if (bk.val(nv) < 1e-15) return x;
    S lam = conformal_factor(bk, x, k);
    S arg = bk.scale_const(bk.mul(k.sqrt_abs, bk.mul(lam, nv)), 0.5);
    if (k.sign > 0 && bk.val(arg) >= std::numbers::pi / 2 - 1e-6)
        throw DomainError("exp_map: tangent vector wraps around the sphere");
    typename B::V u = bk.smul(bk.div(tan_c(bk, arg, k.sign), bk.mul(k.sqrt_abs, nv)), v);
    return mobius_add(bk, x, u, k);
}

// Logarithmic map at x. Flat branch: y - x.
template <class B>
typename B::V log_map(const B& bk, const typename B::V& x, const typename B::V& y,
                      const Curv<B>& k) {
    using S = typename B::S;
    if (k.sign == 0) return bk.vsub(y, x);
    typename B::V m = mobius_add(bk, bk.vneg(x), y, k);
    S nm = bk.norm(m);
    if (bk.val(nm) < 1e-15)
        return bk.cv(std::vector<double>(static_cast<std::size_t>(bk.size(x)), 0.0));
    S lam = conformal_factor(bk, x, k);
    S coef = bk.div(bk.scale_const(arctan_c(bk, bk.mul(k.sqrt_abs, nm), k.sign), 2.0),
                    bk.mul(bk.mul(k.sqrt_abs, lam), nm));
    return bk.smul(coef, m);
}

// exp/log at the origin (lambda_0 = 2 cancels the halves).
template <class B>
typename B::V exp_map_origin(const B& bk, const typename B::V& v, const Curv<B>& k) {
    using S = typename B::S;
    if (k.sign == 0) return v;
    S nv = bk.norm(v);
    if (bk.val(nv) < 1e-12) return v;  // tan_c(z)/z -> 1
    S arg = bk.mul(k.sqrt_abs, nv);
    if (k.sign > 0 && bk.val(arg) >= std::numbers::pi / 2 - 1e-6)
        throw DomainError("exp_map: tangent vector wraps around the sphere");
    return bk.smul(bk.div(tan_c(bk, arg, k.sign), arg), v);
}

template <class B>
typename B::V log_map_origin(const B& bk, const typename B::V& y, const Curv<B>& k) {
    using S = typename B::S;
    if (k.sign == 0) return y;
    S ny = bk.norm(y);
    if (bk.val(ny) < 1e-12) return y;
    S arg = bk.mul(k.sqrt_abs, ny);
    return bk.smul(bk.div(arctan_c(bk, arg, k.sign), arg), y);
}

// --- eager convenience wrappers (plain doubles) ----------------------------

double tan_c(double z, double c);
double arctan_c(double z, double c);
std::vector<double> mobius_add(const std::vector<double>& x, const std::vector<double>& y,
                               double c);
double dist(const std::vector<double>& x, const std::vector<double>& y, double c);
double conformal_factor(const std::vector<double>& x, double c);
std::vector<double> exp_map(const std::vector<double>& x, const std::vector<double>& v,
                            double c);
std::vector<double> log_map(const std::vector<double>& x, const std::vector<double>& y,
                            double c);
std::vector<double> exp_map_origin(const std::vector<double>& v, double c);
std::vector<double> log_map_origin(const std::vector<double>& y, double c);

// Numerical guard for the ball constraint: rescales points that drifted onto
// or past the boundary. Identity for c >= 0.
std::vector<double> project_to_domain(std::vector<double> x, double c);

}  // namespace swx
