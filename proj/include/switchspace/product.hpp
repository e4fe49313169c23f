#pragma once

#include <span>
#include <string>
#include <vector>

#include "switchspace/manifold.hpp"

namespace swx {

// Ordered list of component spaces defining a product space.
struct Signature {
    std::vector<ComponentSpace> components;

    int total_dim() const {
        int n = 0;
        for (const auto& c : components) n += c.dim;
        return n;
    }
    int size() const { return static_cast<int>(components.size()); }
    // Offset of component i inside the flat embedding row.
    int offset(int i) const {
        int off = 0;
        for (int j = 0; j < i; ++j) off += components[static_cast<std::size_t>(j)].dim;
        return off;
    }
    bool uniform_dim() const {
        for (const auto& c : components)
            if (c.dim != components.front().dim) return false;
        return true;
    }
    bool operator==(const Signature&) const = default;
};

// Grammar: comma-separated tokens `<K><dim>[@<c0>]`, K in {E,P,D}.
// Defaults: E -> c=0, P -> c=-1, D -> c=+1. Throws std::invalid_argument with
// the offending token position on malformed input.
Signature parse_signature(const std::string& text);
std::string format_signature(const Signature& sig);

// A point of the product space, decomposed per component.
struct ProductPoint {
    std::vector<std::vector<double>> components;
};

// Contiguous slices of a flat row in signature order.
ProductPoint split(std::span<const double> x, const Signature& sig);
std::vector<double> concat_point(const ProductPoint& p);

// Product-space squared distance: the sum over components of the squared
// gyrospace distance.
double product_sq_dist(const ProductPoint& x, const ProductPoint& y, const Signature& sig);

}  // namespace swx
