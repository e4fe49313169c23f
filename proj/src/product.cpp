#include "switchspace/product.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace swx {

namespace {

double default_curvature(SpaceKind k) {
    switch (k) {
        case SpaceKind::Euclidean: return 0.0;
        case SpaceKind::PoincareBall: return -1.0;
        case SpaceKind::ProjSphere: return 1.0;
    }
    return 0.0;
}

[[noreturn]] void parse_fail(int token_index, const std::string& token, const std::string& why) {
    throw std::invalid_argument("signature parse error at token " + std::to_string(token_index + 1) +
                                " ('" + token + "'): " + why);
}

}  // namespace

Signature parse_signature(const std::string& text) {
    Signature sig;
    std::stringstream ss(text);
    std::string token;
    int index = 0;
    while (std::getline(ss, token, ',')) {
        // trim blanks
        std::size_t b = token.find_first_not_of(" \t");
        std::size_t e = token.find_last_not_of(" \t");
        if (b == std::string::npos) parse_fail(index, token, "empty token");
        token = token.substr(b, e - b + 1);

        ComponentSpace comp;
        switch (token[0]) {
            case 'E': comp.kind = SpaceKind::Euclidean; break;
            case 'P': comp.kind = SpaceKind::PoincareBall; break;
            case 'D': comp.kind = SpaceKind::ProjSphere; break;
            default: parse_fail(index, token, "unknown space kind (expected E, P or D)");
        }

        std::string rest = token.substr(1);
        std::string dim_part = rest, curv_part;
        if (auto at = rest.find('@'); at != std::string::npos) {
            dim_part = rest.substr(0, at);
            curv_part = rest.substr(at + 1);
        }

        int dim = 0;
        auto [p, ec] = std::from_chars(dim_part.data(), dim_part.data() + dim_part.size(), dim);
        if (ec != std::errc{} || p != dim_part.data() + dim_part.size())
            parse_fail(index, token, "bad dimension");
        if (dim <= 0) parse_fail(index, token, "dimension must be positive");
        comp.dim = dim;

        if (curv_part.empty()) {
            comp.curvature = default_curvature(comp.kind);
        } else {
            try {
                std::size_t used = 0;
                comp.curvature = std::stod(curv_part, &used);
                if (used != curv_part.size()) parse_fail(index, token, "bad curvature");
            } catch (const std::invalid_argument&) {
                parse_fail(index, token, "bad curvature");
            }
            int want = kind_sign(comp.kind);
            int got = std::abs(comp.curvature) < kCurvatureEps ? 0
                                                               : (comp.curvature > 0 ? 1 : -1);
            if (want != got) parse_fail(index, token, "curvature sign inconsistent with kind");
        }
        sig.components.push_back(comp);
        ++index;
    }
    if (sig.components.empty()) throw std::invalid_argument("signature parse error: empty signature");
    return sig;
}

std::string format_signature(const Signature& sig) {
    std::ostringstream os;
    bool first = true;
    for (const auto& c : sig.components) {
        if (!first) os << ',';
        first = false;
        os << kind_letter(c.kind) << c.dim;
        if (c.curvature != default_curvature(c.kind)) os << '@' << c.curvature;
    }
    return os.str();
}

ProductPoint split(std::span<const double> x, const Signature& sig) {
    if (static_cast<int>(x.size()) != sig.total_dim())
        throw ContractViolation("split: flat array length does not match signature total_dim");
    ProductPoint p;
    p.components.reserve(sig.components.size());
    std::size_t off = 0;
    for (const auto& c : sig.components) {
        p.components.emplace_back(x.begin() + off, x.begin() + off + c.dim);
        off += static_cast<std::size_t>(c.dim);
    }
    return p;
}

std::vector<double> concat_point(const ProductPoint& p) {
    std::vector<double> out;
    for (const auto& c : p.components) out.insert(out.end(), c.begin(), c.end());
    return out;
}

double product_sq_dist(const ProductPoint& x, const ProductPoint& y, const Signature& sig) {
    if (x.components.size() != sig.components.size() ||
        y.components.size() != sig.components.size())
        throw ContractViolation("product_sq_dist: component count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < sig.components.size(); ++i) {
        double d = dist(x.components[i], y.components[i], sig.components[i].curvature);
        total += d * d;
    }
    return total;
}

}  // namespace swx
