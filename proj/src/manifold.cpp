#include "switchspace/manifold.hpp"

namespace swx {

namespace {
const EagerBackend kEager{};
}

double tan_c(double z, double c) { return tan_c(kEager, z, make_curv(kEager, c).sign); }
double arctan_c(double z, double c) { return arctan_c(kEager, z, make_curv(kEager, c).sign); }

std::vector<double> mobius_add(const std::vector<double>& x, const std::vector<double>& y,
                               double c) {
    return mobius_add(kEager, x, y, make_curv(kEager, c));
}

double dist(const std::vector<double>& x, const std::vector<double>& y, double c) {
    return dist(kEager, x, y, make_curv(kEager, c));
}

double conformal_factor(const std::vector<double>& x, double c) {
    return conformal_factor(kEager, x, make_curv(kEager, c));
}

std::vector<double> exp_map(const std::vector<double>& x, const std::vector<double>& v,
                            double c) {
    return exp_map(kEager, x, v, make_curv(kEager, c));
}

std::vector<double> log_map(const std::vector<double>& x, const std::vector<double>& y,
                            double c) {
    return log_map(kEager, x, y, make_curv(kEager, c));
}

std::vector<double> exp_map_origin(const std::vector<double>& v, double c) {
    return exp_map_origin(kEager, v, make_curv(kEager, c));
}

std::vector<double> log_map_origin(const std::vector<double>& y, double c) {
    return log_map_origin(kEager, y, make_curv(kEager, c));
}

std::vector<double> project_to_domain(std::vector<double> x, double c) {
    if (c >= 0.0) return x;
    double max_norm = (1.0 - 1e-5) / std::sqrt(-c);
    double n = 0.0;
    for (double v : x) n += v * v;
    n = std::sqrt(n);
    if (n >= max_norm) {
        double s = max_norm / n;
        for (double& v : x) v *= s;
    }
    return x;
}

}  // namespace swx
