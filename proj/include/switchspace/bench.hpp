#pragma once

#include <cstdint>

namespace swx {

// Times eager tail scoring for a synthetic model with `n_spaces` equal
// hyperbolic components. The gate runs once per (h, r) query and is shared by
// all candidate tails, so the per-candidate cost depends on K, not on N.
struct SweepPoint {
    int n_spaces = 0;
    double sec_per_candidate = 0.0;
    long dist_evals = 0;  // manifold distance evaluations during the sweep
};

SweepPoint time_kg_scoring(int n_spaces, int k, int dim, int n_entities, int n_queries,
                           std::uint64_t seed);

}  // namespace swx
