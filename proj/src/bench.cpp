#include "switchspace/bench.hpp"

#include <chrono>
#include <string>

#include "switchspace/kg.hpp"

namespace swx {

SweepPoint time_kg_scoring(int n_spaces, int k, int dim, int n_entities, int n_queries,
                           std::uint64_t seed) {
    std::string sig;
    for (int i = 0; i < n_spaces; ++i) sig += (i ? ",P" : "P") + std::to_string(dim);

    KGModelConfig cfg;
    cfg.sig = parse_signature(sig);
    cfg.K = k;
    cfg.gate_variant = GateVariant::MatrixConv2d;
    KGModel model(cfg, n_entities, /*n_base_relations=*/8);
    Rng rng(seed);
    model.init_params(rng);

    ParamMap<EagerBackend> P = model.eager_params();
    std::vector<double> scores(static_cast<std::size_t>(n_entities));
    auto run_once = [&] {
        for (int q = 0; q < n_queries; ++q)
            model.score_all_tails(P, q % n_entities, q % model.n_relations_total(), scores);
    };

    run_once();  // warm up caches and the allocator
    using clock = std::chrono::steady_clock;
    double best = 1e300;
    long dist_evals = 0;
    for (int rep = 0; rep < 3; ++rep) {
        long before = g_dist_evals;
        auto t0 = clock::now();
        run_once();
        auto t1 = clock::now();
        dist_evals = g_dist_evals - before;
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }

    SweepPoint pt;
    pt.n_spaces = n_spaces;
    pt.sec_per_candidate = best / (static_cast<double>(n_queries) * n_entities);
    pt.dist_evals = dist_evals;
    return pt;
}

}  // namespace swx
