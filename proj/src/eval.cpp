#include "switchspace/eval.hpp"

#include <algorithm>
#include <unordered_map>

namespace swx {

namespace {

const std::vector<std::array<int, 3>>& pick_split(const TripleStore& s, Split split) {
    switch (split) {
        case Split::Train: return s.train;
        case Split::Valid: return s.valid;
        case Split::Test: return s.test;
    }
    return s.test;
}

}  // namespace

KGMetrics kg_rank_metrics(const KGScorer& scorer, const TripleStore& store, Split split) {
    // filter indices over all splits: (h,r) -> true tails, (t,r) -> true heads
    std::unordered_map<std::uint64_t, std::vector<int>> true_tails, true_heads;
    const auto nr = static_cast<std::uint64_t>(store.n_relations());
    auto qkey = [nr](int e, int r) {
        return static_cast<std::uint64_t>(e) * nr + static_cast<std::uint64_t>(r);
    };
    for (const auto* sp : {&store.train, &store.valid, &store.test})
        for (const auto& [h, r, t] : *sp) {
            true_tails[qkey(h, r)].push_back(t);
            true_heads[qkey(t, r)].push_back(h);
        }

    const int ne = store.n_entities();
    std::vector<double> scores(static_cast<std::size_t>(ne));
    std::vector<char> filtered(static_cast<std::size_t>(ne));

    KGMetrics m;
    double mrr = 0.0, h1 = 0.0, h3 = 0.0, h10 = 0.0;

    auto rank_one = [&](int query_e, int rel, int truth,
                        const std::vector<int>& filter_list) {
        scorer(query_e, rel, scores);
        std::fill(filtered.begin(), filtered.end(), 0);
        for (int e : filter_list) filtered[static_cast<std::size_t>(e)] = 1;
        filtered[static_cast<std::size_t>(truth)] = 0;  // never filter the ranked entity
        double st = scores[static_cast<std::size_t>(truth)];
        int rank = 1;
        for (int e = 0; e < ne; ++e) {
            if (e == truth || filtered[static_cast<std::size_t>(e)]) continue;
            if (scores[static_cast<std::size_t>(e)] >= st) ++rank;  // pessimistic ties
        }
        mrr += 1.0 / rank;
        h1 += rank <= 1;
        h3 += rank <= 3;
        h10 += rank <= 10;
        ++m.n_ranks;
    };

    static const std::vector<int> kEmpty;
    for (const auto& [h, r, t] : pick_split(store, split)) {
        auto it = true_tails.find(qkey(h, r));
        rank_one(h, r, t, it == true_tails.end() ? kEmpty : it->second);
        auto ih = true_heads.find(qkey(t, r));
        rank_one(t, r + store.n_relations(), h, ih == true_heads.end() ? kEmpty : ih->second);
    }
    if (m.n_ranks > 0) {
        m.mrr = mrr / m.n_ranks;
        m.hr1 = h1 / m.n_ranks;
        m.hr3 = h3 / m.n_ranks;
        m.hr10 = h10 / m.n_ranks;
    }
    return m;
}

RecMetrics rec_rank_metrics(const RecScorer& scorer, const InteractionStore& store, Split split) {
    const int ni = store.n_items();
    std::vector<double> scores(static_cast<std::size_t>(ni));
    RecMetrics m;
    double map = 0.0, p5 = 0.0, p10 = 0.0, r5 = 0.0, r10 = 0.0;

    for (int u = 0; u < store.n_users(); ++u) {
        const auto& rel_items = (split == Split::Test ? store.test : store.valid)[static_cast<std::size_t>(u)];
        if (rel_items.empty()) continue;

        scorer(u, scores);
        std::vector<char> in_train(static_cast<std::size_t>(ni), 0);
        for (int i : store.train[static_cast<std::size_t>(u)]) in_train[static_cast<std::size_t>(i)] = 1;
        std::vector<char> relevant(static_cast<std::size_t>(ni), 0);
        int n_rel = 0;
        for (int i : rel_items)
            if (!in_train[static_cast<std::size_t>(i)]) {
                relevant[static_cast<std::size_t>(i)] = 1;
                ++n_rel;
            }
        if (n_rel == 0) continue;

        std::vector<int> cand;
        cand.reserve(static_cast<std::size_t>(ni));
        for (int i = 0; i < ni; ++i)
            if (!in_train[static_cast<std::size_t>(i)]) cand.push_back(i);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            double sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
            return sa != sb ? sa > sb : a < b;  // ties by item id
        });

        int hits = 0, hits5 = 0, hits10 = 0;
        double ap = 0.0;
        for (std::size_t pos = 0; pos < cand.size(); ++pos) {
            if (!relevant[static_cast<std::size_t>(cand[pos])]) continue;
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(pos + 1);
            if (pos < 5) ++hits5;
            if (pos < 10) ++hits10;
        }
        map += ap / n_rel;
        p5 += hits5 / 5.0;
        p10 += hits10 / 10.0;
        r5 += static_cast<double>(hits5) / n_rel;
        r10 += static_cast<double>(hits10) / n_rel;
        ++m.n_users;
    }
    if (m.n_users > 0) {
        map /= m.n_users;
        p5 /= m.n_users;
        p10 /= m.n_users;
        r5 /= m.n_users;
        r10 /= m.n_users;
        m.map = map;
        m.p5 = p5;
        m.p10 = p10;
        m.r5 = r5;
        m.r10 = r10;
    }
    return m;
}

}  // namespace swx
