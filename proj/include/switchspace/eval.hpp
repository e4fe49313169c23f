#pragma once

#include <functional>
#include <span>

#include "switchspace/data.hpp"

namespace swx {

enum class Split { Train, Valid, Test };

struct KGMetrics {
    double mrr = 0.0, hr1 = 0.0, hr3 = 0.0, hr10 = 0.0;
    int n_ranks = 0;  // two per test triple (tail and head direction)
};

// Scores every entity as the tail of (h, r). Relation ids in
// [n_relations, 2*n_relations) are reciprocal: head prediction for (h, r, t)
// is tail prediction for (t, r + |R|, h).
using KGScorer = std::function<void(int h, int r, std::span<double> scores)>;

// Filtered ranking over both directions. Other known-true completions are
// removed from the candidate list; the true entity itself is always kept and
// ranked pessimistically (after equal-scored competitors).
KGMetrics kg_rank_metrics(const KGScorer& scorer, const TripleStore& store, Split split);

struct RecMetrics {
    double map = 0.0, p5 = 0.0, p10 = 0.0, r5 = 0.0, r10 = 0.0;
    int n_users = 0;  // users with at least one item in the evaluated split
};

using RecScorer = std::function<void(int u, std::span<double> scores)>;

// Ranks all items outside the user's training set; relevance is membership in
// the evaluated split. Ties break by item id.
RecMetrics rec_rank_metrics(const RecScorer& scorer, const InteractionStore& store, Split split);

}  // namespace swx
