#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "switchspace/rng.hpp"

namespace swx {

// Knowledge-graph triples with dense entity/relation dictionaries and a
// membership index over all splits (used for filtered evaluation and for
// negative-sample rejection).
struct TripleStore {
    std::vector<std::string> entity_names, relation_names;
    std::unordered_map<std::string, int> entity_ids, relation_ids;
    std::vector<std::array<int, 3>> train, valid, test;  // {h, r, t}, base relations only
    std::unordered_set<std::uint64_t> true_keys;

    int n_entities() const { return static_cast<int>(entity_names.size()); }
    int n_relations() const { return static_cast<int>(relation_names.size()); }

    std::uint64_t key(int h, int r, int t) const {
        return (static_cast<std::uint64_t>(h) * static_cast<std::uint64_t>(n_relations()) +
                static_cast<std::uint64_t>(r)) *
                   static_cast<std::uint64_t>(n_entities()) +
               static_cast<std::uint64_t>(t);
    }
    bool is_true(int h, int r, int t) const { return true_keys.count(key(h, r, t)) > 0; }
};

// Loads train.txt/valid.txt/test.txt (tab-separated `head relation tail`).
TripleStore load_kg(const std::string& dir);

// Implicit-feedback interactions with a per-user train/val/test partition.
struct InteractionStore {
    std::vector<std::string> user_names, item_names;
    std::unordered_map<std::string, int> user_ids, item_ids;
    std::vector<std::vector<int>> train, valid, test;  // item ids per user

    int n_users() const { return static_cast<int>(user_names.size()); }
    int n_items() const { return static_cast<int>(item_names.size()); }
    std::size_t total_events() const {
        std::size_t n = 0;
        for (const auto& v : train) n += v.size();
        for (const auto& v : valid) n += v.size();
        for (const auto& v : test) n += v.size();
        return n;
    }
};

struct RawEvent {
    std::string user, item;
};

// Per-user random partition: floor(val_ratio*n) to validation, floor
// (test_ratio*n) to test, remainder to train. Deterministic under the seed.
InteractionStore split_interactions(const std::vector<RawEvent>& events, double train_ratio,
                                    double val_ratio, double test_ratio, Rng& rng);

// MovieLens raw files: `user \t item \t rating \t timestamp` (100K) or
// `user::item::rating::timestamp` (1M); ratings are binarized. `path` may be
// the ratings file or a directory containing u.data / ratings.dat.
InteractionStore load_movielens(const std::string& path, Rng& rng);

}  // namespace swx
