#include "switchspace/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace swx {

namespace {

int intern(const std::string& name, std::unordered_map<std::string, int>& ids,
           std::vector<std::string>& names) {
    auto [it, fresh] = ids.emplace(name, static_cast<int>(names.size()));
    if (fresh) names.push_back(name);
    return it->second;
}

std::vector<std::array<std::string, 3>> read_triple_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open KG file: " + path);
    std::vector<std::array<std::string, 3>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<std::string, 3> parts;
        std::size_t start = 0;
        int field = 0;
        for (; field < 2; ++field) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected 3 tab-separated fields");
            parts[static_cast<std::size_t>(field)] = line.substr(start, tab - start);
            start = tab + 1;
        }
        parts[2] = line.substr(start);
        // strip a trailing carriage return from dos-style files
        if (!parts[2].empty() && parts[2].back() == '\r') parts[2].pop_back();
        if (parts[0].empty() || parts[1].empty() || parts[2].empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty field");
        out.push_back(std::move(parts));
    }
    return out;
}

}  // namespace

TripleStore load_kg(const std::string& dir) {
    TripleStore store;
    struct SplitFile {
        const char* name;
        std::vector<std::array<int, 3>>* dst;
    };
    std::array<SplitFile, 3> files = {{{"train.txt", &store.train},
                                       {"valid.txt", &store.valid},
                                       {"test.txt", &store.test}}};
    for (const auto& f : files) {
        auto path = (std::filesystem::path(dir) / f.name).string();
        for (auto& [h, r, t] : read_triple_file(path)) {
            int hi = intern(h, store.entity_ids, store.entity_names);
            int ri = intern(r, store.relation_ids, store.relation_names);
            int ti = intern(t, store.entity_ids, store.entity_names);
            f.dst->push_back({hi, ri, ti});
        }
    }
    for (const auto* split : {&store.train, &store.valid, &store.test})
        for (const auto& [h, r, t] : *split) store.true_keys.insert(store.key(h, r, t));
    return store;
}

InteractionStore split_interactions(const std::vector<RawEvent>& events, double train_ratio,
                                    double val_ratio, double test_ratio, Rng& rng) {
    if (train_ratio + val_ratio + test_ratio > 1.0 + 1e-9)
        throw std::invalid_argument("split_interactions: ratios exceed 1");
    InteractionStore store;
    std::vector<std::vector<int>> per_user;
    for (const auto& ev : events) {
        int u = intern(ev.user, store.user_ids, store.user_names);
        int i = intern(ev.item, store.item_ids, store.item_names);
        if (u >= static_cast<int>(per_user.size())) per_user.resize(static_cast<std::size_t>(u) + 1);
        per_user[static_cast<std::size_t>(u)].push_back(i);
    }
    const auto nu = per_user.size();
    store.train.resize(nu);
    store.valid.resize(nu);
    store.test.resize(nu);
    for (std::size_t u = 0; u < nu; ++u) {
        auto& items = per_user[u];
        // de-duplicate repeated interactions, then Fisher-Yates with our rng
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[rng.next_below(i)]);
        auto n = items.size();
        auto n_val = static_cast<std::size_t>(val_ratio * static_cast<double>(n));
        auto n_test = static_cast<std::size_t>(test_ratio * static_cast<double>(n));
        store.valid[u].assign(items.begin(), items.begin() + n_val);
        store.test[u].assign(items.begin() + n_val, items.begin() + n_val + n_test);
        store.train[u].assign(items.begin() + n_val + n_test, items.end());
    }
    return store;
}

InteractionStore load_movielens(const std::string& path, Rng& rng) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (fs::is_directory(p)) {
        if (fs::exists(p / "u.data")) p /= "u.data";
        else if (fs::exists(p / "ratings.dat")) p /= "ratings.dat";
        else throw std::runtime_error("no u.data or ratings.dat under " + path);
    }
    std::ifstream is(p);
    if (!is) throw std::runtime_error("cannot open interactions file: " + p.string());
    std::vector<RawEvent> events;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string user, item;
        if (line.find("::") != std::string::npos) {
            std::size_t a = line.find("::");
            std::size_t b = line.find("::", a + 2);
            if (b == std::string::npos)
                throw std::runtime_error(p.string() + ":" + std::to_string(line_no) +
                                         ": malformed '::' record");
            user = line.substr(0, a);
            item = line.substr(a + 2, b - a - 2);
        } else {
            std::istringstream ls(line);
            if (!(ls >> user >> item))
                throw std::runtime_error(p.string() + ":" + std::to_string(line_no) +
                                         ": malformed record");
        }
        events.push_back({std::move(user), std::move(item)});  // implicit feedback: rating -> 1
    }
    return split_interactions(events, 0.7, 0.1, 0.2, rng);
}

}  // namespace swx
