#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "switchspace/eval.hpp"

using namespace swx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

TripleStore toy_kg(const std::string& dirname) {
    TempDir dir(dirname);
    write_file(dir.path / "train.txt",
               "a\tlikes\tb\n"
               "b\tlikes\tc\n"
               "a\tknows\tc\n");
    write_file(dir.path / "valid.txt", "c\tlikes\ta\n");
    write_file(dir.path / "test.txt", "a\tlikes\tc\n");
    return load_kg(dir.path.string());
}

}  // namespace

TEST_CASE("load_kg interns names in order of appearance and indexes all splits") {
    TripleStore s = toy_kg("swx_kg_load");
    CHECK(s.n_entities() == 3);
    CHECK(s.n_relations() == 2);
    CHECK(s.entity_names == std::vector<std::string>{"a", "b", "c"});
    CHECK(s.relation_names == std::vector<std::string>{"likes", "knows"});
    CHECK(s.train.size() == 3);
    CHECK(s.valid.size() == 1);
    CHECK(s.test.size() == 1);
    CHECK(s.train[0] == std::array<int, 3>{0, 0, 1});
    CHECK(s.is_true(0, 0, 1));
    CHECK(s.is_true(0, 0, 2));  // test triples count as known-true
    CHECK_FALSE(s.is_true(1, 0, 0));
}

TEST_CASE("load_kg reports malformed lines with their position") {
    TempDir dir("swx_kg_bad");
    write_file(dir.path / "train.txt", "a\tlikes\tb\nbroken line\n");
    write_file(dir.path / "valid.txt", "");
    write_file(dir.path / "test.txt", "");
    CHECK_THROWS_WITH_AS(load_kg(dir.path.string()), doctest::Contains(":2"),
                         std::runtime_error);
    CHECK_THROWS_AS(load_kg((dir.path / "missing").string()), std::runtime_error);
}

TEST_CASE("split_interactions: 10 events -> 7 train / 1 valid / 2 test, disjoint") {
    std::vector<RawEvent> events;
    for (int i = 0; i < 10; ++i) events.push_back({"u1", "i" + std::to_string(i)});
    Rng rng(5);
    InteractionStore s = split_interactions(events, 0.7, 0.1, 0.2, rng);
    REQUIRE(s.n_users() == 1);
    CHECK(s.n_items() == 10);
    CHECK(s.train[0].size() == 7);
    CHECK(s.valid[0].size() == 1);
    CHECK(s.test[0].size() == 2);
    std::vector<int> all = s.train[0];
    all.insert(all.end(), s.valid[0].begin(), s.valid[0].end());
    all.insert(all.end(), s.test[0].begin(), s.test[0].end());
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

    // deterministic under the seed
    Rng rng2(5);
    InteractionStore s2 = split_interactions(events, 0.7, 0.1, 0.2, rng2);
    CHECK(s2.train[0] == s.train[0]);
    CHECK(s2.test[0] == s.test[0]);
}

TEST_CASE("split_interactions de-duplicates repeat events") {
    std::vector<RawEvent> events = {{"u", "a"}, {"u", "a"}, {"u", "b"}};
    Rng rng(1);
    InteractionStore s = split_interactions(events, 1.0, 0.0, 0.0, rng);
    CHECK(s.total_events() == 2);
}

TEST_CASE("load_movielens reads both the tab and the '::' formats") {
    TempDir dir("swx_ml");
    write_file(dir.path / "u.data", "1\t10\t5\t881250949\n1\t20\t3\t881250950\n"
                                    "2\t10\t4\t881250951\n");
    Rng r1(2);
    InteractionStore a = load_movielens(dir.path.string(), r1);
    CHECK(a.n_users() == 2);
    CHECK(a.n_items() == 2);
    CHECK(a.total_events() == 3);

    write_file(dir.path / "ml1m.dat", "1::10::5::1\n2::20::3::2\n");
    Rng r2(2);
    InteractionStore b = load_movielens((dir.path / "ml1m.dat").string(), r2);
    CHECK(b.n_users() == 2);
    CHECK(b.total_events() == 2);
}

TEST_CASE("kg ranking: a perfect scorer gets MRR 1 in both directions") {
    TripleStore s = toy_kg("swx_kg_rank1");
    // test triple: (a, likes, c) => tail query (0,0,*) -> 2, head query (2, likes+|R|, *) -> 0
    KGScorer scorer = [&](int h, int r, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (h == 0 && r == 0) out[2] = 1.0;
        if (h == 2 && r == 2) out[0] = 1.0;
    };
    KGMetrics m = kg_rank_metrics(scorer, s, Split::Test);
    CHECK(m.n_ranks == 2);
    CHECK(m.mrr == doctest::Approx(1.0));
    CHECK(m.hr1 == doctest::Approx(1.0));
    CHECK(m.hr10 == doctest::Approx(1.0));
}

TEST_CASE("kg ranking filters other true completions") {
    TempDir dir("swx_kg_filter");
    // (a, r, b) and (a, r, c) are both true; test asks for (a, r, c).
    write_file(dir.path / "train.txt", "a\tr\tb\n");
    write_file(dir.path / "valid.txt", "b\tr\ta\n");
    write_file(dir.path / "test.txt", "a\tr\tc\n");
    TripleStore s = load_kg(dir.path.string());
    // scorer ranks b above c for the tail query; b must be filtered out
    KGScorer scorer = [&](int h, int r, std::span<double> out) {
        std::fill(out.begin(), out.end(), -1.0);
        if (h == 0 && r == 0) {
            out[1] = 5.0;  // b: true completion, filtered
            out[2] = 1.0;  // c: the asked-for tail
        }
        if (h == 2 && r == 1) out[0] = 9.0;  // reciprocal head query
    };
    KGMetrics m = kg_rank_metrics(scorer, s, Split::Test);
    CHECK(m.n_ranks == 2);
    CHECK(m.mrr == doctest::Approx(1.0));
}

TEST_CASE("kg ranking ties are pessimistic") {
    TripleStore s = toy_kg("swx_kg_ties");
    KGScorer constant = [](int, int, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.5);
    };
    // tail query (a, likes, *): b is a known true tail and is filtered, so a
    // and c tie -> pessimistic rank 2. Head query (c, likes^-1, *): b is a
    // known true head of (?, likes, c) and is filtered, so a and c tie ->
    // rank 2 as well. MRR = 1/2.
    KGMetrics m = kg_rank_metrics(constant, s, Split::Test);
    CHECK(m.mrr == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.hr3 == doctest::Approx(1.0));
    CHECK(m.hr1 == doctest::Approx(0.0));
}

TEST_CASE("rec ranking: average precision on a constructed example") {
    // one user, 5 items; train = {0}, test = {1, 3}; candidates are 1..4.
    InteractionStore s;
    s.user_names = {"u"};
    s.user_ids = {{"u", 0}};
    s.item_names = {"a", "b", "c", "d", "e"};
    for (int i = 0; i < 5; ++i) s.item_ids[s.item_names[static_cast<std::size_t>(i)]] = i;
    s.train = {{0}};
    s.valid = {{}};
    s.test = {{1, 3}};
    // scores rank candidates as 2, 1, 4, 3: relevant at positions 2 and 4
    RecScorer scorer = [](int, std::span<double> out) {
        out[0] = 99.0;  // in the train set: excluded from candidates
        out[1] = 3.0;
        out[2] = 4.0;
        out[3] = 1.0;
        out[4] = 2.0;
    };
    RecMetrics m = rec_rank_metrics(scorer, s, Split::Test);
    CHECK(m.n_users == 1);
    // AP = (1/2 + 2/4) / 2 = 0.5
    CHECK(m.map == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.p5 == doctest::Approx(2.0 / 5.0));
    CHECK(m.r5 == doctest::Approx(1.0));
    CHECK(m.p10 == doctest::Approx(2.0 / 10.0));
    CHECK(m.r10 == doctest::Approx(1.0));
}

TEST_CASE("rec ranking breaks score ties by item id") {
    InteractionStore s;
    s.user_names = {"u"};
    s.item_names = {"a", "b", "c"};
    s.train = {{}};
    s.valid = {{}};
    s.test = {{2}};
    RecScorer tied = [](int, std::span<double> out) { std::fill(out.begin(), out.end(), 1.0); };
    RecMetrics m = rec_rank_metrics(tied, s, Split::Test);
    // relevant item 2 lands at position 3 of 3 -> AP = 1/3
    CHECK(m.map == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("rec ranking skips users with no items in the split") {
    InteractionStore s;
    s.user_names = {"u", "v"};
    s.item_names = {"a", "b"};
    s.train = {{}, {0}};
    s.valid = {{}, {}};
    s.test = {{}, {1}};
    RecScorer scorer = [](int, std::span<double> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(i);
    };
    RecMetrics m = rec_rank_metrics(scorer, s, Split::Test);
    CHECK(m.n_users == 1);
    CHECK(m.map == doctest::Approx(1.0));
}
