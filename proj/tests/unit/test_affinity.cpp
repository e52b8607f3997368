// Copyright 2026 The simpop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "support/fixtures.hpp"

#include "simpop/affinity.hpp"
#include "simpop/errors.hpp"
#include "simpop/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace simpop;
using namespace simpop::testing;

TEST_CASE("popularity counts item references with a floor of one") {
    std::vector<Session> sessions;
    for (int k = 0; k < 7; ++k) {
        sessions.push_back(make_session("s" + std::to_string(k), {click("A", "A|B")}));
    }
    const SessionCorpus corpus(CorpusRole::Train, sessions);
    const auto pop = compute_popularity(corpus);
    CHECK(pop.find("A").value() == 7.0);
    CHECK(pop.find("B").value() == 1.0); // impressions only
    CHECK(compute_popularity(SessionCorpus(CorpusRole::Train, {})).empty());
    CHECK_THROWS_AS(PopularityTable().set("x", 0.5), InvalidArgument);
}

TEST_CASE("non-item references do not count") {
    const SessionCorpus corpus(CorpusRole::Train,
                               {make_session("s", {view("A"), {"search for destination", "Paris", ""}})});
    const auto counts = interaction_counts(corpus, false);
    CHECK(counts.count("Paris") == 0);
    CHECK(counts.at("A") == 1);
}

TEST_CASE("cosine co-occurrence on hand examples") {
    Incidence inc;
    inc["i"] = {"s1"};
    inc["j"] = {"s1"};
    CHECK(cosine_cooccurrence(inc, "i", "j") == 1.0);
    inc["a"] = {"s1", "s2"};
    inc["b"] = {"s2", "s3"};
    CHECK(cosine_cooccurrence(inc, "a", "b") == doctest::Approx(0.5).epsilon(1e-15));
    inc["c"] = {"s9"};
    CHECK(cosine_cooccurrence(inc, "a", "c") == 0.0);
    inc["e"] = {};
    CHECK_THROWS_AS(cosine_cooccurrence(inc, "a", "e"), UndefinedSimilarity);
    CHECK_THROWS_AS(cosine_cooccurrence(inc, "a", "nobody"), UndefinedSimilarity);
    CHECK_THROWS_AS(cosine_cooccurrence(inc, "a", "a"), InvalidArgument);
}

TEST_CASE("repeated interactions in one session count once") {
    const SessionCorpus corpus(CorpusRole::Train,
                               {item_session("s1", {"A", "A", "A", "B"}), item_session("s2", {"A"})});
    const auto inc = build_incidence(corpus);
    CHECK(inc.at("A").size() == 2);
    CHECK(cosine_cooccurrence(inc, "A", "B") == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("graph from two sessions [A,B] and [B,C]") {
    const SessionCorpus corpus(CorpusRole::Train, {item_session("s1", {"A", "B"}), item_session("s2", {"B", "C"})});
    const auto g = build_affinity_graph(corpus, {1, 0});
    CHECK(g.pair_count() == 2);
    CHECK(g.lookup("A", "B").value() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(g.lookup("C", "B").value() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK_FALSE(g.lookup("A", "C").has_value());
}

TEST_CASE("a single session [A] has no pairs") {
    const auto g = build_affinity_graph(SessionCorpus(CorpusRole::Train, {item_session("s", {"A"})}), {1, 0});
    CHECK(g.empty());
    CHECK(g.n_items() == 0);
}

TEST_CASE("min_sessions drops rare items") {
    const SessionCorpus corpus(CorpusRole::Train,
                               {item_session("s1", {"A", "B"}), item_session("s2", {"A", "B", "C"})});
    const auto g = build_affinity_graph(corpus, {2, 0});
    CHECK(g.pair_count() == 1);
    CHECK(g.lookup("A", "B").value() == doctest::Approx(1.0));
}

namespace {

// Brute-force top-k: per item the k best partners by (p desc, id asc),
// then the union of the kept pairs.
std::set<std::pair<std::string, std::string>> brute_top_k(const std::vector<std::set<std::string>>& sessions,
                                                          const std::vector<std::string>& vocab, int k) {
    std::set<std::pair<std::string, std::string>> kept;
    for (const auto& i : vocab) {
        std::vector<std::pair<double, std::string>> cand;
        for (const auto& j : vocab) {
            if (i == j) continue;
            const double p = oracle_cosine(sessions, i, j);
            if (p > 0) cand.push_back({-p, j});
        }
        std::sort(cand.begin(), cand.end());
        for (int t = 0; t < k && t < static_cast<int>(cand.size()); ++t) {
            kept.insert(std::minmax(i, cand[t].second));
        }
    }
    return kept;
}

struct RandomCorpus {
    SessionCorpus corpus;
    std::vector<std::set<std::string>> sets;
    std::vector<std::string> vocab;
};

RandomCorpus random_corpus(std::uint64_t seed, int n_sessions, int n_items) {
    Rng rng(seed);
    RandomCorpus out;
    std::vector<Session> sessions;
    std::set<std::string> vocab;
    for (int s = 0; s < n_sessions; ++s) {
        const int len = 1 + static_cast<int>(uniform_index(rng, 5));
        std::vector<std::string> items;
        std::set<std::string> set;
        for (int k = 0; k < len; ++k) {
            const std::string it = "x" + std::to_string(uniform_index(rng, n_items));
            items.push_back(it);
            set.insert(it);
            vocab.insert(it);
        }
        sessions.push_back(item_session("s" + std::to_string(s), items));
        out.sets.push_back(set);
    }
    out.corpus = SessionCorpus(CorpusRole::Train, sessions);
    out.vocab.assign(vocab.begin(), vocab.end());
    return out;
}

} // namespace

TEST_CASE("max_pairs_per_item = 1 on a three-pair graph keeps each item's top pair") {
    // p(A,B) = 1, p(B,C) = 1/sqrt(3), p(A,C) = 1/sqrt(3)... built so each
    // endpoint has a unique favourite.
    const SessionCorpus corpus(CorpusRole::Train, {item_session("s1", {"A", "B", "C"}), item_session("s2", {"A", "B"}),
                                                   item_session("s3", {"C"}), item_session("s4", {"C"})});
    const std::vector<std::set<std::string>> sets{{"A", "B", "C"}, {"A", "B"}, {"C"}, {"C"}};
    const auto g = build_affinity_graph(corpus, {1, 1});
    const auto want = brute_top_k(sets, {"A", "B", "C"}, 1);
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& p : g.pairs()) got.insert({p.i, p.j});
    CHECK(got == want);
    CHECK(got.size() == 2); // (A,B) for A and B, (A,C) or (B,C) for C
}

TEST_CASE("property: graph equals brute-force cosine on small corpora") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto rc = random_corpus(seed, 2 + static_cast<int>(seed % 9), 8);
        const auto g = build_affinity_graph(rc.corpus, {1, 0});
        std::size_t expected = 0;
        for (std::size_t a = 0; a < rc.vocab.size(); ++a) {
            for (std::size_t b = a + 1; b < rc.vocab.size(); ++b) {
                const double p = oracle_cosine(rc.sets, rc.vocab[a], rc.vocab[b]);
                const auto got = g.lookup(rc.vocab[a], rc.vocab[b]);
                if (p > 0) {
                    ++expected;
                    REQUIRE(got.has_value());
                    CHECK(*got == doctest::Approx(p).epsilon(1e-14));
                    CHECK(*g.lookup(rc.vocab[b], rc.vocab[a]) == *got);
                    CHECK(*got > 0.0);
                    CHECK(*got <= 1.0);
                } else {
                    CHECK_FALSE(got.has_value());
                }
            }
        }
        CHECK(g.pair_count() == expected);
    }
}

TEST_CASE("property: top-k pruning equals brute-force union") {
    for (std::uint64_t seed = 100; seed < 115; ++seed) {
        const auto rc = random_corpus(seed, 10, 9);
        for (int k : {1, 2, 3}) {
            const auto g = build_affinity_graph(rc.corpus, {1, k});
            std::set<std::pair<std::string, std::string>> got;
            for (const auto& p : g.pairs()) got.insert({p.i, p.j});
            CHECK(got == brute_top_k(rc.sets, rc.vocab, k));
        }
    }
}

TEST_CASE("property: adding a shared session never lowers the co-occurrence count") {
    for (std::uint64_t seed = 200; seed < 210; ++seed) {
        auto rc = random_corpus(seed, 6, 6);
        const auto before = build_incidence(rc.corpus);
        std::vector<Session> sessions(rc.corpus.sessions().begin(), rc.corpus.sessions().end());
        sessions.push_back(item_session("extra", {"x0", "x1"}));
        const auto after = build_incidence(SessionCorpus(CorpusRole::Train, sessions));
        const auto common = [](const Incidence& inc) {
            if (!inc.count("x0") || !inc.count("x1")) return std::size_t{0};
            std::size_t n = 0;
            for (const auto& s : inc.at("x0")) n += inc.at("x1").count(s);
            return n;
        };
        CHECK(common(after) == common(before) + 1);
    }
}

TEST_CASE("neighbours are sorted by p then id") {
    const auto rc = random_corpus(7, 12, 7);
    const auto g = build_affinity_graph(rc.corpus, {1, 0});
    for (std::uint32_t k = 0; k < g.n_items(); ++k) {
        const auto nb = g.neighbors(k);
        for (std::size_t t = 1; t < nb.size(); ++t) {
            const bool ordered = nb[t - 1].p > nb[t].p ||
                                 (nb[t - 1].p == nb[t].p && g.items()[nb[t - 1].item] < g.items()[nb[t].item]);
            CHECK(ordered);
        }
    }
}

TEST_CASE("graph files round-trip") {
    const auto rc = random_corpus(11, 12, 7);
    const auto g = build_affinity_graph(rc.corpus, {1, 0});
    const auto again = parse_graph(serialize_pairs(g), serialize_popularity(g.popularity()));
    CHECK(again.pairs() == g.pairs());
    CHECK(again.popularity().sorted() == g.popularity().sorted());
    CHECK_THROWS_AS(parse_graph("A\tA\t0.5\n", "A\t1\n"), ValidationError);
    CHECK_THROWS_AS(parse_graph("A\tB\t1.5\n", ""), ValidationError);
    CHECK_THROWS_AS(parse_graph("A\tB\n", ""), ParseError);
}
