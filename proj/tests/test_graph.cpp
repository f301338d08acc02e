// Copyright 2026-present the vx project authors
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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "vx/flat.hpp"
#include "vx/graph.hpp"
#include "vx/metrics.hpp"

using namespace vx;

TEST_CASE("assign_level: boundary and closed-form draws") {
    HnswParams p;
    p.level_scale = 1.0;
    CHECK(assign_level(p, 0.999999999) == 0);
    CHECK(assign_level(p, std::exp(-2.0)) == 2);
    CHECK_THROWS_AS(assign_level(p, 0.0), DomainError);
    CHECK_THROWS_AS(assign_level(p, 1.0), DomainError);
}

TEST_CASE("assign_level: empirical frequencies match the geometric law") {
    const double M = 4.0;
    HnswParams p;
    p.level_scale = 1.0 / std::log(M);
    CounterRng rng(3);
    const int draws = 100000;
    std::vector<int> counts(32, 0);
    for (int i = 0; i < draws; ++i) ++counts[assign_level(p, rng.next_open_double())];
    // P(level = l) = (1 - 1/M) M^-l; compare bins with enough mass for the
    // 5% relative check to clear sampling noise.
    for (int l = 0;; ++l) {
        const double expected = draws * (1.0 - 1.0 / M) * std::pow(M, -l);
        if (expected < 2000.0) break;
        CHECK(std::abs(counts[l] - expected) / expected < 0.05);
    }
}

TEST_CASE("build: single node and two nodes") {
    const HnswIndex one(vxtest::random_set(1, 4, 5), HnswParams{});
    CHECK(one.size() == 1);
    CHECK(one.entry_point() == 0);
    CHECK(one.neighbors(0, 0).empty());

    const HnswIndex two(vxtest::random_set(2, 4, 6), HnswParams{});
    const std::size_t shared = std::min(two.node_level(0), two.node_level(1));
    for (std::size_t layer = 0; layer <= shared; ++layer) {
        REQUIRE(two.neighbors(0, layer).size() == 1);
        REQUIRE(two.neighbors(1, layer).size() == 1);
        CHECK(two.neighbors(0, layer)[0] == 1);
        CHECK(two.neighbors(1, layer)[0] == 0);
    }
}

TEST_CASE("build: structural invariants on a 5000-node graph") {
    const auto docs = vxtest::random_set(5000, 16, 7);
    HnswParams params;
    params.seed = 8;
    const HnswIndex ix(docs, params);

    // Layer populations non-increasing with level.
    std::size_t prev = ix.layer_population(0);
    CHECK(prev == 5000);
    for (std::size_t layer = 1; layer <= ix.top_level(); ++layer) {
        const std::size_t pop = ix.layer_population(layer);
        CHECK(pop <= prev);
        prev = pop;
    }

    // Degree caps and symmetry, checked by direct scan.
    for (std::size_t i = 0; i < ix.size(); ++i) {
        for (std::size_t layer = 0; layer <= ix.node_level(i); ++layer) {
            const auto& nbs = ix.neighbors(i, layer);
            const std::size_t cap =
                layer == 0 ? 2 * params.max_degree : params.max_degree;
            CHECK(nbs.size() <= cap);
            std::set<std::uint32_t> unique(nbs.begin(), nbs.end());
            CHECK(unique.size() == nbs.size());
            CHECK(unique.count(static_cast<std::uint32_t>(i)) == 0);
            for (std::uint32_t nb : nbs) {
                CHECK(ix.node_level(nb) >= layer);
                const auto& back = ix.neighbors(nb, layer);
                CHECK(std::find(back.begin(), back.end(), static_cast<std::uint32_t>(i)) !=
                      back.end());
            }
        }
    }
}

TEST_CASE("search_layer: exhaustive limit returns exact nearest set") {
    const auto docs = vxtest::random_set(200, 8, 11);
    HnswParams params;
    params.seed = 12;
    const HnswIndex ix(docs, params);
    CounterRng rng(13);
    const auto q = vxtest::random_values(8, rng);
    const auto found =
        ix.search_layer(0, q, std::vector<std::uint32_t>{
                                  static_cast<std::uint32_t>(ix.entry_point())},
                        docs.size());
    REQUIRE(found.size() == docs.size());
    // With ef = n the beam can never prune, so the result is the exact
    // distance-sorted node set.
    std::vector<std::pair<double, std::uint32_t>> oracle;
    for (std::size_t i = 0; i < docs.size(); ++i)
        oracle.push_back({euclidean_sq(q, docs.vec(i)), static_cast<std::uint32_t>(i)});
    std::sort(oracle.begin(), oracle.end());
    for (std::size_t i = 0; i < found.size(); ++i) {
        CHECK(found[i].first == oracle[i].second);
        CHECK(found[i].second == oracle[i].first);
    }
}

TEST_CASE("search_layer: entry equal to the query comes back first") {
    const auto docs = vxtest::random_set(100, 6, 17);
    HnswParams params;
    params.seed = 18;
    const HnswIndex ix(docs, params);
    const auto found = ix.search_layer(0, docs.vec(31), std::vector<std::uint32_t>{31}, 8);
    CHECK(found.front().first == 31);
    CHECK(found.front().second == 0.0);
}

TEST_CASE("search_layer: empty layer throws") {
    const auto docs = vxtest::random_set(10, 4, 19);
    HnswParams params;
    params.seed = 20;
    const HnswIndex ix(docs, params);
    CounterRng rng(21);
    const auto q = vxtest::random_values(4, rng);
    CHECK_THROWS_AS(ix.search_layer(ix.top_level() + 40, q, std::vector<std::uint32_t>{0}, 4),
                    EmptyLayerError);
}

TEST_CASE("search: k = n returns every doc; stored queries resolve to themselves") {
    const auto docs = vxtest::random_set(300, 8, 23);
    HnswParams params;
    params.seed = 24;
    const HnswIndex ix(docs, params);
    CHECK(ix.search(docs.vec(0), docs.size()).size() == docs.size());

    int exact = 0;
    for (std::size_t trial = 0; trial < 100; ++trial) {
        const std::size_t target = (trial * 3) % docs.size();
        const auto hits = ix.search(docs.vec(target), 1);
        if (hits.front().doc_id == docs.id(target)) ++exact;
    }
    CHECK(exact >= 99);
}

TEST_CASE("search: recall does not degrade as ef_search doubles") {
    const auto docs = vxtest::random_set(3000, 16, 29);
    const FlatIndex flat(docs, Metric::euclidean);
    CounterRng rng(30);
    std::vector<std::vector<double>> queries;
    for (int q = 0; q < 40; ++q) queries.push_back(vxtest::random_values(16, rng));

    double prev_recall = -1.0;
    for (std::size_t ef : {8u, 16u, 32u, 64u, 128u}) {
        HnswParams params;
        params.ef_search = ef;
        params.seed = 31;
        const HnswIndex ix(docs, params);
        double recall_sum = 0.0;
        for (const auto& q : queries)
            recall_sum += recall_at_k(ix.search(q, 10), flat.search(q, 10), 10);
        const double recall = recall_sum / static_cast<double>(queries.size());
        CHECK(recall >= prev_recall - 0.02);  // non-strict modulo sampling noise
        prev_recall = recall;
    }
    CHECK(prev_recall >= 0.9);
}

TEST_CASE("search: hit scores are freshly recomputed distances") {
    const auto docs = vxtest::random_set(500, 8, 37);
    HnswParams params;
    params.seed = 38;
    const HnswIndex ix(docs, params);
    CounterRng rng(39);
    for (int trial = 0; trial < 10; ++trial) {
        const auto q = vxtest::random_values(8, rng);
        const auto hits = ix.search(q, 10);
        CHECK(vxtest::valid_hit_list(hits));
        for (const auto& h : hits) {
            CHECK(h.doc_id < docs.size());
            CHECK(h.score == -euclidean_sq(q, docs.vec(h.doc_id)));
        }
    }
}

TEST_CASE("artifact round-trip preserves structure and results") {
    const auto docs = vxtest::random_set(400, 8, 41);
    HnswParams params;
    params.seed = 42;
    const HnswIndex ix(docs, params);
    BinaryWriter w;
    ix.save_payload(w);
    BinaryReader r(w.buffer());
    const auto loaded = HnswIndex::load_payload(r);
    CHECK(loaded.size() == ix.size());
    CHECK(loaded.entry_point() == ix.entry_point());
    CounterRng rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        const auto q = vxtest::random_values(8, rng);
        const auto a = ix.search(q, 10);
        const auto b = loaded.search(q, 10);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].doc_id == b[i].doc_id);
    }
    BinaryWriter w2;
    loaded.save_payload(w2);
    CHECK(w.buffer() == w2.buffer());
}
