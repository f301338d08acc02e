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

#include <cmath>
#include <map>
#include <set>

#include "helpers.hpp"
#include "vx/flat.hpp"
#include "vx/lsh.hpp"
#include "vx/metrics.hpp"

using namespace vx;

TEST_CASE("hash_point: deterministic, and stable under tiny perturbation") {
    LshParams params;
    params.tables = 4;
    params.projections = 6;
    params.width = 1.0;
    params.seed = 5;
    CounterRng rng(1);
    const auto x = vxtest::random_values(8, rng);
    CHECK(hash_point(params, 2, x) == hash_point(params, 2, x));

    auto y = x;
    for (auto& v : y) v += 1e-12;
    CHECK(hash_point(params, 0, x) == hash_point(params, 0, y));

    CHECK_THROWS_AS(hash_point(params, 4, x), ConfigError);
}

TEST_CASE("hash_point: near pairs collide more often than far pairs") {
    LshParams params;
    params.tables = 1;
    params.projections = 4;
    params.width = 1.0;
    params.seed = 9;
    CounterRng rng(2);
    int near_hits = 0, far_hits = 0;
    const int pairs = 1000;
    for (int p = 0; p < pairs; ++p) {
        const auto x = vxtest::random_values(8, rng, 2.0);
        auto dir = vxtest::random_values(8, rng);
        const double n = norm(dir);
        auto near = x, far = x;
        for (std::size_t d = 0; d < 8; ++d) {
            near[d] += dir[d] / n * 0.1 * params.width;
            far[d] += dir[d] / n * 10.0 * params.width;
        }
        if (hash_point(params, 0, x) == hash_point(params, 0, near)) ++near_hits;
        if (hash_point(params, 0, x) == hash_point(params, 0, far)) ++far_hits;
    }
    CHECK(near_hits > far_hits);
    CHECK(near_hits > pairs / 2);
}

TEST_CASE("build: single doc occupies one bucket per table") {
    LshParams params;
    params.tables = 3;
    params.projections = 2;
    params.seed = 4;
    const LshIndex ix(vxtest::random_set(1, 4, 3), params);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(ix.bucket_count(t) == 1);
        CHECK(ix.table_population(t) == 1);
    }
}

TEST_CASE("build: duplicate vectors share a bucket in every table") {
    LshParams params;
    params.tables = 5;
    params.projections = 4;
    params.seed = 6;
    std::vector<double> data{1.0, 2.0, 3.0, 1.0, 2.0, 3.0};
    const LshIndex ix(EmbeddingSet({10, 20}, std::move(data), 3), params);
    for (std::size_t t = 0; t < 5; ++t) CHECK(ix.bucket_count(t) == 1);
}

TEST_CASE("build: every doc appears exactly once per table") {
    LshParams params;
    params.seed = 8;
    const LshIndex ix(vxtest::random_set(1000, 8, 15), params);
    for (std::size_t t = 0; t < params.tables; ++t) CHECK(ix.table_population(t) == 1000);
}

TEST_CASE("search: stored vector is retrieved at rank 1") {
    LshParams params;
    params.seed = 21;
    const auto docs = vxtest::random_set(300, 8, 22);
    const LshIndex ix(docs, params);
    const auto hits = ix.search(docs.vec(42), 5);
    REQUIRE(!hits.empty());
    CHECK(hits[0].doc_id == docs.id(42));
    CHECK(hits[0].score == 0.0);
}

TEST_CASE("search: empty candidate union returns empty, no error") {
    LshParams params;
    params.tables = 2;
    params.projections = 8;
    params.width = 0.001;  // minuscule buckets in data units
    params.seed = 31;
    const auto docs = vxtest::random_set(50, 8, 33);
    const LshIndex ix(docs, params);
    // A query far outside the data cloud shares no bucket.
    std::vector<double> far(8, 1e6);
    const auto result = ix.search_with_stats(far, 5);
    CHECK(result.candidates == 0);
    CHECK(result.hits.empty());
}

TEST_CASE("search: results subset of candidates with exact flat scores") {
    LshParams params;
    params.seed = 44;
    const auto docs = vxtest::random_set(500, 8, 45);
    const LshIndex ix(docs, params);
    const FlatIndex flat(docs, Metric::euclidean);
    CounterRng rng(46);
    for (int trial = 0; trial < 10; ++trial) {
        const auto q = vxtest::random_values(8, rng);
        const auto result = ix.search_with_stats(q, 10);
        CHECK(result.hits.size() <= std::min<std::size_t>(10, result.candidates));
        CHECK(vxtest::valid_hit_list(result.hits));
        const auto oracle = flat.search(q, docs.size());
        std::map<doc_id_t, double> oracle_scores;
        for (const auto& h : oracle) oracle_scores[h.doc_id] = h.score;
        for (const auto& h : result.hits) CHECK(h.score == oracle_scores.at(h.doc_id));
    }
}

TEST_CASE("recall against the flat oracle at production parameters") {
    LshParams params;
    params.tables = 16;
    params.projections = 8;
    params.width = 4.0;
    params.seed = 50;
    const auto docs = vxtest::random_set(10000, 64, 51);
    const LshIndex ix(docs, params);
    const FlatIndex flat(docs, Metric::euclidean);
    CounterRng rng(52);
    double recall_sum = 0.0;
    const int queries = 50;
    for (int q = 0; q < queries; ++q) {
        const auto query = vxtest::random_values(64, rng);
        recall_sum += recall_at_k(ix.search(query, 10), flat.search(query, 10), 10);
    }
    CHECK(recall_sum / queries >= 0.8);
}

TEST_CASE("artifact round-trip preserves tables and results") {
    LshParams params;
    params.tables = 4;
    params.projections = 4;
    params.seed = 60;
    const auto docs = vxtest::random_set(200, 6, 61);
    const LshIndex ix(docs, params);

    BinaryWriter w;
    ix.save_payload(w);
    BinaryReader r(w.buffer());
    const auto loaded = LshIndex::load_payload(r);
    CHECK(loaded.size() == ix.size());
    CHECK(loaded.effective_params().width == ix.effective_params().width);

    CounterRng rng(62);
    const auto q = vxtest::random_values(6, rng);
    const auto a = ix.search_with_stats(q, 10);
    const auto b = loaded.search_with_stats(q, 10);
    CHECK(a.candidates == b.candidates);
    REQUIRE(a.hits.size() == b.hits.size());
    for (std::size_t i = 0; i < a.hits.size(); ++i)
        CHECK(a.hits[i].doc_id == b.hits[i].doc_id);

    BinaryWriter w2;
    loaded.save_payload(w2);
    CHECK(w.buffer() == w2.buffer());
}
