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

#include "helpers.hpp"
#include "vx/flat.hpp"

using namespace vx;

TEST_CASE("build: holds all records; empty sets cannot exist") {
    const FlatIndex ix(EmbeddingSet({1, 2, 3}, {1, 0, 0, 1, 1, 1}, 2), Metric::euclidean);
    CHECK(ix.size() == 3);
    CHECK_THROWS_AS(EmbeddingSet({}, {}, 2), IngestError);
}

TEST_CASE("payload size follows the record format arithmetic") {
    const std::size_t n = 10000, dim = 64;
    const FlatIndex ix(vxtest::random_set(n, dim, 4), Metric::euclidean);
    CHECK(ix.payload_bytes() == 8 + n * (8 + 4 * dim));
    BinaryWriter w;
    ix.save_payload(w);
    CHECK(w.buffer().size() == ix.payload_bytes());
}

TEST_CASE("search: stored query comes back first with score zero; k > n returns n") {
    const auto docs = vxtest::random_set(20, 4, 8);
    const FlatIndex ix(docs, Metric::euclidean);
    const auto hits = ix.search(docs.vec(7), 3);
    REQUIRE(!hits.empty());
    CHECK(hits[0].doc_id == docs.id(7));
    CHECK(hits[0].score == 0.0);

    CHECK(ix.search(docs.vec(0), 100).size() == 20);
}

TEST_CASE("search: matches an independent full-sort oracle") {
    const auto docs = vxtest::random_set(500, 8, 12);
    const FlatIndex ix(docs, Metric::euclidean);
    CounterRng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const auto q = vxtest::random_values(8, rng);
        const auto hits = ix.search(q, 10);
        std::vector<std::pair<double, doc_id_t>> oracle;
        for (std::size_t i = 0; i < docs.size(); ++i)
            oracle.push_back({euclidean_sq(q, docs.vec(i)), docs.id(i)});
        std::sort(oracle.begin(), oracle.end());
        REQUIRE(hits.size() == 10);
        for (std::size_t i = 0; i < 10; ++i) CHECK(hits[i].doc_id == oracle[i].second);
        CHECK(vxtest::valid_hit_list(hits));
    }
}

TEST_CASE("search: inner-product metric ranks by dot product") {
    const EmbeddingSet docs({1, 2, 3}, {1, 0, 0, 1, 2, 2}, 2);
    const FlatIndex ix(docs, Metric::inner_product);
    const auto hits = ix.search(std::vector<double>{1, 1}, 3);
    CHECK(hits[0].doc_id == 3);  // ip 4
    CHECK(hits[0].score == 4.0);
    CHECK(hits[1].doc_id == 1);  // ip 1, tie with doc 2 broken by id
    CHECK(hits[2].doc_id == 2);
}

TEST_CASE("search: dimension mismatch throws") {
    const FlatIndex ix(vxtest::random_set(5, 4, 1), Metric::euclidean);
    CHECK_THROWS_AS(ix.search(std::vector<double>{1, 2, 3}, 2), DimensionError);
}

TEST_CASE("prefix property: top-k1 is a prefix of top-k2") {
    const auto docs = vxtest::random_set(200, 6, 77);
    const FlatIndex ix(docs, Metric::euclidean);
    CounterRng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto q = vxtest::random_values(6, rng);
        const auto big = ix.search(q, 50);
        for (std::size_t k1 : {1u, 7u, 23u, 49u}) {
            const auto small = ix.search(q, k1);
            REQUIRE(small.size() == k1);
            for (std::size_t i = 0; i < k1; ++i) CHECK(small[i].doc_id == big[i].doc_id);
        }
    }
}

TEST_CASE("full ranking is a total order consistent with pairwise comparison") {
    const auto docs = vxtest::random_set(64, 4, 5);
    const FlatIndex ix(docs, Metric::euclidean);
    CounterRng rng(9);
    const auto q = vxtest::random_values(4, rng);
    const auto all = ix.search(q, docs.size());
    REQUIRE(all.size() == docs.size());
    for (std::size_t i = 1; i < all.size(); ++i) {
        const bool ordered = all[i - 1].score > all[i].score ||
                             (all[i - 1].score == all[i].score &&
                              all[i - 1].doc_id < all[i].doc_id);
        CHECK(ordered);
    }
}
