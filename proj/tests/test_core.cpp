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
#include <limits>

#include "helpers.hpp"
#include "vx/core.hpp"

using namespace vx;
using vxtest::random_values;

TEST_CASE("dot: orthogonal and self inner product") {
    CHECK(dot(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(dot(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 14.0);
}

TEST_CASE("dot: matches a scalar-loop oracle on random inputs") {
    CounterRng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_values(8, rng);
        const auto b = random_values(8, rng);
        double expected = 0.0;
        for (std::size_t i = 0; i < 8; ++i) expected += a[i] * b[i];
        CHECK_THAT(dot(a, b), Catch::Matchers::WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("dot: dimension mismatch throws") {
    CHECK_THROWS_AS(dot(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}),
                    DimensionError);
}

TEST_CASE("euclidean_sq: identity and 3-4-5 triangle") {
    const std::vector<double> x{1.5, -2.0, 0.25};
    CHECK(euclidean_sq(x, x) == 0.0);
    CHECK(euclidean_sq(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == 25.0);
}

TEST_CASE("euclidean_sq: algebraic identity against dot, dims 2/8/768") {
    for (std::size_t dim : {std::size_t{2}, std::size_t{8}, std::size_t{768}}) {
        CounterRng rng(dim);
        const int trials = 1000;
        for (int t = 0; t < trials; ++t) {
            const auto a = random_values(dim, rng);
            const auto b = random_values(dim, rng);
            const double expected = norm_sq(a) + norm_sq(b) - 2.0 * dot(a, b);
            CHECK_THAT(euclidean_sq(a, b),
                       Catch::Matchers::WithinAbs(expected, 1e-9 * (1.0 + std::abs(expected))));
        }
    }
}

TEST_CASE("softmax: symmetry, closed-form ratio, large-shift stability") {
    const auto uniform = softmax(std::vector<double>{0.0, 0.0});
    CHECK_THAT(uniform[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(uniform[1], Catch::Matchers::WithinAbs(0.5, 1e-12));

    for (double c : {-100.0, 0.0, 7.25}) {
        const auto p = softmax(std::vector<double>{c, c + std::log(3.0)});
        CHECK_THAT(p[0], Catch::Matchers::WithinAbs(0.25, 1e-9));
        CHECK_THAT(p[1], Catch::Matchers::WithinAbs(0.75, 1e-9));
    }

    const auto big = softmax(std::vector<double>{1000.0, 1000.0});
    CHECK_THAT(big[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(big[1], Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("softmax: output sums to one and shift invariance holds") {
    CounterRng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng.next_below(10);
        const auto z = random_values(k, rng, 5.0);
        const auto p = softmax(z);
        double total = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            total += v;
        }
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-9));

        const double shift = 10.0 * rng.next_gaussian();
        auto shifted = z;
        for (auto& v : shifted) v += shift;
        const auto q = softmax(shifted);
        for (std::size_t i = 0; i < k; ++i)
            CHECK_THAT(q[i], Catch::Matchers::WithinAbs(p[i], 1e-9));
    }
}

TEST_CASE("softmax: rejects fewer than two logits") {
    CHECK_THROWS_AS(softmax(std::vector<double>{1.0}), ArityError);
}

TEST_CASE("cosine: scale invariance, orthogonality, antiparallel") {
    const std::vector<double> x{0.3, -1.2, 2.0};
    std::vector<double> x2 = x;
    for (auto& v : x2) v *= 2.0;
    CHECK_THAT(cosine(x, x2), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK_THAT(cosine(std::vector<double>{1, 1}, std::vector<double>{-1, -1}),
               Catch::Matchers::WithinAbs(-1.0, 1e-12));
}

TEST_CASE("cosine: zero-norm input throws, range is [-1, 1]") {
    CHECK_THROWS_AS(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}),
                    DegenerateVectorError);
    CounterRng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = random_values(6, rng);
        const auto b = random_values(6, rng);
        const double c = cosine(a, b);
        CHECK(c >= -1.0 - 1e-9);
        CHECK(c <= 1.0 + 1e-9);
    }
}

TEST_CASE("DenseVector rejects NaN, Inf and zero dimension") {
    CHECK_THROWS_AS(DenseVector(std::vector<double>{1.0, std::nan("")}), DataError);
    CHECK_THROWS_AS(DenseVector(std::vector<double>{std::numeric_limits<double>::infinity()}),
                    DataError);
    CHECK_THROWS_AS(DenseVector(std::vector<double>{}), DimensionError);
}

TEST_CASE("EmbeddingSet validates ids and shape") {
    CHECK_THROWS_AS(EmbeddingSet({}, {}, 4), IngestError);
    CHECK_THROWS_AS(EmbeddingSet({1, 1}, {1, 2, 3, 4}, 2), IngestError);
    CHECK_THROWS_AS(EmbeddingSet({1, 2}, {1, 2, 3}, 2), DimensionError);
    const EmbeddingSet ok({5, 9}, {1, 2, 3, 4}, 2);
    CHECK(ok.size() == 2);
    CHECK(ok.id(1) == 9);
    CHECK(ok.vec(1)[0] == 3.0);
}

TEST_CASE("MultiEmbedding validates rows and token ids") {
    std::vector<DenseVector> rows;
    rows.emplace_back(std::vector<double>{1, 2});
    rows.emplace_back(std::vector<double>{3, 4});
    CHECK_THROWS_AS(MultiEmbedding(0, {}), ArityError);
    CHECK_THROWS_AS(MultiEmbedding(0, rows, std::vector<term_id_t>{7}), LexicalInfoError);
    const MultiEmbedding ok(3, rows, std::vector<term_id_t>{7, 8});
    CHECK(ok.rows() == 2);
    CHECK(ok.token_ids()[1] == 8);
}

TEST_CASE("SparseVector drops zeros and max-merges repeated terms") {
    const SparseVector v(std::map<term_id_t, double>{{1, 0.0}, {2, 3.0}, {7, -1.5}});
    CHECK(v.nnz() == 2);
    CHECK(v.weight(1) == 0.0);
    CHECK(v.weight(7) == -1.5);
    CHECK_FALSE(v.all_non_negative());

    const auto merged = SparseVector::from_pairs({{4, 1.0}, {4, 2.5}, {4, 0.5}, {5, 1.0}});
    CHECK(merged.weight(4) == 2.5);
    CHECK(merged.weight(5) == 1.0);
}

TEST_CASE("TopK keeps the best k under the shared ordering") {
    TopK top(3);
    top.push(10, 1.0);
    top.push(11, 5.0);
    top.push(12, 3.0);
    top.push(13, 5.0);  // tie with 11: lower id wins
    top.push(14, -2.0);
    const auto hits = top.take();
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].doc_id == 11);
    CHECK(hits[1].doc_id == 13);
    CHECK(hits[2].doc_id == 12);
    CHECK(vxtest::valid_hit_list(hits));
}

TEST_CASE("TopK and rank_all agree on random input") {
    CounterRng rng(47);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<doc_id_t, double>> scored;
        const std::size_t n = 30 + rng.next_below(100);
        for (std::size_t i = 0; i < n; ++i)
            scored.push_back({i, static_cast<double>(rng.next_below(20))});
        const std::size_t k = 1 + rng.next_below(n);
        TopK top(k);
        for (const auto& [id, s] : scored) top.push(id, s);
        const auto heap_hits = top.take();
        auto full = rank_all(scored);
        full.resize(k);
        REQUIRE(heap_hits.size() == k);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(heap_hits[i].doc_id == full[i].doc_id);
            CHECK(heap_hits[i].score == full[i].score);
        }
        CHECK(vxtest::valid_hit_list(heap_hits));
    }
}
