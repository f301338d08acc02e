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
#include <map>

#include "helpers.hpp"
#include "vx/sparse.hpp"
#include "vx/synthetic.hpp"

using namespace vx;

TEST_CASE("quantiser: endpoints, midpoint rounding, half-step bound") {
    const double max_w = 2.0;
    const ImpactQuantiser q(max_w);
    CHECK(q.quantise(0.0) == 0);
    CHECK(q.quantise(max_w) == 255);
    CHECK(q.quantise(max_w / 2.0) == 128);  // 127.5 rounds away from zero

    CounterRng rng(1);
    for (int trial = 0; trial < 10000; ++trial) {
        const double w = max_w * rng.next_double();
        CHECK(std::abs(q.dequantise(q.quantise(w)) - w) <= max_w / 510.0 + 1e-15);
    }
}

TEST_CASE("quantiser: fit uses the global maximum; degenerate corpora rejected") {
    std::vector<SparseDoc> docs;
    docs.push_back({0, SparseVector(std::map<term_id_t, double>{{1, 0.5}})});
    docs.push_back({1, SparseVector(std::map<term_id_t, double>{{2, 4.0}, {3, 1.0}})});
    CHECK(ImpactQuantiser::fit(docs).max_weight() == 4.0);

    std::vector<SparseDoc> zeros;
    zeros.push_back({0, SparseVector()});
    CHECK_THROWS_AS(ImpactQuantiser::fit(zeros), DegenerateCollectionError);

    std::vector<SparseDoc> negative;
    negative.push_back({0, SparseVector(std::map<term_id_t, double>{{1, -0.5}})});
    CHECK_THROWS_AS(ImpactQuantiser::fit(negative), WeightError);
}

TEST_CASE("impact index: single doc, absent terms, posting count invariant") {
    std::vector<SparseDoc> one;
    one.push_back({5, SparseVector(std::map<term_id_t, double>{{7, 1.0}})});
    const ImpactIndex tiny(one);
    REQUIRE(tiny.postings(7) != nullptr);
    CHECK(tiny.postings(7)->size() == 1);
    CHECK(tiny.postings(8) == nullptr);

    const auto docs = gen_synthetic_sparse(1000, 500, 2, 20, 3);
    const ImpactIndex ix(docs);
    std::size_t expected = 0;
    for (const auto& d : docs)
        for (const auto& [t, w] : d.vec.entries())
            if (ix.quantiser().quantise(w) > 0) ++expected;
    CHECK(ix.posting_count() == expected);

    // Posting lists sorted by doc id, impacts >= 1.
    for (term_id_t t = 0; t < 500; ++t) {
        const auto* list = ix.postings(t);
        if (!list) continue;
        for (std::size_t i = 0; i < list->size(); ++i) {
            CHECK((*list)[i].impact >= 1);
            if (i > 0) CHECK((*list)[i - 1].doc_id < (*list)[i].doc_id);
        }
    }
}

TEST_CASE("impact index: duplicate doc ids rejected") {
    std::vector<SparseDoc> docs;
    docs.push_back({1, SparseVector(std::map<term_id_t, double>{{1, 1.0}})});
    docs.push_back({1, SparseVector(std::map<term_id_t, double>{{2, 1.0}})});
    CHECK_THROWS_AS(ImpactIndex(docs), IngestError);
}

TEST_CASE("score_sum_impacts: single term ranking, absent query, oracle match") {
    const auto docs = gen_synthetic_sparse(500, 200, 2, 15, 7);
    const ImpactIndex ix(docs);

    const auto* list = ix.postings(0);
    if (list && !list->empty()) {
        const auto hits = ix.score_sum_impacts({0}, list->size());
        CHECK(hits.size() == list->size());
        for (const auto& h : hits) {
            const auto it = std::find_if(list->begin(), list->end(),
                                         [&](const auto& p) { return p.doc_id == h.doc_id; });
            REQUIRE(it != list->end());
            CHECK(h.score == static_cast<double>(it->impact));
        }
    }

    CHECK(ix.score_sum_impacts({100000, 100001}, 10).empty());
    CHECK(ix.score_sum_impacts({}, 10).empty());

    // Hash-map accumulation oracle over integer impacts.
    CounterRng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<term_id_t> q;
        const std::size_t terms = 1 + rng.next_below(8);
        for (std::size_t t = 0; t < terms; ++t)
            q.push_back(static_cast<term_id_t>(rng.next_below(200)));
        std::map<doc_id_t, std::uint64_t> oracle;
        std::vector<term_id_t> dedup = q;
        std::sort(dedup.begin(), dedup.end());
        dedup.erase(std::unique(dedup.begin(), dedup.end()), dedup.end());
        for (term_id_t t : dedup) {
            const auto* l = ix.postings(t);
            if (!l) continue;
            for (const auto& p : *l) oracle[p.doc_id] += p.impact;
        }
        const auto hits = ix.score_sum_impacts(q, 20);
        for (const auto& h : hits)
            CHECK(h.score == static_cast<double>(oracle.at(h.doc_id)));
        // Top hit really is the max over the accumulator.
        if (!hits.empty()) {
            std::uint64_t best = 0;
            for (const auto& [id, s] : oracle) best = std::max(best, s);
            CHECK(hits[0].score == static_cast<double>(best));
        }
    }
}

TEST_CASE("score_unicoil: unit weights reduce to sum of impacts, id for id") {
    const auto docs = gen_synthetic_sparse(400, 150, 2, 12, 9);
    const ImpactIndex ix(docs);
    CounterRng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        std::map<term_id_t, double> unit;
        const std::size_t terms = 1 + rng.next_below(6);
        std::vector<term_id_t> q;
        for (std::size_t t = 0; t < terms; ++t) {
            const auto term = static_cast<term_id_t>(rng.next_below(150));
            unit[term] = 1.0;
            q.push_back(term);
        }
        const auto a = ix.score_unicoil(SparseVector(unit), 15);
        const auto b = ix.score_sum_impacts(q, 15);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].doc_id == b[i].doc_id);
            CHECK(a[i].score == b[i].score);
        }
    }
}

TEST_CASE("score_unicoil: positive scaling preserves the ranking; negatives rejected") {
    const auto docs = gen_synthetic_sparse(300, 100, 2, 10, 11);
    const ImpactIndex ix(docs);
    const SparseVector q(std::map<term_id_t, double>{{3, 0.5}, {17, 2.0}, {40, 1.25}});
    std::map<term_id_t, double> scaled_map;
    for (const auto& [t, w] : q.entries()) scaled_map[t] = w * 3.5;
    const auto a = ix.score_unicoil(q, 10);
    const auto b = ix.score_unicoil(SparseVector(scaled_map), 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].doc_id == b[i].doc_id);

    CHECK_THROWS_AS(
        ix.score_unicoil(SparseVector(std::map<term_id_t, double>{{1, -1.0}}), 5),
        WeightError);
}

TEST_CASE("score_unicoil: matches the accumulation oracle bit for bit") {
    const auto docs = gen_synthetic_sparse(300, 80, 2, 10, 13);
    const ImpactIndex ix(docs);
    CounterRng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        std::map<term_id_t, double> weights;
        const std::size_t terms = 1 + rng.next_below(6);
        for (std::size_t t = 0; t < terms; ++t)
            weights[static_cast<term_id_t>(rng.next_below(80))] = 4.0 * rng.next_double();
        const SparseVector q(weights);
        std::map<doc_id_t, double> oracle;
        for (const auto& [t, v] : q.entries()) {
            const auto* l = ix.postings(t);
            if (!l) continue;
            for (const auto& p : *l) oracle[p.doc_id] += v * static_cast<double>(p.impact);
        }
        for (const auto& h : ix.score_unicoil(q, 25)) CHECK(h.score == oracle.at(h.doc_id));
    }
}

TEST_CASE("splade_aggregate: relu kills non-positive heads; log1p closed form") {
    std::vector<SparseVector> dead;
    dead.emplace_back(std::map<term_id_t, double>{{1, -2.0}, {2, -0.1}});
    dead.emplace_back(std::map<term_id_t, double>{{3, -5.0}});
    CHECK(splade_aggregate(dead).empty());

    std::vector<SparseVector> one;
    one.emplace_back(std::map<term_id_t, double>{{9, std::exp(1.0) - 1.0}});
    const auto gamma = splade_aggregate(one);
    CHECK_THAT(gamma.weight(9), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("splade_aggregate: monotone in any head entry") {
    CounterRng rng(15);
    for (int trial = 0; trial < 50; ++trial) {
        std::map<term_id_t, double> h0, h1;
        for (int t = 0; t < 6; ++t) {
            h0[t] = 2.0 * rng.next_gaussian();
            h1[t] = 2.0 * rng.next_gaussian();
        }
        const term_id_t bump = static_cast<term_id_t>(rng.next_below(6));
        auto h0_up = h0;
        h0_up[bump] += 0.5 + rng.next_double();
        const auto base = splade_aggregate({SparseVector(h0), SparseVector(h1)});
        const auto upper = splade_aggregate({SparseVector(h0_up), SparseVector(h1)});
        for (term_id_t t = 0; t < 6; ++t) CHECK(upper.weight(t) >= base.weight(t) - 1e-12);
    }
}

TEST_CASE("flops_metric: trivial cases and hand arithmetic") {
    std::vector<SparseVector> zero_batch;
    zero_batch.emplace_back();
    CHECK(flops_metric(zero_batch, 10) == 0.0);

    std::vector<SparseVector> one_doc;
    one_doc.emplace_back(std::map<term_id_t, double>{{4, 1.0}});
    CHECK(flops_metric(one_doc, 10) == 1.0);

    std::vector<SparseVector> two;
    two.emplace_back(std::map<term_id_t, double>{{4, 2.0}});
    two.emplace_back();
    CHECK(flops_metric(two, 10) == 1.0);  // mean (2+0)/2 = 1, squared
}

TEST_CASE("flops_metric: invariant under batch order and vocabulary relabeling") {
    const auto docs = gen_synthetic_sparse(40, 30, 2, 8, 16);
    std::vector<SparseVector> batch;
    for (const auto& d : docs) batch.push_back(d.vec);
    const double base = flops_metric(batch, 30);

    auto shuffled = batch;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK_THAT(flops_metric(shuffled, 30), Catch::Matchers::WithinAbs(base, 1e-12));

    std::vector<SparseVector> relabeled;
    for (const auto& v : batch) {
        std::map<term_id_t, double> entries;
        for (const auto& [t, w] : v.entries()) entries[29 - t] = w;
        relabeled.emplace_back(std::move(entries));
    }
    CHECK_THAT(flops_metric(relabeled, 30), Catch::Matchers::WithinAbs(base, 1e-9));

    CHECK_THROWS_AS(flops_metric(batch, 3), DataError);
}

TEST_CASE("artifact round-trip reproduces identical posting bytes") {
    const auto docs = gen_synthetic_sparse(600, 300, 2, 20, 17);
    const ImpactIndex ix(docs);
    BinaryWriter w;
    ix.save_payload(w);
    BinaryReader r(w.buffer());
    const auto loaded = ImpactIndex::load_payload(r);
    CHECK(loaded.doc_count() == ix.doc_count());
    CHECK(loaded.term_count() == ix.term_count());
    BinaryWriter w2;
    loaded.save_payload(w2);
    CHECK(w.buffer() == w2.buffer());

    const auto a = ix.score_sum_impacts({1, 2, 3}, 10);
    const auto b = loaded.score_sum_impacts({1, 2, 3}, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].doc_id == b[i].doc_id);
}
