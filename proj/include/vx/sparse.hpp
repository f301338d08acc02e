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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/io.hpp"

namespace vx {

/// Linear 8-bit impact quantiser scaled by the global maximum weight:
/// quantise(0) = 0, quantise(max_weight) = 255, half-step rounding away from
/// zero in between. Reconstruction error is at most max_weight / 510.
class ImpactQuantiser {
  public:
    static constexpr int kLevels = 255;

    explicit ImpactQuantiser(double max_weight) : max_weight_(max_weight) {
        if (!(max_weight_ > 0.0))
            throw DegenerateCollectionError("ImpactQuantiser: max weight must be positive");
    }

    static ImpactQuantiser fit(const std::vector<SparseDoc>& docs) {
        double max_w = 0.0;
        for (const auto& d : docs) {
            for (const auto& [t, w] : d.vec.entries()) {
                if (w < 0.0) throw WeightError("ImpactQuantiser::fit: negative weight");
                max_w = std::max(max_w, w);
            }
        }
        if (max_w == 0.0)
            throw DegenerateCollectionError("ImpactQuantiser::fit: all-zero corpus");
        return ImpactQuantiser(max_w);
    }

    double max_weight() const { return max_weight_; }

    std::uint8_t quantise(double w) const {
        if (w < 0.0) throw WeightError("ImpactQuantiser: negative weight");
        const double clamped = std::min(w, max_weight_);
        return static_cast<std::uint8_t>(std::llround(clamped / max_weight_ * kLevels));
    }

    double dequantise(std::uint8_t code) const {
        return static_cast<double>(code) * max_weight_ / kLevels;
    }

  private:
    double max_weight_;
};

/// Impact-ordered inverted index: one posting list per term, each posting a
/// (doc id, 8-bit impact) pair sorted by doc id. Zero impacts are never
/// stored, so every posting contributes at least 1 to a matching query.
class ImpactIndex {
  public:
    struct Posting {
        doc_id_t doc_id;
        std::uint8_t impact;
    };

    explicit ImpactIndex(const std::vector<SparseDoc>& docs)
        : quantiser_(ImpactQuantiser::fit(docs)) {
        std::unordered_map<doc_id_t, char> seen;
        seen.reserve(docs.size());
        for (const auto& d : docs) {
            if (!seen.emplace(d.id, 1).second)
                throw IngestError("ImpactIndex: duplicate doc id " + std::to_string(d.id));
        }
        std::vector<const SparseDoc*> ordered;
        ordered.reserve(docs.size());
        for (const auto& d : docs) ordered.push_back(&d);
        std::sort(ordered.begin(), ordered.end(),
                  [](const SparseDoc* a, const SparseDoc* b) { return a->id < b->id; });
        for (const SparseDoc* d : ordered) {
            for (const auto& [t, w] : d->vec.entries()) {
                const std::uint8_t impact = quantiser_.quantise(w);
                if (impact == 0) continue;
                postings_[t].push_back({d->id, impact});
            }
        }
        doc_count_ = docs.size();
    }

    ImpactIndex(ImpactQuantiser q, std::map<term_id_t, std::vector<Posting>> postings,
                std::size_t doc_count)
        : quantiser_(q), postings_(std::move(postings)), doc_count_(doc_count) {}

    const ImpactQuantiser& quantiser() const { return quantiser_; }
    std::size_t doc_count() const { return doc_count_; }
    std::size_t term_count() const { return postings_.size(); }

    std::size_t posting_count() const {
        std::size_t total = 0;
        for (const auto& [t, list] : postings_) total += list.size();
        return total;
    }

    const std::vector<Posting>* postings(term_id_t t) const {
        auto it = postings_.find(t);
        return it == postings_.end() ? nullptr : &it->second;
    }

    /// DeepImpact-style scoring: sum of stored impacts over the query terms
    /// present in each document. Term-at-a-time accumulation.
    std::vector<ScoredHit> score_sum_impacts(const std::vector<term_id_t>& query_terms,
                                             std::size_t k) const {
        std::vector<term_id_t> terms = query_terms;
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
        std::map<doc_id_t, std::uint64_t> acc;
        for (term_id_t t : terms) {
            const auto* list = postings(t);
            if (!list) continue;
            for (const auto& p : *list) acc[p.doc_id] += p.impact;
        }
        TopK top(k);
        for (const auto& [id, s] : acc) top.push(id, static_cast<double>(s));
        return top.take();
    }

    /// Single-dimension lexical-match scoring: per query term, stored impact
    /// times the query weight, summed. With unit weights this reduces to
    /// score_sum_impacts.
    std::vector<ScoredHit> score_unicoil(const SparseVector& query_weights,
                                         std::size_t k) const {
        if (!query_weights.all_non_negative())
            throw WeightError("score_unicoil: negative query weight");
        std::map<doc_id_t, double> acc;
        for (const auto& [t, v] : query_weights.entries()) {
            const auto* list = postings(t);
            if (!list) continue;
            for (const auto& p : *list) acc[p.doc_id] += v * static_cast<double>(p.impact);
        }
        TopK top(k);
        for (const auto& [id, s] : acc) top.push(id, s);
        return top.take();
    }

    // Payload: quantiser, term directory (term, offset, count), then the
    // postings blob with varint delta-encoded doc ids followed by impacts.
    void save_payload(BinaryWriter& w) const {
        w.f64(quantiser_.max_weight());
        w.u64(doc_count_);
        w.u32(static_cast<std::uint32_t>(postings_.size()));
        BinaryWriter blob;
        std::vector<std::pair<term_id_t, std::pair<std::uint64_t, std::uint32_t>>> directory;
        for (const auto& [t, list] : postings_) {
            const std::uint64_t offset = blob.buffer().size();
            doc_id_t prev = 0;
            for (const auto& p : list) {
                blob.varint(p.doc_id - prev);  // first gap is the id itself
                prev = p.doc_id;
            }
            for (const auto& p : list) blob.u8(p.impact);
            directory.push_back({t, {offset, static_cast<std::uint32_t>(list.size())}});
        }
        for (const auto& [t, loc] : directory) {
            w.u32(t);
            w.u64(loc.first);
            w.u32(loc.second);
        }
        w.u64(blob.buffer().size());
        w.bytes(blob.buffer());
    }

    static ImpactIndex load_payload(BinaryReader& r) {
        const double max_weight = r.f64();
        const std::uint64_t doc_count = r.u64();
        const std::uint32_t terms = r.u32();
        std::vector<std::pair<term_id_t, std::pair<std::uint64_t, std::uint32_t>>> directory(
            terms);
        for (auto& [t, loc] : directory) {
            t = r.u32();
            loc.first = r.u64();
            loc.second = r.u32();
        }
        const std::uint64_t blob_len = r.u64();
        BinaryReader blob(r.bytes(blob_len));
        std::map<term_id_t, std::vector<Posting>> postings;
        for (const auto& [t, loc] : directory) {
            std::vector<Posting> list(loc.second);
            doc_id_t prev = 0;
            for (auto& p : list) {
                prev += blob.varint();
                p.doc_id = prev;
            }
            for (auto& p : list) p.impact = blob.u8();
            postings.emplace(t, std::move(list));
        }
        return ImpactIndex(ImpactQuantiser(max_weight), std::move(postings), doc_count);
    }

  private:
    ImpactQuantiser quantiser_;
    std::map<term_id_t, std::vector<Posting>> postings_;
    std::size_t doc_count_ = 0;
};

/// Collapses per-token masked-language heads into one document vector:
/// gamma_t = sum_i log(1 + relu(head_i[t])), zero entries dropped.
inline SparseVector splade_aggregate(const std::vector<SparseVector>& heads) {
    if (heads.empty()) throw ArityError("splade_aggregate: no heads");
    std::map<term_id_t, double> acc;
    for (const auto& head : heads) {
        for (const auto& [t, w] : head.entries()) {
            if (w <= 0.0) continue;  // relu
            acc[t] += std::log1p(w);
        }
    }
    return SparseVector(std::move(acc));
}

/// Sparsity pressure of a batch: the sum over terms of the squared mean
/// weight, the mean taken over all documents in the batch including those
/// where the term is absent.
inline double flops_metric(const std::vector<SparseVector>& batch, std::size_t vocab_size) {
    if (batch.empty()) throw ArityError("flops_metric: empty batch");
    std::map<term_id_t, double> sums;
    for (const auto& doc : batch) {
        for (const auto& [t, w] : doc.entries()) {
            if (static_cast<std::size_t>(t) >= vocab_size)
                throw DataError("flops_metric: term id " + std::to_string(t) +
                                " outside vocabulary of size " + std::to_string(vocab_size));
            sums[t] += w;
        }
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const auto& [t, s] : sums) {
        const double mean = s * inv_b;
        total += mean * mean;
    }
    return total;
}

}  // namespace vx
