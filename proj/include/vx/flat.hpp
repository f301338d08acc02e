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

#include <cstdint>
#include <utility>
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/io.hpp"

namespace vx {

enum class Metric : std::uint8_t { euclidean = 0, inner_product = 1 };

/// Search output plus how many stored vectors were actually scored; the
/// approximate indexes report their candidate set size through the same
/// channel.
struct SearchResult {
    std::vector<ScoredHit> hits;
    std::size_t candidates = 0;
};

/// Exhaustive exact top-k search over explicitly stored embeddings. O(n*dim)
/// space and per-query time; the correctness oracle for every approximate
/// index in this library.
///
/// Scores follow the library-wide "higher is better" convention: inner
/// product is returned as-is, Euclidean as the negated squared distance.
class FlatIndex {
  public:
    FlatIndex(EmbeddingSet docs, Metric metric) : docs_(std::move(docs)), metric_(metric) {}

    std::size_t size() const { return docs_.size(); }
    std::size_t dim() const { return docs_.dim(); }
    Metric metric() const { return metric_; }
    const EmbeddingSet& docs() const { return docs_; }

    std::vector<ScoredHit> search(std::span<const double> query, std::size_t k) const {
        return search_with_stats(query, k).hits;
    }

    SearchResult search_with_stats(std::span<const double> query, std::size_t k) const {
        if (query.size() != docs_.dim()) throw DimensionError("search_flat: dimension mismatch");
        const std::size_t n = docs_.size();
        // Full sort only pays off once k is a sizable fraction of n.
        if (k > n / 4) {
            std::vector<std::pair<doc_id_t, double>> scored;
            scored.reserve(n);
            for (std::size_t i = 0; i < n; ++i) scored.push_back({docs_.id(i), score(query, i)});
            auto hits = rank_all(std::move(scored));
            if (hits.size() > k) hits.resize(k);
            return {std::move(hits), n};
        }
        TopK top(k);
        for (std::size_t i = 0; i < n; ++i) top.push(docs_.id(i), score(query, i));
        return {top.take(), n};
    }

    double score(std::span<const double> query, std::size_t i) const {
        return metric_ == Metric::inner_product ? dot(query, docs_.vec(i))
                                                : -euclidean_sq(query, docs_.vec(i));
    }

    // Payload layout: u32 n, u32 dim, n x [u64 id, dim x f32]. The metric
    // byte lives in the artifact header, shared across index kinds.
    void save_payload(BinaryWriter& w) const { write_embeddings_raw(w, docs_); }

    static FlatIndex load_payload(BinaryReader& r, Metric metric) {
        return FlatIndex(read_embeddings_raw(r), metric);
    }

    /// Serialized payload size in bytes: 8 + n * (8 + 4 * dim).
    std::uint64_t payload_bytes() const {
        return 8 + static_cast<std::uint64_t>(docs_.size()) * (8 + 4 * docs_.dim());
    }

    static void write_embeddings_raw(BinaryWriter& w, const EmbeddingSet& set) {
        w.u32(static_cast<std::uint32_t>(set.size()));
        w.u32(static_cast<std::uint32_t>(set.dim()));
        for (std::size_t i = 0; i < set.size(); ++i) {
            w.u64(set.id(i));
            for (double v : set.vec(i)) w.f32(static_cast<float>(v));
        }
    }

    static EmbeddingSet read_embeddings_raw(BinaryReader& r) {
        const std::uint32_t n = r.u32();
        const std::uint32_t dim = r.u32();
        std::vector<doc_id_t> ids;
        ids.reserve(n);
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(n) * dim);
        for (std::uint32_t i = 0; i < n; ++i) {
            ids.push_back(r.u64());
            for (std::uint32_t j = 0; j < dim; ++j) data.push_back(static_cast<double>(r.f32()));
        }
        return EmbeddingSet(std::move(ids), std::move(data), dim);
    }

  private:
    EmbeddingSet docs_;
    Metric metric_;
};

}  // namespace vx
