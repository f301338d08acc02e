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
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vx/errors.hpp"

namespace vx {

using doc_id_t = std::uint64_t;
using term_id_t = std::uint32_t;

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError(std::string(what) + ": non-finite entry");
    }
}

}  // namespace detail

/// Fixed-dimension real vector. Entries are validated finite at construction
/// and immutable afterwards; computation is 64-bit throughout.
class DenseVector {
  public:
    explicit DenseVector(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw DimensionError("DenseVector: dimension must be positive");
        detail::require_finite(values_, "DenseVector");
    }

    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    operator std::span<const double>() const { return values_; }

    bool operator==(const DenseVector& other) const { return values_ == other.values_; }

  private:
    std::vector<double> values_;
};

/// A collection of per-document vectors with unique ids and a shared
/// dimension, stored row-major. Immutable after construction.
class EmbeddingSet {
  public:
    EmbeddingSet(std::vector<doc_id_t> ids, std::vector<double> data, std::size_t dim)
        : ids_(std::move(ids)), data_(std::move(data)), dim_(dim) {
        validate();
    }

    EmbeddingSet(std::vector<doc_id_t> ids, const std::vector<DenseVector>& vectors)
        : ids_(std::move(ids)) {
        if (vectors.empty()) throw IngestError("EmbeddingSet: at least one vector required");
        dim_ = vectors.front().dim();
        data_.reserve(vectors.size() * dim_);
        for (const auto& v : vectors) {
            if (v.dim() != dim_) throw DimensionError("EmbeddingSet: mixed dimensions");
            data_.insert(data_.end(), v.values().begin(), v.values().end());
        }
        validate();
    }

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    doc_id_t id(std::size_t i) const { return ids_[i]; }
    const std::vector<doc_id_t>& ids() const { return ids_; }

    std::span<const double> vec(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

    std::span<const double> data() const { return data_; }

  private:
    void validate() const {
        if (ids_.empty()) throw IngestError("EmbeddingSet: at least one record required");
        if (dim_ == 0) throw DimensionError("EmbeddingSet: dimension must be positive");
        if (data_.size() != ids_.size() * dim_)
            throw DimensionError("EmbeddingSet: data size does not match ids * dim");
        detail::require_finite(data_, "EmbeddingSet");
        std::unordered_set<doc_id_t> seen;
        seen.reserve(ids_.size());
        for (doc_id_t id : ids_) {
            if (!seen.insert(id).second)
                throw IngestError("EmbeddingSet: duplicate doc id " + std::to_string(id));
        }
    }

    std::vector<doc_id_t> ids_;
    std::vector<double> data_;
    std::size_t dim_ = 0;
};

/// Per-token vectors for one text. Row 0 is the classification row by
/// convention of the producing encoder. token_ids, when present, align with
/// the rows and carry vocabulary term ids for lexical-match scorers.
class MultiEmbedding {
  public:
    MultiEmbedding(doc_id_t id, std::vector<DenseVector> vectors,
                   std::optional<std::vector<term_id_t>> token_ids = std::nullopt)
        : id_(id), vectors_(std::move(vectors)), token_ids_(std::move(token_ids)) {
        if (vectors_.empty()) throw ArityError("MultiEmbedding: at least one row required");
        const std::size_t d = vectors_.front().dim();
        for (const auto& v : vectors_) {
            if (v.dim() != d) throw DimensionError("MultiEmbedding: mixed dimensions");
        }
        if (token_ids_ && token_ids_->size() != vectors_.size())
            throw LexicalInfoError("MultiEmbedding: token_ids length must match rows");
    }

    doc_id_t id() const { return id_; }
    std::size_t rows() const { return vectors_.size(); }
    std::size_t dim() const { return vectors_.front().dim(); }
    const DenseVector& row(std::size_t i) const { return vectors_[i]; }
    const std::vector<DenseVector>& vectors() const { return vectors_; }
    bool has_token_ids() const { return token_ids_.has_value(); }
    const std::vector<term_id_t>& token_ids() const {
        if (!token_ids_) throw LexicalInfoError("MultiEmbedding: token ids not present");
        return *token_ids_;
    }

  private:
    doc_id_t id_;
    std::vector<DenseVector> vectors_;
    std::optional<std::vector<term_id_t>> token_ids_;
};

/// Term id -> weight map over a vocabulary. Zero weights are never stored;
/// all weights are finite. Negative weights are representable (masked
/// language heads carry them) and rejected where an operation requires
/// non-negative input.
class SparseVector {
  public:
    SparseVector() = default;

    explicit SparseVector(std::map<term_id_t, double> entries) : entries_(std::move(entries)) {
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (!std::isfinite(it->second)) throw DataError("SparseVector: non-finite weight");
            if (it->second == 0.0) {
                it = entries_.erase(it);
            } else {
                ++it;
            }
        }
    }

    /// Builds from (term, weight) pairs; repeated terms keep the maximum
    /// weight, matching how repeated token occurrences are ingested.
    static SparseVector from_pairs(const std::vector<std::pair<term_id_t, double>>& pairs) {
        std::map<term_id_t, double> merged;
        for (const auto& [t, w] : pairs) {
            if (!std::isfinite(w)) throw DataError("SparseVector: non-finite weight");
            auto [it, inserted] = merged.emplace(t, w);
            if (!inserted) it->second = std::max(it->second, w);
        }
        return SparseVector(std::move(merged));
    }

    const std::map<term_id_t, double>& entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    double weight(term_id_t t) const {
        auto it = entries_.find(t);
        return it == entries_.end() ? 0.0 : it->second;
    }

    bool all_non_negative() const {
        return std::all_of(entries_.begin(), entries_.end(),
                           [](const auto& e) { return e.second >= 0.0; });
    }

    bool operator==(const SparseVector& other) const { return entries_ == other.entries_; }

  private:
    std::map<term_id_t, double> entries_;
};

/// A sparse vector bound to a document id, the unit of sparse ingestion.
struct SparseDoc {
    doc_id_t id;
    SparseVector vec;
};

/// One search result. Lists are always sorted by descending score with ties
/// broken by ascending doc id, and ranks start at 1.
struct ScoredHit {
    doc_id_t doc_id;
    double score;
    std::size_t rank;

    bool operator==(const ScoredHit& other) const {
        return doc_id == other.doc_id && score == other.score && rank == other.rank;
    }
};

/// The one ordering used by every search operation.
inline bool hit_better(doc_id_t id_a, double score_a, doc_id_t id_b, double score_b) {
    if (score_a != score_b) return score_a > score_b;
    return id_a < id_b;
}

/// Bounded top-k selector over (id, score) pairs. Uses a heap while k is
/// small relative to the number of pushes; callers that want a full ranking
/// should collect and sort instead.
class TopK {
  public:
    explicit TopK(std::size_t k) : k_(k) {}

    void push(doc_id_t id, double score) {
        if (k_ == 0) return;
        if (heap_.size() < k_) {
            heap_.push_back({id, score});
            std::push_heap(heap_.begin(), heap_.end(), better_);
            return;
        }
        const auto& worst = heap_.front();
        if (hit_better(id, score, worst.first, worst.second)) {
            std::pop_heap(heap_.begin(), heap_.end(), better_);
            heap_.back() = {id, score};
            std::push_heap(heap_.begin(), heap_.end(), better_);
        }
    }

    std::vector<ScoredHit> take() {
        // "less" == better, so ascending sort is best-first.
        std::sort_heap(heap_.begin(), heap_.end(), better_);
        std::vector<ScoredHit> hits;
        hits.reserve(heap_.size());
        for (std::size_t i = 0; i < heap_.size(); ++i)
            hits.push_back({heap_[i].first, heap_[i].second, i + 1});
        heap_.clear();
        return hits;
    }

  private:
    using Entry = std::pair<doc_id_t, double>;
    // "less" == better, so the heap root is the current worst.
    static bool better(const Entry& a, const Entry& b) {
        return hit_better(a.first, a.second, b.first, b.second);
    }
    static constexpr bool (*better_)(const Entry&, const Entry&) = &TopK::better;

    std::size_t k_;
    std::vector<Entry> heap_;
};

/// Sorts (id, score) pairs into a full ranked hit list.
inline std::vector<ScoredHit> rank_all(std::vector<std::pair<doc_id_t, double>> scored) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return hit_better(a.first, a.second, b.first, b.second);
    });
    std::vector<ScoredHit> hits;
    hits.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i)
        hits.push_back({scored[i].first, scored[i].second, i + 1});
    return hits;
}

// ---------------------------------------------------------------------------
// Distance and similarity kernels. All accumulate in 64-bit.
// ---------------------------------------------------------------------------

inline void require_same_dim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double euclidean_sq(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline double norm_sq(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return acc;
}

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline double cosine(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        throw DegenerateVectorError("cosine: zero-norm input");
    return dot(a, b) / (na * nb);
}

/// Numerically stable softmax (max-subtraction). Requires at least two
/// logits; a one-element "distribution" is a degenerate case the callers
/// handle themselves.
inline std::vector<double> softmax(std::span<const double> logits) {
    if (logits.size() < 2) throw ArityError("softmax: needs k >= 2 logits");
    detail::require_finite(logits, "softmax");
    const double zmax = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - zmax);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
    return out;
}

}  // namespace vx
