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
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/io.hpp"

namespace vx {

/// Multi-embedding corpus with the flattened token-row <-> (doc, token)
/// bijection needed to run token-level ANN and map hits back to documents.
class MultiDocStore {
  public:
    explicit MultiDocStore(std::vector<MultiEmbedding> docs) : docs_(std::move(docs)) {
        if (docs_.empty()) throw IngestError("MultiDocStore: no documents");
        const std::size_t d = docs_.front().dim();
        std::unordered_map<doc_id_t, char> seen;
        row_doc_.reserve(docs_.size() * 8);
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            if (docs_[i].dim() != d) throw DimensionError("MultiDocStore: mixed dimensions");
            if (!seen.emplace(docs_[i].id(), 1).second)
                throw IngestError("MultiDocStore: duplicate doc id");
            doc_offset_.push_back(row_doc_.size());
            for (std::size_t t = 0; t < docs_[i].rows(); ++t) row_doc_.push_back(i);
        }
    }

    std::size_t doc_count() const { return docs_.size(); }
    std::size_t total_rows() const { return row_doc_.size(); }
    std::size_t dim() const { return docs_.front().dim(); }
    const MultiEmbedding& doc(std::size_t i) const { return docs_[i]; }
    const std::vector<MultiEmbedding>& docs() const { return docs_; }

    std::size_t doc_of_row(std::size_t row) const { return row_doc_[row]; }

    std::pair<std::size_t, std::size_t> locate_row(std::size_t row) const {
        const std::size_t d = row_doc_[row];
        return {d, row - doc_offset_[d]};
    }

    /// All token rows as one embedding set; ids are the global row indices.
    EmbeddingSet token_matrix() const {
        std::vector<doc_id_t> ids;
        ids.reserve(total_rows());
        std::vector<double> data;
        data.reserve(total_rows() * dim());
        for (const auto& doc : docs_) {
            for (std::size_t t = 0; t < doc.rows(); ++t) {
                ids.push_back(static_cast<doc_id_t>(ids.size()));
                const auto v = doc.row(t).values();
                data.insert(data.end(), v.begin(), v.end());
            }
        }
        return EmbeddingSet(std::move(ids), std::move(data), dim());
    }

  private:
    std::vector<MultiEmbedding> docs_;
    std::vector<std::size_t> row_doc_;     // global row -> doc index
    std::vector<std::size_t> doc_offset_;  // doc index -> first global row
};

/// Poly-encoder score: the first m document rows are attention-pooled with
/// softmax weights from their dot products against the single query vector,
/// and the pooled vector is dotted with the query.
inline double poly_score(const DenseVector& query, const MultiEmbedding& doc, std::size_t m) {
    if (m < 1 || m > doc.rows())
        throw ArityError("poly_score: m outside [1, rows]");
    if (query.dim() != doc.dim()) throw DimensionError("poly_score: dimension mismatch");
    if (m == 1) return dot(query, doc.row(0));  // degenerate softmax weight of 1
    std::vector<double> sims(m);
    for (std::size_t i = 0; i < m; ++i) sims[i] = dot(query, doc.row(i));
    const auto weights = softmax(sims);
    std::vector<double> pooled(query.dim(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = doc.row(i).values();
        for (std::size_t d = 0; d < pooled.size(); ++d) pooled[d] += weights[i] * row[d];
    }
    return dot(query, pooled);
}

/// Maximum inner product between the query vector and the first m document
/// rows.
inline double maxsim_score(const DenseVector& query, const MultiEmbedding& doc, std::size_t m) {
    if (m < 1 || m > doc.rows())
        throw ArityError("maxsim_score: m outside [1, rows]");
    if (query.dim() != doc.dim()) throw DimensionError("maxsim_score: dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) best = std::max(best, dot(query, doc.row(i)));
    return best;
}

/// Late-interaction score: each query row contributes its maximum dot
/// product over all document rows, and the maxima are summed. Row 0 of the
/// query (the classification row) participates by default; pass
/// include_query_cls = false to start from row 1.
inline double sum_maxsim_score(const MultiEmbedding& query, const MultiEmbedding& doc,
                               bool include_query_cls = true) {
    if (query.dim() != doc.dim()) throw DimensionError("sum_maxsim_score: dimension mismatch");
    const std::size_t first = include_query_cls ? 0 : 1;
    if (first >= query.rows())
        throw ArityError("sum_maxsim_score: no query rows left after dropping row 0");
    double total = 0.0;
    for (std::size_t i = first; i < query.rows(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < doc.rows(); ++j)
            best = std::max(best, dot(query.row(i), doc.row(j)));
        total += best;
    }
    return total;
}

/// Projections for lexical-match scoring: the classification rows go through
/// the square matrix, the token rows through the reducing one. Both arrive
/// as data, never trained here.
struct CoilProjections {
    Matrix cls;  // dim x dim
    Matrix tok;  // tok_dim x dim, tok_dim in [1, dim)

    void validate(std::size_t dim) const {
        if (cls.rows != dim || cls.cols != dim)
            throw DimensionError("coil: cls projection must be dim x dim");
        if (tok.cols != dim) throw DimensionError("coil: tok projection cols must equal dim");
        if (tok.rows < 1 || tok.rows >= dim)
            throw DimensionError("coil: tok projection rows must be in [1, dim)");
    }

    static CoilProjections load(const std::string& cls_path, const std::string& tok_path) {
        return {load_matrix(cls_path), load_matrix(tok_path)};
    }
};

/// Lexical late-interaction score: projected classification dot product plus,
/// per query token, the maximum projected dot product over document tokens
/// with the same term id. Query tokens without a lexical match contribute 0.
inline double coil_score(const MultiEmbedding& query, const MultiEmbedding& doc,
                         const CoilProjections& proj) {
    if (!query.has_token_ids() || !doc.has_token_ids())
        throw LexicalInfoError("coil_score: token ids required on query and document");
    if (query.dim() != doc.dim()) throw DimensionError("coil_score: dimension mismatch");
    proj.validate(query.dim());

    double score = dot(proj.cls.apply(query.row(0)), proj.cls.apply(doc.row(0)));

    std::vector<std::vector<double>> doc_proj(doc.rows());
    for (std::size_t j = 1; j < doc.rows(); ++j) doc_proj[j] = proj.tok.apply(doc.row(j));

    const auto& q_terms = query.token_ids();
    const auto& d_terms = doc.token_ids();
    for (std::size_t i = 1; i < query.rows(); ++i) {
        double best = -std::numeric_limits<double>::infinity();
        bool matched = false;
        std::vector<double> q_proj;
        for (std::size_t j = 1; j < doc.rows(); ++j) {
            if (d_terms[j] != q_terms[i]) continue;
            if (!matched) q_proj = proj.tok.apply(query.row(i));
            matched = true;
            best = std::max(best, dot(q_proj, doc_proj[j]));
        }
        if (matched) score += best;
    }
    return score;
}

/// Candidate generation + exact re-ranking. Stage 1 runs the token-level ANN
/// for every query row and maps the top k' rows back to their documents;
/// stage 2 re-scores the candidate documents exactly with sum_maxsim.
///
/// The ANN must have been built over store.token_matrix(): hit ids are
/// interpreted as global row indices.
template <typename TokenAnn>
std::vector<ScoredHit> two_stage_search(const MultiDocStore& store, const TokenAnn& ann,
                                        const MultiEmbedding& query, std::size_t k_prime,
                                        std::size_t k, bool include_query_cls = true) {
    if (ann.size() != store.total_rows())
        throw ConsistencyError("two_stage_search: ann row count " + std::to_string(ann.size()) +
                               " != store rows " + std::to_string(store.total_rows()));
    if (k_prime < 1) throw ArityError("two_stage_search: k_prime must be >= 1");
    if (query.dim() != store.dim()) throw DimensionError("two_stage_search: dimension mismatch");

    const std::size_t first = include_query_cls ? 0 : 1;
    if (first >= query.rows())
        throw ArityError("two_stage_search: no query rows left after dropping row 0");

    std::vector<char> seen(store.doc_count(), 0);
    std::vector<std::size_t> candidates;  // first-seen order; stage 2 makes order irrelevant
    for (std::size_t i = first; i < query.rows(); ++i) {
        const auto hits = ann.search(query.row(i).values(), k_prime);
        for (const auto& hit : hits) {
            const std::size_t doc = store.doc_of_row(static_cast<std::size_t>(hit.doc_id));
            if (!seen[doc]) {
                seen[doc] = 1;
                candidates.push_back(doc);
            }
        }
    }

    TopK top(k);
    for (std::size_t doc : candidates)
        top.push(store.doc(doc).id(),
                 sum_maxsim_score(query, store.doc(doc), include_query_cls));
    return top.take();
}

enum class PassageAgg { FirstP, MaxP, SumP };

/// Folds per-passage scores into one document score.
inline double aggregate_passages(std::span<const double> scores, PassageAgg mode) {
    if (scores.empty()) throw ArityError("aggregate_passages: empty score list");
    switch (mode) {
        case PassageAgg::FirstP:
            return scores.front();
        case PassageAgg::MaxP:
            return *std::max_element(scores.begin(), scores.end());
        case PassageAgg::SumP: {
            double total = 0.0;
            for (double s : scores) total += s;
            return total;
        }
    }
    throw ConfigError("aggregate_passages: unknown mode");
}

}  // namespace vx
