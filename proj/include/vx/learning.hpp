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
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/rng.hpp"

// Fine-tuning mathematics as pure numeric operations over externally
// produced scores and embeddings. No parameters live here and no gradients
// are computed.

namespace vx {

/// (query, relevant doc, non-relevant doc) training example.
struct Triple {
    doc_id_t query_id;
    doc_id_t pos_doc_id;
    doc_id_t neg_doc_id;

    Triple(doc_id_t q, doc_id_t pos, doc_id_t neg)
        : query_id(q), pos_doc_id(pos), neg_doc_id(neg) {
        if (pos == neg) throw DataError("Triple: positive and negative must differ");
    }
};

/// A query with k >= 2 candidate documents, the positive first.
struct NceGroup {
    doc_id_t query_id;
    std::vector<doc_id_t> doc_ids;

    NceGroup(doc_id_t q, std::vector<doc_id_t> ids) : query_id(q), doc_ids(std::move(ids)) {
        if (doc_ids.size() < 2) throw ArityError("NceGroup: needs k >= 2 documents");
        std::unordered_set<doc_id_t> seen(doc_ids.begin(), doc_ids.end());
        if (seen.size() != doc_ids.size()) throw DataError("NceGroup: duplicate doc ids");
    }
};

// ---------------------------------------------------------------------------
// Classification heads.
// ---------------------------------------------------------------------------

/// Two-logit head: softmax over [z0, z1], returns the probability of the
/// relevant class (index 1).
inline double head_binary(double z0, double z1) {
    const double zmax = std::max(z0, z1);
    const double e0 = std::exp(z0 - zmax);
    const double e1 = std::exp(z1 - zmax);
    return e1 / (e0 + e1);
}

/// Single-logit head: the raw projection is the score.
inline double head_scalar(double z) { return z; }

/// Two-token head: softmax over exactly the False/True logits, returns
/// p_true.
inline double head_two_token(double z_false, double z_true) {
    return head_binary(z_false, z_true);
}

// ---------------------------------------------------------------------------
// Losses.
// ---------------------------------------------------------------------------

/// Mean binary cross entropy over (s_pos, s_neg) probability pairs:
/// (1 / 2|T|) * sum(-log s_pos - log(1 - s_neg)). Scores must lie strictly
/// inside (0, 1); they are probabilities from the heads above.
inline double ce_triple_loss(const std::vector<std::pair<double, double>>& scores) {
    if (scores.empty()) throw ArityError("ce_triple_loss: no score pairs");
    double total = 0.0;
    for (const auto& [s_pos, s_neg] : scores) {
        if (!(s_pos > 0.0 && s_pos < 1.0) || !(s_neg > 0.0 && s_neg < 1.0))
            throw DomainError("ce_triple_loss: scores must be in (0, 1)");
        total += -std::log(s_pos) - std::log(1.0 - s_neg);
    }
    return total / (2.0 * static_cast<double>(scores.size()));
}

/// Loss of one score row with the positive at index 0:
/// -log(exp(s_0) / sum_j exp(s_j)), computed with max-subtraction.
inline double nce_loss_row(std::span<const double> scores) {
    if (scores.size() < 2) throw ArityError("nce_loss: row needs k >= 2 scores");
    detail::require_finite(scores, "nce_loss");
    const double zmax = *std::max_element(scores.begin(), scores.end());
    double denom = 0.0;
    for (double s : scores) denom += std::exp(s - zmax);
    return std::log(denom) - (scores[0] - zmax);
}

/// Mean noise-contrastive loss over rows.
inline double nce_loss(const std::vector<std::vector<double>>& score_rows) {
    if (score_rows.empty()) throw ArityError("nce_loss: no rows");
    double total = 0.0;
    for (const auto& row : score_rows) total += nce_loss_row(row);
    return total / static_cast<double>(score_rows.size());
}

/// Full softmax posterior over every provided document score. This is the
/// partition-function form the NCE loss approximates; it is exposed as a
/// diagnostic only because it is O(|D|) per query.
inline std::vector<double> full_posterior(std::span<const double> scores) {
    return softmax(scores);
}

// ---------------------------------------------------------------------------
// Negative sampling.
// ---------------------------------------------------------------------------

/// Uniform sample without replacement from corpus_ids minus exclude,
/// deterministic under the seed.
inline std::vector<doc_id_t> sample_random(const std::vector<doc_id_t>& corpus_ids,
                                           std::size_t count, std::uint64_t seed,
                                           const std::vector<doc_id_t>& exclude = {}) {
    std::unordered_set<doc_id_t> excluded(exclude.begin(), exclude.end());
    std::vector<doc_id_t> eligible;
    eligible.reserve(corpus_ids.size());
    for (doc_id_t id : corpus_ids)
        if (!excluded.count(id)) eligible.push_back(id);
    if (count > eligible.size())
        throw CardinalityError("sample_random: requested " + std::to_string(count) +
                               " from " + std::to_string(eligible.size()) + " eligible ids");
    CounterRng rng(seed, {0x73616d706c65ULL});  // "sample" stream
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }
    eligible.resize(count);
    return eligible;
}

/// In-batch negatives: each query's negatives are the positives of the other
/// b-1 rows, so every group has k = b documents with its own positive first.
inline std::vector<NceGroup> sample_in_batch(
    const std::vector<std::pair<doc_id_t, doc_id_t>>& batch) {
    if (batch.size() < 2)
        throw BatchError("sample_in_batch: batch size must be >= 2 to form k >= 2 groups");
    std::unordered_set<doc_id_t> positives;
    for (const auto& [q, pos] : batch) {
        if (!positives.insert(pos).second)
            throw BatchError("sample_in_batch: duplicate positive " + std::to_string(pos));
    }
    std::vector<NceGroup> groups;
    groups.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<doc_id_t> ids;
        ids.reserve(batch.size());
        ids.push_back(batch[i].second);
        for (std::size_t j = 0; j < batch.size(); ++j)
            if (j != i) ids.push_back(batch[j].second);
        groups.emplace_back(batch[i].first, std::move(ids));
    }
    return groups;
}

/// Hard negatives from a retrieval system: the top-ranked non-positive hits,
/// in rank order. The retriever is any callable (query, k) -> hits over the
/// corpus. Throws ShortfallError (with the partial list attached) when fewer
/// than count non-positives come back.
template <typename Retriever>
std::vector<doc_id_t> sample_hard_negatives(Retriever&& retrieve,
                                            std::span<const double> query_vec,
                                            const std::vector<doc_id_t>& pos_ids,
                                            std::size_t count) {
    const std::unordered_set<doc_id_t> positive(pos_ids.begin(), pos_ids.end());
    const std::vector<ScoredHit> hits = retrieve(query_vec, count + pos_ids.size());
    std::vector<doc_id_t> negatives;
    negatives.reserve(count);
    for (const auto& hit : hits) {
        if (positive.count(hit.doc_id)) continue;
        negatives.push_back(hit.doc_id);
        if (negatives.size() == count) break;
    }
    if (negatives.size() < count)
        throw ShortfallError("sample_hard_negatives: only " +
                                 std::to_string(negatives.size()) + " of " +
                                 std::to_string(count) + " negatives available",
                             std::move(negatives));
    return negatives;
}

// ---------------------------------------------------------------------------
// File formats: triples TSV and score-matrix JSON lines.
// ---------------------------------------------------------------------------

inline std::vector<Triple> load_triples_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open for reading: " + path);
    std::vector<Triple> triples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        doc_id_t q = 0, pos = 0, neg = 0;
        if (!(ss >> q >> pos >> neg))
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 'query<TAB>pos<TAB>neg'");
        try {
            triples.emplace_back(q, pos, neg);
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (triples.empty()) throw DataError(path + ": no triples");
    return triples;
}

}  // namespace vx
