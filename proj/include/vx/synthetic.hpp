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
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/rng.hpp"

namespace vx {

/// Gaussian-mixture generator settings. Points are assigned to clusters
/// round-robin; the means are drawn once and recorded so tests can use them
/// as ground truth.
struct SyntheticSpec {
    std::size_t n = 1000;
    std::size_t dim = 32;
    std::size_t clusters = 1;
    std::uint64_t seed = 0;
    double cluster_std = 1.0;
    double mean_scale = 10.0;  // cluster means ~ mean_scale * N(0, I)

    void validate() const {
        if (clusters < 1) throw ConfigError("gen: clusters must be >= 1");
        if (n < clusters) throw ConfigError("gen: n must be >= clusters");
        if (dim < 1) throw ConfigError("gen: dim must be >= 1");
        if (!(cluster_std >= 0.0)) throw ConfigError("gen: cluster_std must be >= 0");
    }
};

struct SyntheticData {
    EmbeddingSet docs;
    std::vector<std::uint32_t> assignment;  // point -> cluster
    std::vector<std::vector<double>> means;
};

inline SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    CounterRng mean_rng(spec.seed, {0x6d65616e73ULL});
    std::vector<std::vector<double>> means(spec.clusters, std::vector<double>(spec.dim));
    for (auto& m : means)
        for (auto& v : m) v = spec.mean_scale * mean_rng.next_gaussian();

    CounterRng point_rng(spec.seed, {0x706f696e7473ULL});
    std::vector<doc_id_t> ids(spec.n);
    std::vector<double> data(spec.n * spec.dim);
    std::vector<std::uint32_t> assignment(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        ids[i] = static_cast<doc_id_t>(i);
        const std::size_t c = i % spec.clusters;
        assignment[i] = static_cast<std::uint32_t>(c);
        for (std::size_t d = 0; d < spec.dim; ++d)
            data[i * spec.dim + d] = means[c][d] + spec.cluster_std * point_rng.next_gaussian();
    }
    return {EmbeddingSet(std::move(ids), std::move(data), spec.dim), std::move(assignment),
            std::move(means)};
}

/// Ground-truth sidecar for a generated dense set.
inline void save_truth_json(const SyntheticData& data, const std::string& path) {
    nlohmann::json truth{{"assignment", data.assignment}, {"means", data.means}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << truth.dump(2) << '\n';
}

/// Multi-embedding corpus: per document, a handful of token rows scattered
/// around the document's cluster mean, with token ids drawn from a small
/// vocabulary so lexical scorers have matches to find.
inline std::vector<MultiEmbedding> gen_synthetic_multi(const SyntheticSpec& spec,
                                                       std::size_t tokens_lo,
                                                       std::size_t tokens_hi,
                                                       std::size_t vocab_size) {
    spec.validate();
    if (tokens_lo < 1 || tokens_hi < tokens_lo)
        throw ConfigError("gen: token count range invalid");
    if (vocab_size < 1) throw ConfigError("gen: vocab size must be >= 1");
    CounterRng mean_rng(spec.seed, {0x6d65616e73ULL});
    std::vector<std::vector<double>> means(spec.clusters, std::vector<double>(spec.dim));
    for (auto& m : means)
        for (auto& v : m) v = spec.mean_scale * mean_rng.next_gaussian();

    CounterRng rng(spec.seed, {0x6d756c7469ULL});
    std::vector<MultiEmbedding> docs;
    docs.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto& mean = means[i % spec.clusters];
        const std::size_t tokens =
            tokens_lo + static_cast<std::size_t>(rng.next_below(tokens_hi - tokens_lo + 1));
        std::vector<DenseVector> rows;
        rows.reserve(tokens);
        std::vector<term_id_t> token_ids;
        token_ids.reserve(tokens);
        for (std::size_t t = 0; t < tokens; ++t) {
            std::vector<double> v(spec.dim);
            for (std::size_t d = 0; d < spec.dim; ++d)
                v[d] = mean[d] + spec.cluster_std * rng.next_gaussian();
            rows.emplace_back(std::move(v));
            token_ids.push_back(static_cast<term_id_t>(rng.next_below(vocab_size)));
        }
        docs.emplace_back(static_cast<doc_id_t>(i), std::move(rows), std::move(token_ids));
    }
    return docs;
}

/// Sparse corpus: per document, a few vocabulary terms with positive
/// weights.
inline std::vector<SparseDoc> gen_synthetic_sparse(std::size_t n, std::size_t vocab_size,
                                                   std::size_t terms_lo, std::size_t terms_hi,
                                                   std::uint64_t seed) {
    if (n < 1) throw ConfigError("gen: n must be >= 1");
    if (vocab_size < 1) throw ConfigError("gen: vocab size must be >= 1");
    if (terms_lo < 1 || terms_hi < terms_lo || terms_hi > vocab_size)
        throw ConfigError("gen: term count range invalid");
    CounterRng rng(seed, {0x737061727365ULL});
    std::vector<SparseDoc> docs;
    docs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t terms =
            terms_lo + static_cast<std::size_t>(rng.next_below(terms_hi - terms_lo + 1));
        std::map<term_id_t, double> entries;
        while (entries.size() < terms) {
            const auto t = static_cast<term_id_t>(rng.next_below(vocab_size));
            const double w = 0.05 + 4.0 * rng.next_double();
            entries.emplace(t, w);
        }
        docs.push_back({static_cast<doc_id_t>(i), SparseVector(std::move(entries))});
    }
    return docs;
}

}  // namespace vx
