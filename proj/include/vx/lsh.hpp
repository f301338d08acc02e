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
#include "vx/flat.hpp"
#include "vx/io.hpp"
#include "vx/rng.hpp"

namespace vx {

/// Euclidean LSH: r hash tables, each keyed by m concatenated p-stable
/// random projections h(x) = floor((a.x + b) / w), a ~ N(0, I) and
/// b ~ U[0, w). Querying takes the union of the query's bucket in every
/// table and re-ranks the candidates exactly.
struct LshParams {
    std::size_t tables = 16;       // r
    std::size_t projections = 8;   // m, per table
    double width = 4.0;            // w, in units of the data's median pairwise distance
    std::uint64_t seed = 0;

    void validate() const {
        if (tables < 1) throw ConfigError("lsh: tables must be >= 1");
        if (projections < 1) throw ConfigError("lsh: projections must be >= 1");
        if (!(width > 0.0)) throw ConfigError("lsh: width must be positive");
    }
};

namespace detail {

// Projection j of table t draws its Gaussian row and offset from a generator
// keyed by (seed, t, j), so keys are reproducible from the parameters alone.
inline void lsh_projection(const LshParams& p, std::size_t table, std::size_t j, std::size_t dim,
                           std::vector<double>& row, double& offset) {
    CounterRng rng(p.seed, {table, j});
    row.resize(dim);
    for (auto& v : row) v = rng.next_gaussian();
    offset = rng.next_double() * p.width;
}

inline std::uint64_t mix_key(std::span<const std::int64_t> key) {
    std::uint64_t h = 0x811c9dc5u;
    for (std::int64_t k : key) h = mix64(h ^ static_cast<std::uint64_t>(k));
    return h;
}

}  // namespace detail

/// Bucket key of one vector in one table: m projection integers.
/// Deterministic in (params.seed, table_index).
inline std::vector<std::int64_t> hash_point(const LshParams& params, std::size_t table_index,
                                            std::span<const double> x) {
    params.validate();
    if (table_index >= params.tables) throw ConfigError("hash_point: table index out of range");
    std::vector<std::int64_t> key(params.projections);
    std::vector<double> row;
    double offset = 0.0;
    for (std::size_t j = 0; j < params.projections; ++j) {
        detail::lsh_projection(params, table_index, j, x.size(), row, offset);
        const double proj = dot(row, x) + offset;
        key[j] = static_cast<std::int64_t>(std::floor(proj / params.width));
    }
    return key;
}

class LshIndex {
  public:
    LshIndex(EmbeddingSet docs, LshParams params) : docs_(std::move(docs)), params_(params) {
        params_.validate();
        effective_ = params_;
        effective_.width = params_.width * median_pairwise_distance(docs_, params_.seed);
        build_tables();
    }

    std::size_t size() const { return docs_.size(); }
    std::size_t dim() const { return docs_.dim(); }
    const LshParams& params() const { return params_; }
    /// Parameters with the width rescaled to data units; the hashes used by
    /// build and search both come from these.
    const LshParams& effective_params() const { return effective_; }
    const EmbeddingSet& docs() const { return docs_; }

    std::vector<ScoredHit> search(std::span<const double> query, std::size_t k) const {
        return search_with_stats(query, k).hits;
    }

    /// Union of the query's r buckets, then exact Euclidean top-k within the
    /// candidate set. Returns fewer than k hits when candidates are scarce.
    SearchResult search_with_stats(std::span<const double> query, std::size_t k) const {
        if (query.size() != docs_.dim()) throw DimensionError("search_lsh: dimension mismatch");
        std::vector<char> seen(docs_.size(), 0);
        std::vector<std::uint32_t> candidates;
        for (std::size_t t = 0; t < effective_.tables; ++t) {
            const auto key = detail::mix_key(hash_point(effective_, t, query));
            auto it = tables_[t].find(key);
            if (it == tables_[t].end()) continue;
            for (std::uint32_t local : it->second) {
                if (!seen[local]) {
                    seen[local] = 1;
                    candidates.push_back(local);
                }
            }
        }
        TopK top(k);
        for (std::uint32_t local : candidates)
            top.push(docs_.id(local), -euclidean_sq(query, docs_.vec(local)));
        return {top.take(), candidates.size()};
    }

    // Payload: params (+ effective width), per-table sorted (key, count, ids)
    // runs, then the embedded flat payload for exact re-ranking.
    void save_payload(BinaryWriter& w) const {
        w.u32(static_cast<std::uint32_t>(params_.tables));
        w.u32(static_cast<std::uint32_t>(params_.projections));
        w.f64(params_.width);
        w.u64(params_.seed);
        w.f64(effective_.width);
        for (const auto& table : tables_) {
            std::map<std::uint64_t, const std::vector<std::uint32_t>*> sorted;
            for (const auto& [key, ids] : table) sorted.emplace(key, &ids);
            w.u32(static_cast<std::uint32_t>(sorted.size()));
            for (const auto& [key, ids] : sorted) {
                w.u64(key);
                w.u32(static_cast<std::uint32_t>(ids->size()));
                for (std::uint32_t id : *ids) w.u32(id);
            }
        }
        FlatIndex::write_embeddings_raw(w, docs_);
    }

    static LshIndex load_payload(BinaryReader& r) {
        LshParams params;
        params.tables = r.u32();
        params.projections = r.u32();
        params.width = r.f64();
        params.seed = r.u64();
        const double effective_width = r.f64();
        std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> tables(
            params.tables);
        for (auto& table : tables) {
            const std::uint32_t buckets = r.u32();
            table.reserve(buckets);
            for (std::uint32_t b = 0; b < buckets; ++b) {
                const std::uint64_t key = r.u64();
                const std::uint32_t count = r.u32();
                std::vector<std::uint32_t> ids(count);
                for (auto& id : ids) id = r.u32();
                table.emplace(key, std::move(ids));
            }
        }
        return LshIndex(FlatIndex::read_embeddings_raw(r), params, effective_width,
                        std::move(tables));
    }

    /// Median of Euclidean distances over a seeded sample of pairs (all
    /// pairs when the collection is small). Falls back to 1 when the sample
    /// median is zero, which only happens for fully duplicated data.
    static double median_pairwise_distance(const EmbeddingSet& docs, std::uint64_t seed) {
        const std::size_t n = docs.size();
        std::vector<double> dists;
        if (n < 2) return 1.0;
        if (n <= 512) {
            dists.reserve(n * (n - 1) / 2);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    dists.push_back(std::sqrt(euclidean_sq(docs.vec(i), docs.vec(j))));
        } else {
            CounterRng rng(seed, {0x6d656469616eULL});  // "median" stream
            const std::size_t samples = 100000;
            dists.reserve(samples);
            for (std::size_t s = 0; s < samples; ++s) {
                const auto i = rng.next_below(n);
                auto j = rng.next_below(n - 1);
                if (j >= i) ++j;
                dists.push_back(std::sqrt(euclidean_sq(docs.vec(i), docs.vec(j))));
            }
        }
        auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
        std::nth_element(dists.begin(), mid, dists.end());
        return *mid > 0.0 ? *mid : 1.0;
    }

    /// Sum of bucket sizes in one table; equals size() by construction.
    std::size_t table_population(std::size_t t) const {
        std::size_t total = 0;
        for (const auto& [key, ids] : tables_[t]) total += ids.size();
        return total;
    }

    std::size_t bucket_count(std::size_t t) const { return tables_[t].size(); }

  private:
    LshIndex(EmbeddingSet docs, LshParams params, double effective_width,
             std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> tables)
        : docs_(std::move(docs)), params_(params), tables_(std::move(tables)) {
        effective_ = params_;
        effective_.width = effective_width;
    }

    void build_tables() {
        tables_.assign(effective_.tables, {});
        // Materialize the projections once; they are the same values
        // hash_point derives from (seed, table, j).
        const std::size_t dim = docs_.dim();
        std::vector<std::vector<double>> rows(effective_.tables * effective_.projections);
        std::vector<double> offsets(effective_.tables * effective_.projections);
        for (std::size_t t = 0; t < effective_.tables; ++t)
            for (std::size_t j = 0; j < effective_.projections; ++j)
                detail::lsh_projection(effective_, t, j, dim,
                                       rows[t * effective_.projections + j],
                                       offsets[t * effective_.projections + j]);
        std::vector<std::int64_t> key(effective_.projections);
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            const auto x = docs_.vec(i);
            for (std::size_t t = 0; t < effective_.tables; ++t) {
                for (std::size_t j = 0; j < effective_.projections; ++j) {
                    const std::size_t slot = t * effective_.projections + j;
                    const double proj = dot(rows[slot], x) + offsets[slot];
                    key[j] = static_cast<std::int64_t>(std::floor(proj / effective_.width));
                }
                tables_[t][detail::mix_key(key)].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }

    EmbeddingSet docs_;
    LshParams params_;
    LshParams effective_;
    std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> tables_;
};

}  // namespace vx
