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
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/flat.hpp"
#include "vx/io.hpp"
#include "vx/rng.hpp"

namespace vx {

struct HnswParams {
    std::size_t max_degree = 16;        // per-node cap above layer 0; 2x at layer 0
    std::size_t ef_construction = 128;  // beam width while inserting
    std::size_t ef_search = 64;         // beam width at the bottom layer
    double level_scale = 1.0 / std::log(16.0);  // mL
    std::uint64_t seed = 0;

    void validate() const {
        if (max_degree < 2) throw ConfigError("hnsw: max_degree must be >= 2");
        if (ef_construction < max_degree)
            throw ConfigError("hnsw: ef_construction must be >= max_degree");
        if (ef_search < 1) throw ConfigError("hnsw: ef_search must be >= 1");
        if (!(level_scale > 0.0)) throw ConfigError("hnsw: level_scale must be positive");
    }
};

/// Node level for one uniform draw: floor(-ln(draw) * mL). Levels follow a
/// geometric distribution, so layer populations shrink exponentially.
inline std::size_t assign_level(const HnswParams& params, double draw) {
    if (!(draw > 0.0) || !(draw < 1.0)) throw DomainError("assign_level: draw must be in (0,1)");
    return static_cast<std::size_t>(std::floor(-std::log(draw) * params.level_scale));
}

/// Hierarchical navigable-small-world index. Layer 0 holds every node;
/// each higher layer keeps an exponentially thinning subset. Insertion
/// connects each node to its ef_construction-beam nearest neighbours, and
/// search descends with ef=1 beams until the bottom layer, where a wider
/// beam gathers the result set.
///
/// Neighbour lists are kept symmetric and capped; when a cap forces an edge
/// out, the reverse edge is dropped too. After a full build the bottom layer
/// is checked for connectivity and the build fails rather than returning a
/// partial graph.
class HnswIndex {
  public:
    HnswIndex(EmbeddingSet docs, HnswParams params)
        : docs_(std::move(docs)), params_(params) {
        params_.validate();
        const std::size_t n = docs_.size();
        levels_.resize(n);
        links_.resize(n);
        CounterRng level_rng(params_.seed, {0x6c6576656cULL});  // "level" stream
        for (std::size_t i = 0; i < n; ++i)
            levels_[i] = assign_level(params_, level_rng.next_open_double());
        for (std::size_t i = 0; i < n; ++i) links_[i].assign(levels_[i] + 1, {});
        count_layers();
        for (std::size_t i = 0; i < n; ++i) insert(i);
        check_connected();
    }

    std::size_t size() const { return docs_.size(); }
    std::size_t dim() const { return docs_.dim(); }
    const HnswParams& params() const { return params_; }
    const EmbeddingSet& docs() const { return docs_; }
    std::size_t node_level(std::size_t i) const { return levels_[i]; }
    std::size_t top_level() const { return levels_[entry_]; }
    std::size_t entry_point() const { return entry_; }
    const std::vector<std::uint32_t>& neighbors(std::size_t node, std::size_t layer) const {
        return links_[node][layer];
    }

    std::size_t layer_population(std::size_t layer) const {
        return layer < layer_counts_.size() ? layer_counts_[layer] : 0;
    }

    /// Beam search restricted to one layer. Returns up to ef (node, squared
    /// distance) pairs sorted by distance, ties by node id. Expansion stops
    /// once the best unexpanded candidate is farther than the current worst
    /// result of a full beam.
    std::vector<std::pair<std::uint32_t, double>> search_layer(
        std::size_t layer, std::span<const double> query,
        std::span<const std::uint32_t> entries, std::size_t ef) const {
        if (layer_population(layer) == 0) throw EmptyLayerError("search_layer: empty layer");
        if (query.size() != docs_.dim()) throw DimensionError("search_layer: dimension mismatch");

        using Cand = std::pair<double, std::uint32_t>;
        std::priority_queue<Cand, std::vector<Cand>, std::greater<>> frontier;  // nearest first
        std::priority_queue<Cand> results;                                      // farthest first
        std::vector<char> visited(docs_.size(), 0);

        for (std::uint32_t e : entries) {
            if (levels_[e] < layer) throw EmptyLayerError("search_layer: entry not in layer");
            if (visited[e]) continue;
            visited[e] = 1;
            const double d = euclidean_sq(query, docs_.vec(e));
            frontier.push({d, e});
            results.push({d, e});
            if (results.size() > ef) results.pop();
        }
        while (!frontier.empty()) {
            const auto [d, node] = frontier.top();
            frontier.pop();
            if (results.size() >= ef && d > results.top().first) break;
            for (std::uint32_t nb : links_[node][layer]) {
                if (visited[nb]) continue;
                visited[nb] = 1;
                const double nd = euclidean_sq(query, docs_.vec(nb));
                if (results.size() < ef || nd < results.top().first) {
                    frontier.push({nd, nb});
                    results.push({nd, nb});
                    if (results.size() > ef) results.pop();
                }
            }
        }
        std::vector<std::pair<std::uint32_t, double>> out;
        out.reserve(results.size());
        while (!results.empty()) {
            out.push_back({results.top().second, results.top().first});
            results.pop();
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            return a.first < b.first;
        });
        return out;
    }

    std::vector<ScoredHit> search(std::span<const double> query, std::size_t k) const {
        return search_with_stats(query, k).hits;
    }

    SearchResult search_with_stats(std::span<const double> query, std::size_t k) const {
        if (docs_.size() == 0) throw EmptyIndexError("search_hnsw: empty index");
        if (query.size() != docs_.dim()) throw DimensionError("search_hnsw: dimension mismatch");
        std::uint32_t cur = static_cast<std::uint32_t>(entry_);
        for (std::size_t layer = top_level(); layer > 0; --layer) {
            const auto best = search_layer(layer, query, std::vector<std::uint32_t>{cur}, 1);
            cur = best.front().first;
        }
        const std::size_t ef = std::max(params_.ef_search, k);
        const auto found = search_layer(0, query, std::vector<std::uint32_t>{cur}, ef);
        TopK top(k);
        for (const auto& [node, dist] : found)
            top.push(docs_.id(node), -euclidean_sq(query, docs_.vec(node)));
        return {top.take(), found.size()};
    }

    // Payload: params, node levels, per-layer CSR adjacency, then the
    // embedded flat payload.
    void save_payload(BinaryWriter& w) const {
        w.u32(static_cast<std::uint32_t>(params_.max_degree));
        w.u32(static_cast<std::uint32_t>(params_.ef_construction));
        w.u32(static_cast<std::uint32_t>(params_.ef_search));
        w.f64(params_.level_scale);
        w.u64(params_.seed);
        const std::size_t n = docs_.size();
        w.u32(static_cast<std::uint32_t>(n));
        w.u32(static_cast<std::uint32_t>(entry_));
        w.u32(static_cast<std::uint32_t>(top_level()));
        for (std::size_t lvl : levels_) w.u32(static_cast<std::uint32_t>(lvl));
        for (std::size_t layer = 0; layer <= top_level(); ++layer) {
            std::uint32_t offset = 0;
            for (std::size_t i = 0; i < n; ++i) {
                w.u32(offset);
                if (levels_[i] >= layer) offset += static_cast<std::uint32_t>(links_[i][layer].size());
            }
            w.u32(offset);
            for (std::size_t i = 0; i < n; ++i) {
                if (levels_[i] < layer) continue;
                for (std::uint32_t nb : links_[i][layer]) w.u32(nb);
            }
        }
        FlatIndex::write_embeddings_raw(w, docs_);
    }

    static HnswIndex load_payload(BinaryReader& r) {
        HnswParams params;
        params.max_degree = r.u32();
        params.ef_construction = r.u32();
        params.ef_search = r.u32();
        params.level_scale = r.f64();
        params.seed = r.u64();
        const std::uint32_t n = r.u32();
        const std::uint32_t entry = r.u32();
        const std::uint32_t top = r.u32();
        std::vector<std::size_t> levels(n);
        for (auto& l : levels) l = r.u32();
        std::vector<std::vector<std::vector<std::uint32_t>>> links(n);
        for (std::uint32_t i = 0; i < n; ++i) links[i].assign(levels[i] + 1, {});
        for (std::size_t layer = 0; layer <= top; ++layer) {
            std::vector<std::uint32_t> offsets(n + 1);
            for (auto& o : offsets) o = r.u32();
            for (std::uint32_t i = 0; i < n; ++i) {
                const std::uint32_t count = offsets[i + 1] - offsets[i];
                if (count == 0) continue;
                links[i][layer].resize(count);
                for (auto& nb : links[i][layer]) nb = r.u32();
            }
        }
        return HnswIndex(FlatIndex::read_embeddings_raw(r), params, entry, std::move(levels),
                         std::move(links));
    }

  private:
    HnswIndex(EmbeddingSet docs, HnswParams params, std::size_t entry,
              std::vector<std::size_t> levels,
              std::vector<std::vector<std::vector<std::uint32_t>>> links)
        : docs_(std::move(docs)),
          params_(params),
          levels_(std::move(levels)),
          links_(std::move(links)),
          entry_(entry) {
        count_layers();
    }

    void count_layers() {
        const std::size_t top = *std::max_element(levels_.begin(), levels_.end());
        layer_counts_.assign(top + 1, 0);
        for (std::size_t lvl : levels_)
            for (std::size_t l = 0; l <= lvl; ++l) ++layer_counts_[l];
    }

    std::size_t cap(std::size_t layer) const {
        return layer == 0 ? 2 * params_.max_degree : params_.max_degree;
    }

    void insert(std::size_t i) {
        const std::size_t level = levels_[i];
        if (i == 0) {
            entry_ = 0;
            return;
        }
        std::uint32_t cur = static_cast<std::uint32_t>(entry_);
        const std::size_t entry_level = levels_[entry_];
        const auto x = docs_.vec(i);
        for (std::size_t layer = entry_level; layer > level; --layer) {
            const auto best = search_layer(layer, x, std::vector<std::uint32_t>{cur}, 1);
            cur = best.front().first;
        }
        for (std::size_t layer = std::min(level, entry_level);; --layer) {
            const auto beam =
                search_layer(layer, x, std::vector<std::uint32_t>{cur}, params_.ef_construction);
            const std::size_t want = std::min(params_.max_degree, beam.size());
            for (std::size_t j = 0; j < want; ++j) connect(i, beam[j].first, layer);
            cur = beam.front().first;
            if (layer == 0) break;
        }
        if (level > entry_level) entry_ = i;
    }

    void connect(std::size_t a, std::uint32_t b, std::size_t layer) {
        links_[a][layer].push_back(b);
        links_[b][layer].push_back(static_cast<std::uint32_t>(a));
        shrink(b, layer);
        shrink(a, layer);
    }

    // Keeps the closest cap neighbours of the node; a removed edge takes its
    // reverse edge with it so adjacency stays symmetric. A neighbour whose
    // only remaining edge is this one is kept in preference to a closer
    // droppable one, so shrinking never strands a node.
    void shrink(std::size_t node, std::size_t layer) {
        auto& nbs = links_[node][layer];
        const std::size_t limit = cap(layer);
        if (nbs.size() <= limit) return;
        const auto x = docs_.vec(node);
        std::vector<std::pair<double, std::uint32_t>> by_dist;
        by_dist.reserve(nbs.size());
        for (std::uint32_t nb : nbs) by_dist.push_back({euclidean_sq(x, docs_.vec(nb)), nb});
        std::sort(by_dist.begin(), by_dist.end());

        std::vector<std::uint32_t> kept, dropped;
        kept.reserve(limit);
        for (const auto& [d, nb] : by_dist) {
            if (kept.size() < limit) {
                kept.push_back(nb);
            } else if (links_[nb][layer].size() <= 1) {
                // Swap in the protected node for the farthest droppable one.
                bool swapped = false;
                for (std::size_t j = kept.size(); j-- > 0;) {
                    if (links_[kept[j]][layer].size() > 1) {
                        dropped.push_back(kept[j]);
                        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(j));
                        kept.push_back(nb);
                        swapped = true;
                        break;
                    }
                }
                if (!swapped) dropped.push_back(nb);
            } else {
                dropped.push_back(nb);
            }
        }
        for (std::uint32_t nb : dropped) {
            auto& other = links_[nb][layer];
            other.erase(std::find(other.begin(), other.end(), static_cast<std::uint32_t>(node)));
        }
        nbs = std::move(kept);
    }

    void check_connected() const {
        const std::size_t n = docs_.size();
        std::vector<char> seen(n, 0);
        std::vector<std::uint32_t> stack{static_cast<std::uint32_t>(entry_)};
        seen[entry_] = 1;
        std::size_t reached = 0;
        while (!stack.empty()) {
            const std::uint32_t node = stack.back();
            stack.pop_back();
            ++reached;
            for (std::uint32_t nb : links_[node][0]) {
                if (!seen[nb]) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        if (reached != n)
            throw ConnectivityError("hnsw build: bottom layer disconnected (" +
                                    std::to_string(reached) + "/" + std::to_string(n) +
                                    " reachable)");
    }

    EmbeddingSet docs_;
    HnswParams params_;
    std::vector<std::size_t> levels_;
    std::vector<std::size_t> layer_counts_;
    // links_[node][layer] -> neighbour node indices
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::size_t entry_ = 0;
};

}  // namespace vx
