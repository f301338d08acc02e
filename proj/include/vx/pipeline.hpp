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

#include <chrono>
#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/flat.hpp"
#include "vx/graph.hpp"
#include "vx/io.hpp"
#include "vx/lsh.hpp"
#include "vx/metrics.hpp"
#include "vx/mips.hpp"
#include "vx/quant.hpp"
#include "vx/synthetic.hpp"

namespace vx {

enum class IndexKind { flat, lsh, ivf, pq, ivfpq, hnsw };

inline std::string to_string(IndexKind kind) {
    switch (kind) {
        case IndexKind::flat: return "flat";
        case IndexKind::lsh: return "lsh";
        case IndexKind::ivf: return "ivf";
        case IndexKind::pq: return "pq";
        case IndexKind::ivfpq: return "ivfpq";
        case IndexKind::hnsw: return "hnsw";
    }
    throw ConfigError("unknown index kind");
}

inline IndexKind index_kind_from(const std::string& name) {
    if (name == "flat") return IndexKind::flat;
    if (name == "lsh") return IndexKind::lsh;
    if (name == "ivf") return IndexKind::ivf;
    if (name == "pq") return IndexKind::pq;
    if (name == "ivfpq") return IndexKind::ivfpq;
    if (name == "hnsw") return IndexKind::hnsw;
    throw ConfigError("unknown index kind '" + name + "'");
}

struct IndexParams {
    IndexKind kind = IndexKind::flat;
    Metric metric = Metric::euclidean;
    std::uint64_t seed = 0;
    LshParams lsh;
    HnswParams hnsw;
    std::size_t ivf_lists = 16;
    std::size_t pq_m = 8;
    std::size_t pq_k = 256;
    std::size_t kmeans_iters = 10;
};

/// Uniform front door over the index family. Inner-product search on the
/// approximate indexes routes through the MIP->NN augmentation: documents
/// are transformed at build time, queries at search time, and the fitted M
/// travels inside the artifact header. A flat index handles inner product
/// natively.
class AnyIndex {
  public:
    using Impl = std::variant<FlatIndex, LshIndex, IvfIndex, PqIndex, IvfPqIndex, HnswIndex>;

    static AnyIndex build(const IndexParams& params, const EmbeddingSet& docs) {
        const bool transform =
            params.metric == Metric::inner_product && params.kind != IndexKind::flat;
        std::optional<MipTransform> mip;
        if (transform) mip = MipTransform::fit(docs);
        const EmbeddingSet* data = &docs;
        std::optional<EmbeddingSet> transformed;
        if (transform) {
            transformed = mip->transform_docs(docs);
            data = &*transformed;
        }
        auto make = [&]() -> Impl {
            switch (params.kind) {
                case IndexKind::flat:
                    return FlatIndex(docs, params.metric);
                case IndexKind::lsh:
                    return LshIndex(*data, params.lsh);
                case IndexKind::ivf:
                    return IvfIndex(*data, params.ivf_lists, params.kmeans_iters, params.seed);
                case IndexKind::pq:
                    return PqIndex(*data, params.pq_m, params.pq_k, params.kmeans_iters,
                                   params.seed);
                case IndexKind::ivfpq:
                    return IvfPqIndex(*data, params.ivf_lists, params.pq_m, params.pq_k,
                                      params.kmeans_iters, params.seed);
                case IndexKind::hnsw:
                    return HnswIndex(*data, params.hnsw);
            }
            throw ConfigError("unknown index kind");
        };
        return AnyIndex(params.kind, params.metric, std::move(mip), make());
    }

    IndexKind kind() const { return kind_; }
    Metric metric() const { return metric_; }

    std::size_t size() const {
        return std::visit([](const auto& ix) { return ix.size(); }, *impl_);
    }

    /// Dimension of queries this index accepts (the source dimension; the
    /// augmentation adds its coordinate internally).
    std::size_t query_dim() const {
        const std::size_t d = std::visit([](const auto& ix) { return ix.dim(); }, *impl_);
        return mip_ ? d - 1 : d;
    }

    std::size_t probe_limit() const {
        if (const auto* ivf = std::get_if<IvfIndex>(&*impl_)) return ivf->list_count();
        if (const auto* ivfpq = std::get_if<IvfPqIndex>(&*impl_)) return ivfpq->list_count();
        return 1;
    }

    SearchResult search_with_stats(std::span<const double> query, std::size_t k,
                                   std::size_t probes = 1) const {
        std::optional<DenseVector> mapped;
        if (mip_) {
            mapped = mip_->transform_query(query);
            query = mapped->values();
        }
        if (const auto* flat = std::get_if<FlatIndex>(&*impl_))
            return flat->search_with_stats(query, k);
        if (const auto* lsh = std::get_if<LshIndex>(&*impl_))
            return lsh->search_with_stats(query, k);
        if (const auto* ivf = std::get_if<IvfIndex>(&*impl_))
            return ivf->search_with_stats(query, probes, k);
        if (const auto* pq = std::get_if<PqIndex>(&*impl_)) return pq->search_with_stats(query, k);
        if (const auto* ivfpq = std::get_if<IvfPqIndex>(&*impl_))
            return ivfpq->search_with_stats(query, probes, k);
        return std::get<HnswIndex>(*impl_).search_with_stats(query, k);
    }

    std::vector<ScoredHit> search(std::span<const double> query, std::size_t k,
                                  std::size_t probes = 1) const {
        return search_with_stats(query, k, probes).hits;
    }

    std::vector<char> serialize() const {
        BinaryWriter w;
        const char* magic = kMagicFlat;
        switch (kind_) {
            case IndexKind::flat: magic = kMagicFlat; break;
            case IndexKind::lsh: magic = kMagicLsh; break;
            case IndexKind::ivf: magic = kMagicIvf; break;
            case IndexKind::pq: magic = kMagicPq; break;
            case IndexKind::ivfpq: magic = kMagicIvfPq; break;
            case IndexKind::hnsw: magic = kMagicHnsw; break;
        }
        w.magic(magic);
        w.u8(static_cast<std::uint8_t>(metric_));
        w.f64(mip_ ? mip_->big_m() : 0.0);
        std::visit([&w](const auto& ix) { ix.save_payload(w); }, *impl_);
        return w.buffer();
    }

    void save(const std::string& path) const {
        BinaryWriter w;
        const auto bytes = serialize();
        w.bytes(bytes);
        w.to_file(path);
    }

    std::uint64_t byte_size() const { return serialize().size(); }

    static AnyIndex load(const std::string& path) {
        auto r = BinaryReader::from_file(path);
        const auto magic = r.bytes(4);
        AnyIndex ix;
        if (std::memcmp(magic.data(), kMagicFlat, 4) == 0) ix.kind_ = IndexKind::flat;
        else if (std::memcmp(magic.data(), kMagicLsh, 4) == 0) ix.kind_ = IndexKind::lsh;
        else if (std::memcmp(magic.data(), kMagicIvf, 4) == 0) ix.kind_ = IndexKind::ivf;
        else if (std::memcmp(magic.data(), kMagicPq, 4) == 0) ix.kind_ = IndexKind::pq;
        else if (std::memcmp(magic.data(), kMagicIvfPq, 4) == 0) ix.kind_ = IndexKind::ivfpq;
        else if (std::memcmp(magic.data(), kMagicHnsw, 4) == 0) ix.kind_ = IndexKind::hnsw;
        else throw DataError(path + ": unknown index magic '" +
                             std::string(magic.data(), 4) + "'");

        ix.metric_ = static_cast<Metric>(r.u8());
        const double big_m = r.f64();
        switch (ix.kind_) {
            case IndexKind::flat:
                ix.impl_ = FlatIndex::load_payload(r, ix.metric_);
                break;
            case IndexKind::lsh: ix.impl_ = LshIndex::load_payload(r); break;
            case IndexKind::ivf: ix.impl_ = IvfIndex::load_payload(r); break;
            case IndexKind::pq: ix.impl_ = PqIndex::load_payload(r); break;
            case IndexKind::ivfpq: ix.impl_ = IvfPqIndex::load_payload(r); break;
            case IndexKind::hnsw: ix.impl_ = HnswIndex::load_payload(r); break;
        }
        if (ix.metric_ == Metric::inner_product && ix.kind_ != IndexKind::flat) {
            const std::size_t stored_dim =
                std::visit([](const auto& i) { return i.dim(); }, *ix.impl_);
            ix.mip_ = MipTransform(big_m, stored_dim - 1);
        }
        return ix;
    }

  private:
    AnyIndex() = default;

    AnyIndex(IndexKind kind, Metric metric, std::optional<MipTransform> mip, Impl impl)
        : kind_(kind), metric_(metric), mip_(std::move(mip)), impl_(std::move(impl)) {}

    IndexKind kind_ = IndexKind::flat;
    Metric metric_ = Metric::euclidean;
    std::optional<MipTransform> mip_;
    std::optional<Impl> impl_;
};

/// A full benchmark run: data, index choice, query-time knobs, output paths.
/// Paths left empty fall back to the synthetic generator, which keeps runs
/// self-contained and reproducible from the seed alone.
struct RunConfig {
    IndexParams index;
    std::string docs_path;
    std::string queries_path;
    SyntheticSpec synth;        // used when docs_path is empty
    std::size_t query_count = 50;
    std::size_t probes = 1;
    std::size_t candidate_depth = 1000;  // first-stage depth per query
    std::vector<std::size_t> recall_ks = {1, 10};
    std::size_t oracle_cap = 100000;  // above this, skip the flat oracle
    std::uint64_t seed = 0;
    std::string report_path;
    std::string index_path;  // load instead of build when set

    void validate() const {
        if (query_count < 1) throw ConfigError("config: query_count must be >= 1");
        if (recall_ks.empty()) throw ConfigError("config: recall_ks must be non-empty");
        for (std::size_t k : recall_ks) {
            if (k < 1) throw ConfigError("config: recall_ks entries must be >= 1");
            if (k > candidate_depth)
                throw ConfigError("config: recall k " + std::to_string(k) +
                                  " exceeds candidate_depth " +
                                  std::to_string(candidate_depth));
        }
        if (candidate_depth < 1) throw ConfigError("config: candidate_depth must be >= 1");
        if (probes < 1) throw ConfigError("config: probes must be >= 1");
    }
};

namespace detail {

inline double percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(p * static_cast<double>(values.size() - 1));
    return values[idx];
}

}  // namespace detail

/// Builds (or loads) the configured index, runs the configured queries
/// against it, and grades the results against an exhaustive oracle built
/// from the same data. Everything except wall-clock timings is deterministic
/// under the seed.
inline EvalReport run_pipeline(const RunConfig& cfg) {
    cfg.validate();

    EmbeddingSet docs = [&] {
        if (!cfg.docs_path.empty()) return load_embeddings(cfg.docs_path);
        SyntheticSpec spec = cfg.synth;
        spec.seed = derive_seed(cfg.seed, 0x646f6373ULL);  // "docs" stream
        return gen_synthetic(spec).docs;
    }();
    EmbeddingSet queries = [&] {
        if (!cfg.queries_path.empty()) return load_embeddings(cfg.queries_path);
        SyntheticSpec spec = cfg.synth;
        spec.n = std::max(cfg.query_count, cfg.synth.clusters);
        spec.seed = derive_seed(cfg.seed, 0x71726965ULL);  // "qries" stream
        return gen_synthetic(spec).docs;
    }();
    if (queries.dim() != docs.dim())
        throw DataError("config: query dim " + std::to_string(queries.dim()) +
                        " != doc dim " + std::to_string(docs.dim()));
    for (std::size_t k : cfg.recall_ks) {
        if (k > docs.size())
            throw ConfigError("config: recall k " + std::to_string(k) + " exceeds corpus size " +
                              std::to_string(docs.size()));
    }
    const std::size_t query_count = std::min(cfg.query_count, queries.size());

    using clock = std::chrono::steady_clock;
    const auto build_start = clock::now();
    AnyIndex index = [&] {
        if (!cfg.index_path.empty()) return AnyIndex::load(cfg.index_path);
        IndexParams params = cfg.index;
        params.seed = cfg.seed;
        params.lsh.seed = cfg.seed;
        params.hnsw.seed = cfg.seed;
        return AnyIndex::build(params, docs);
    }();
    const double build_ms =
        std::chrono::duration<double, std::milli>(clock::now() - build_start).count();

    std::optional<FlatIndex> oracle;
    if (docs.size() <= cfg.oracle_cap) oracle.emplace(docs, cfg.index.metric);

    const std::size_t depth = std::min(cfg.candidate_depth, docs.size());
    std::size_t max_k = 0;
    for (std::size_t k : cfg.recall_ks) max_k = std::max(max_k, k);

    EvalReport report;
    report.index_kind = to_string(index.kind());
    report.doc_count = docs.size();
    report.query_count = query_count;
    report.index_size_bytes = index.byte_size();
    report.seed = cfg.seed;
    report.build_time_ms = build_ms;

    std::vector<double> latencies;
    latencies.reserve(query_count);
    std::map<std::size_t, double> recall_sums;
    for (std::size_t k : cfg.recall_ks) recall_sums[k] = 0.0;
    std::size_t candidate_total = 0;

    const std::size_t probes = std::min(cfg.probes, index.probe_limit());
    for (std::size_t q = 0; q < query_count; ++q) {
        const auto t0 = clock::now();
        const auto result = index.search_with_stats(queries.vec(q), depth, probes);
        latencies.push_back(
            std::chrono::duration<double, std::micro>(clock::now() - t0).count());
        candidate_total += result.candidates;
        report.max_candidates = std::max(report.max_candidates, result.candidates);
        if (oracle) {
            const auto truth = oracle->search(queries.vec(q), max_k);
            for (std::size_t k : cfg.recall_ks)
                recall_sums[k] += recall_at_k(result.hits, truth, k);
        }
    }
    for (std::size_t k : cfg.recall_ks)
        report.recall[k] = oracle ? recall_sums[k] / static_cast<double>(query_count) : -1.0;
    report.mean_candidates =
        static_cast<double>(candidate_total) / static_cast<double>(query_count);
    double total_latency = 0.0;
    for (double l : latencies) total_latency += l;
    report.mean_latency_us = total_latency / static_cast<double>(latencies.size());
    report.median_latency_us = detail::percentile(latencies, 0.5);
    report.p99_latency_us = detail::percentile(latencies, 0.99);

    if (!cfg.report_path.empty()) {
        std::ofstream out(cfg.report_path, std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + cfg.report_path);
        out << report.to_json().dump(2) << '\n';
    }
    return report;
}

}  // namespace vx
