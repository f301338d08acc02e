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
#include <utility>
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"
#include "vx/flat.hpp"
#include "vx/io.hpp"
#include "vx/rng.hpp"

namespace vx {

/// k centroids of a vector quantiser, all with the same dimension.
class Codebook {
  public:
    Codebook(std::vector<double> centroids, std::size_t dim)
        : centroids_(std::move(centroids)), dim_(dim) {
        if (dim_ == 0) throw DimensionError("Codebook: dimension must be positive");
        if (centroids_.empty() || centroids_.size() % dim_ != 0)
            throw DimensionError("Codebook: centroid data does not match dim");
        detail::require_finite(centroids_, "Codebook");
    }

    std::size_t k() const { return centroids_.size() / dim_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> centroid(std::size_t i) const {
        return {centroids_.data() + i * dim_, dim_};
    }

    void save_payload(BinaryWriter& w) const {
        w.u32(static_cast<std::uint32_t>(k()));
        w.u32(static_cast<std::uint32_t>(dim_));
        for (double v : centroids_) w.f32(static_cast<float>(v));
    }

    static Codebook load_payload(BinaryReader& r) {
        const std::uint32_t k = r.u32();
        const std::uint32_t dim = r.u32();
        std::vector<double> data(static_cast<std::size_t>(k) * dim);
        for (auto& v : data) v = static_cast<double>(r.f32());
        return Codebook(std::move(data), dim);
    }

  private:
    std::vector<double> centroids_;
    std::size_t dim_;
};

/// Nearest centroid under Euclidean distance; ties go to the lowest index.
inline std::pair<std::size_t, std::span<const double>> quantise(const Codebook& cb,
                                                                std::span<const double> x) {
    if (x.size() != cb.dim()) throw DimensionError("quantise: dimension mismatch");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cb.k(); ++i) {
        const double d = euclidean_sq(x, cb.centroid(i));
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return {best, cb.centroid(best)};
}

struct KmeansResult {
    Codebook codebook;
    std::vector<std::uint32_t> assignment;   // point -> centroid index
    std::vector<double> objective_trace;     // sum of squared distances, one per iteration
};

namespace detail {

// Rows-of-a-matrix view used so kmeans can run over sub-vectors without
// copying them into an EmbeddingSet.
struct RowView {
    const double* data;
    std::size_t n;
    std::size_t dim;
    std::size_t stride;  // doubles between consecutive rows

    std::span<const double> row(std::size_t i) const { return {data + i * stride, dim}; }
};

inline KmeansResult kmeans_rows(const RowView& rows, std::size_t k, std::size_t iters,
                                std::uint64_t seed) {
    const std::size_t n = rows.n;
    const std::size_t dim = rows.dim;
    if (k < 1) throw CardinalityError("kmeans: k must be >= 1");
    if (k > n) throw CardinalityError("kmeans: k exceeds the number of points");
    if (iters < 1) throw ConfigError("kmeans: iters must be >= 1");

    CounterRng rng(seed, {0x6b6d65616e73ULL});  // "kmeans" stream

    // k-means++ seeding: first centroid uniform, the rest distance-weighted.
    std::vector<double> centroids;
    centroids.reserve(k * dim);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> chosen;
    {
        const std::size_t first = static_cast<std::size_t>(rng.next_below(n));
        const auto r0 = rows.row(first);
        centroids.insert(centroids.end(), r0.begin(), r0.end());
        chosen.push_back(first);
    }
    while (chosen.size() < k) {
        const std::span<const double> last{centroids.data() + (chosen.size() - 1) * dim, dim};
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            min_d[i] = std::min(min_d[i], euclidean_sq(rows.row(i), last));
            total += min_d[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.next_double() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (min_d[i] == 0.0) continue;  // already-covered points stay out
                acc += min_d[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) {
            // Remaining mass is zero (duplicates); take the first point not
            // yet chosen so that k == n still yields k distinct centroids.
            std::vector<char> is_chosen(n, 0);
            for (std::size_t c : chosen) is_chosen[c] = 1;
            pick = 0;
            while (pick < n && is_chosen[pick]) ++pick;
            if (pick == n) pick = chosen.back();
        }
        const auto rp = rows.row(pick);
        centroids.insert(centroids.end(), rp.begin(), rp.end());
        chosen.push_back(pick);
    }

    // Lloyd iterations. Each iteration assigns, recomputes means, patches
    // empty clusters from the farthest member of the largest one, and logs
    // the post-assignment objective.
    std::vector<std::uint32_t> assignment(n, 0);
    std::vector<double> trace;
    trace.reserve(iters);
    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);
    for (std::size_t it = 0; it < iters; ++it) {
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d =
                    euclidean_sq(rows.row(i), {centroids.data() + c * dim, dim});
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assignment[i] = static_cast<std::uint32_t>(best);
            objective += best_d;
        }
        trace.push_back(objective);

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = rows.row(i);
            double* s = sums.data() + assignment[i] * dim;
            for (std::size_t d = 0; d < dim; ++d) s[d] += r[d];
            ++counts[assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d)
                centroids[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            const std::size_t largest = static_cast<std::size_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            std::size_t far_i = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (assignment[i] != largest) continue;
                const double d =
                    euclidean_sq(rows.row(i), {centroids.data() + largest * dim, dim});
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            const auto r = rows.row(far_i);
            std::copy(r.begin(), r.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
            assignment[far_i] = static_cast<std::uint32_t>(c);
            counts[c] = 1;
            --counts[largest];
        }
    }
    // Final assignment consistent with the returned centroids.
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double d = euclidean_sq(rows.row(i), {centroids.data() + c * dim, dim});
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        assignment[i] = static_cast<std::uint32_t>(best);
    }
    return {Codebook(std::move(centroids), dim), std::move(assignment), std::move(trace)};
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding, deterministic under the seed.
inline KmeansResult kmeans_fit(const EmbeddingSet& data, std::size_t k, std::size_t iters,
                               std::uint64_t seed) {
    return detail::kmeans_rows({data.data().data(), data.size(), data.dim(), data.dim()}, k,
                               iters, seed);
}

inline Codebook kmeans(const EmbeddingSet& data, std::size_t k, std::size_t iters,
                       std::uint64_t seed) {
    return kmeans_fit(data, k, iters, seed).codebook;
}

// ---------------------------------------------------------------------------
// IVF: the codebook partitions the collection into k inverted lists; a query
// probes the p lists with the nearest centroids and searches them exactly.
// ---------------------------------------------------------------------------

class IvfIndex {
  public:
    struct Entry {
        doc_id_t id;
        std::vector<double> vec;
    };

    IvfIndex(const EmbeddingSet& docs, std::size_t k, std::size_t iters, std::uint64_t seed)
        : codebook_(Codebook(std::vector<double>(1, 0.0), 1)),
          dim_(docs.dim()),
          k_(k),
          iters_(iters),
          seed_(seed),
          size_(docs.size()) {
        auto fit = kmeans_fit(docs, k, iters, seed);
        codebook_ = std::move(fit.codebook);
        lists_.assign(k, {});
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const auto v = docs.vec(i);
            lists_[fit.assignment[i]].push_back({docs.id(i), {v.begin(), v.end()}});
        }
    }

    std::size_t size() const { return size_; }
    std::size_t dim() const { return dim_; }
    std::size_t list_count() const { return lists_.size(); }
    const Codebook& codebook() const { return codebook_; }
    const std::vector<Entry>& list(std::size_t i) const { return lists_[i]; }

    std::vector<ScoredHit> search(std::span<const double> query, std::size_t probes,
                                  std::size_t k) const {
        return search_with_stats(query, probes, k).hits;
    }

    SearchResult search_with_stats(std::span<const double> query, std::size_t probes,
                                   std::size_t k) const {
        if (query.size() != dim_) throw DimensionError("search_ivf: dimension mismatch");
        if (probes < 1 || probes > lists_.size())
            throw ProbeError("search_ivf: probe count " + std::to_string(probes) +
                             " outside [1, " + std::to_string(lists_.size()) + "]");
        const auto order = probe_order(query);
        TopK top(k);
        std::size_t candidates = 0;
        for (std::size_t p = 0; p < probes; ++p) {
            for (const auto& e : lists_[order[p]]) {
                top.push(e.id, -euclidean_sq(query, e.vec));
                ++candidates;
            }
        }
        return {top.take(), candidates};
    }

    /// Centroid indices sorted by distance to the query (ties by index).
    std::vector<std::size_t> probe_order(std::span<const double> query) const {
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve(codebook_.k());
        for (std::size_t i = 0; i < codebook_.k(); ++i)
            d.push_back({euclidean_sq(query, codebook_.centroid(i)), i});
        std::sort(d.begin(), d.end());
        std::vector<std::size_t> order;
        order.reserve(d.size());
        for (const auto& [dist, i] : d) order.push_back(i);
        return order;
    }

    void save_payload(BinaryWriter& w) const {
        w.u32(static_cast<std::uint32_t>(k_));
        w.u32(0);  // sub-vector count, unused for IVF
        w.u32(static_cast<std::uint32_t>(iters_));
        w.u64(seed_);
        codebook_.save_payload(w);
        for (const auto& list : lists_) {
            w.u32(static_cast<std::uint32_t>(list.size()));
            for (const auto& e : list) {
                w.u64(e.id);
                for (double v : e.vec) w.f32(static_cast<float>(v));
            }
        }
    }

    static IvfIndex load_payload(BinaryReader& r) {
        IvfIndex ix;
        ix.k_ = r.u32();
        r.u32();
        ix.iters_ = r.u32();
        ix.seed_ = r.u64();
        ix.codebook_ = Codebook::load_payload(r);
        ix.dim_ = ix.codebook_.dim();
        ix.lists_.assign(ix.k_, {});
        ix.size_ = 0;
        for (auto& list : ix.lists_) {
            const std::uint32_t len = r.u32();
            list.reserve(len);
            for (std::uint32_t i = 0; i < len; ++i) {
                Entry e;
                e.id = r.u64();
                e.vec.resize(ix.dim_);
                for (auto& v : e.vec) v = static_cast<double>(r.f32());
                list.push_back(std::move(e));
            }
            ix.size_ += len;
        }
        return ix;
    }

  private:
    IvfIndex() : codebook_(std::vector<double>(1, 0.0), 1) {}

    Codebook codebook_;
    std::vector<std::vector<Entry>> lists_;
    std::size_t dim_ = 0;
    std::size_t k_ = 0;
    std::size_t iters_ = 0;
    std::uint64_t seed_ = 0;
    std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// Product quantisation: m independent sub-quantisers over dim/m slices; a
// code is the m sub-centroid indices and costs m*ceil(log2 k) bits packed.
// ---------------------------------------------------------------------------

using PqCode = std::vector<std::uint32_t>;

class PqCodec {
  public:
    PqCodec(std::vector<Codebook> sub_codebooks, std::size_t dim)
        : sub_codebooks_(std::move(sub_codebooks)), dim_(dim) {
        if (sub_codebooks_.empty()) throw SubspaceError("PqCodec: no sub-codebooks");
        sub_dim_ = sub_codebooks_.front().dim();
        if (sub_dim_ * sub_codebooks_.size() != dim_)
            throw SubspaceError("PqCodec: sub-codebooks do not tile the dimension");
        k_ = sub_codebooks_.front().k();
        for (const auto& cb : sub_codebooks_) {
            if (cb.dim() != sub_dim_ || cb.k() != k_)
                throw SubspaceError("PqCodec: inconsistent sub-codebooks");
        }
    }

    static PqCodec train(const EmbeddingSet& data, std::size_t m, std::size_t k,
                         std::size_t iters, std::uint64_t seed) {
        return train_rows({data.data().data(), data.size(), data.dim(), data.dim()}, m, k, iters,
                          seed);
    }

    static PqCodec train_rows(const detail::RowView& rows, std::size_t m, std::size_t k,
                              std::size_t iters, std::uint64_t seed) {
        if (m < 1) throw SubspaceError("pq_train: m must be >= 1");
        if (rows.dim % m != 0)
            throw SubspaceError("pq_train: m=" + std::to_string(m) + " does not divide dim=" +
                                std::to_string(rows.dim));
        const std::size_t sub_dim = rows.dim / m;
        std::vector<Codebook> books;
        books.reserve(m);
        for (std::size_t j = 0; j < m; ++j) {
            detail::RowView sub{rows.data + j * sub_dim, rows.n, sub_dim, rows.stride};
            books.push_back(
                detail::kmeans_rows(sub, k, iters, derive_seed(seed, j)).codebook);
        }
        return PqCodec(std::move(books), rows.dim);
    }

    std::size_t m() const { return sub_codebooks_.size(); }
    std::size_t k() const { return k_; }
    std::size_t dim() const { return dim_; }
    std::size_t sub_dim() const { return sub_dim_; }
    const Codebook& sub_codebook(std::size_t j) const { return sub_codebooks_[j]; }

    std::size_t code_bits() const {
        std::size_t bits = 0;
        while ((1ULL << bits) < k_) ++bits;
        return bits == 0 ? 1 : bits;  // k == 1 still needs one bit slot
    }

    PqCode encode(std::span<const double> x) const {
        if (x.size() != dim_) throw DimensionError("pq_encode: dimension mismatch");
        PqCode code(m());
        for (std::size_t j = 0; j < m(); ++j) {
            const auto [idx, c] = quantise(sub_codebooks_[j], x.subspan(j * sub_dim_, sub_dim_));
            code[j] = static_cast<std::uint32_t>(idx);
        }
        return code;
    }

    DenseVector decode(const PqCode& code) const {
        if (code.size() != m()) throw CodeError("pq_decode: wrong code length");
        std::vector<double> out;
        out.reserve(dim_);
        for (std::size_t j = 0; j < m(); ++j) {
            if (code[j] >= k_) throw CodeError("pq_decode: sub-index out of range");
            const auto c = sub_codebooks_[j].centroid(code[j]);
            out.insert(out.end(), c.begin(), c.end());
        }
        return DenseVector(std::move(out));
    }

    /// Asymmetric distance tables: table j holds the squared distances from
    /// the j-th query slice to every centroid of sub-codebook j.
    std::vector<std::vector<double>> adc_tables(std::span<const double> query) const {
        if (query.size() != dim_) throw DimensionError("adc_tables: dimension mismatch");
        std::vector<std::vector<double>> tables(m(), std::vector<double>(k_));
        for (std::size_t j = 0; j < m(); ++j) {
            const auto q_sub = query.subspan(j * sub_dim_, sub_dim_);
            for (std::size_t c = 0; c < k_; ++c)
                tables[j][c] = euclidean_sq(q_sub, sub_codebooks_[j].centroid(c));
        }
        return tables;
    }

    void save_payload(BinaryWriter& w) const {
        w.u32(static_cast<std::uint32_t>(m()));
        w.u32(static_cast<std::uint32_t>(dim_));
        for (const auto& cb : sub_codebooks_) cb.save_payload(w);
    }

    static PqCodec load_payload(BinaryReader& r) {
        const std::uint32_t m = r.u32();
        const std::uint32_t dim = r.u32();
        std::vector<Codebook> books;
        books.reserve(m);
        for (std::uint32_t j = 0; j < m; ++j) books.push_back(Codebook::load_payload(r));
        return PqCodec(std::move(books), dim);
    }

  private:
    std::vector<Codebook> sub_codebooks_;
    std::size_t dim_;
    std::size_t sub_dim_ = 0;
    std::size_t k_ = 0;
};

inline double adc_distance(const std::vector<std::vector<double>>& tables, const PqCode& code) {
    if (code.size() != tables.size()) throw CodeError("adc_distance: wrong code length");
    double acc = 0.0;
    for (std::size_t j = 0; j < code.size(); ++j) {
        if (code[j] >= tables[j].size()) throw CodeError("adc_distance: sub-index out of range");
        acc += tables[j][code[j]];
    }
    return acc;
}

namespace detail {

// Continuous bitstream of fixed-width sub-indices, byte-padded at the end.
inline std::vector<char> pack_codes(const std::vector<PqCode>& codes, std::size_t bits) {
    std::vector<char> out;
    std::uint64_t acc = 0;
    std::size_t filled = 0;
    for (const auto& code : codes) {
        for (std::uint32_t v : code) {
            acc |= static_cast<std::uint64_t>(v) << filled;
            filled += bits;
            while (filled >= 8) {
                out.push_back(static_cast<char>(acc & 0xff));
                acc >>= 8;
                filled -= 8;
            }
        }
    }
    if (filled > 0) out.push_back(static_cast<char>(acc & 0xff));
    return out;
}

inline std::vector<PqCode> unpack_codes(const std::vector<char>& bytes, std::size_t n,
                                        std::size_t m, std::size_t bits) {
    std::vector<PqCode> codes(n, PqCode(m));
    std::uint64_t acc = 0;
    std::size_t filled = 0;
    std::size_t pos = 0;
    const std::uint64_t mask = bits == 64 ? ~0ULL : ((1ULL << bits) - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            while (filled < bits) {
                if (pos >= bytes.size()) throw DataError("pq codes: truncated bitstream");
                acc |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos++]))
                       << filled;
                filled += 8;
            }
            codes[i][j] = static_cast<std::uint32_t>(acc & mask);
            acc >>= bits;
            filled -= bits;
        }
    }
    return codes;
}

}  // namespace detail

/// Exhaustive ADC search over PQ codes: every document is scanned, but each
/// distance costs only m table lookups.
class PqIndex {
  public:
    PqIndex(const EmbeddingSet& docs, std::size_t m, std::size_t k, std::size_t iters,
            std::uint64_t seed)
        : codec_(PqCodec::train(docs, m, k, iters, seed)), iters_(iters), seed_(seed) {
        ids_ = docs.ids();
        codes_.reserve(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) codes_.push_back(codec_.encode(docs.vec(i)));
    }

    PqIndex(PqCodec codec, std::vector<doc_id_t> ids, std::vector<PqCode> codes)
        : codec_(std::move(codec)), ids_(std::move(ids)), codes_(std::move(codes)) {}

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return codec_.dim(); }
    const PqCodec& codec() const { return codec_; }
    const std::vector<PqCode>& codes() const { return codes_; }
    const std::vector<doc_id_t>& ids() const { return ids_; }

    std::vector<ScoredHit> search(std::span<const double> query, std::size_t k) const {
        return search_with_stats(query, k).hits;
    }

    SearchResult search_with_stats(std::span<const double> query, std::size_t k) const {
        const auto tables = codec_.adc_tables(query);
        TopK top(k);
        for (std::size_t i = 0; i < codes_.size(); ++i)
            top.push(ids_[i], -adc_distance(tables, codes_[i]));
        return {top.take(), codes_.size()};
    }

    /// Exact packed size of the code section in bytes.
    std::uint64_t code_bytes() const {
        const std::uint64_t total_bits =
            static_cast<std::uint64_t>(size()) * codec_.m() * codec_.code_bits();
        return (total_bits + 7) / 8;
    }

    void save_payload(BinaryWriter& w) const {
        w.u32(static_cast<std::uint32_t>(codec_.k()));
        w.u32(static_cast<std::uint32_t>(codec_.m()));
        w.u32(static_cast<std::uint32_t>(iters_));
        w.u64(seed_);
        codec_.save_payload(w);
        w.u32(static_cast<std::uint32_t>(ids_.size()));
        for (doc_id_t id : ids_) w.u64(id);
        const auto packed = detail::pack_codes(codes_, codec_.code_bits());
        w.u64(packed.size());
        w.bytes(packed);
    }

    static PqIndex load_payload(BinaryReader& r) {
        r.u32();
        r.u32();
        const std::uint32_t iters = r.u32();
        const std::uint64_t seed = r.u64();
        PqCodec codec = PqCodec::load_payload(r);
        const std::uint32_t n = r.u32();
        std::vector<doc_id_t> ids(n);
        for (auto& id : ids) id = r.u64();
        const std::uint64_t packed_len = r.u64();
        const auto packed = r.bytes(packed_len);
        auto codes = detail::unpack_codes(packed, n, codec.m(), codec.code_bits());
        PqIndex ix(std::move(codec), std::move(ids), std::move(codes));
        ix.iters_ = iters;
        ix.seed_ = seed;
        return ix;
    }

  private:
    PqCodec codec_;
    std::vector<doc_id_t> ids_;
    std::vector<PqCode> codes_;
    std::size_t iters_ = 0;
    std::uint64_t seed_ = 0;
};

/// IVFPQ: a coarse quantiser splits the collection into inverted lists and a
/// single shared PQ codec encodes the residuals (vector minus list
/// centroid). Probed lists are scanned with ADC against the query residual
/// recomputed per list.
class IvfPqIndex {
  public:
    IvfPqIndex(const EmbeddingSet& docs, std::size_t k_coarse, std::size_t m, std::size_t k_pq,
               std::size_t iters, std::uint64_t seed)
        : coarse_(Codebook(std::vector<double>(1, 0.0), 1)),
          codec_(PqCodec(std::vector<Codebook>{Codebook(std::vector<double>(1, 0.0), 1)}, 1)),
          dim_(docs.dim()),
          iters_(iters),
          seed_(seed) {
        auto fit = kmeans_fit(docs, k_coarse, iters, seed);
        coarse_ = std::move(fit.codebook);

        // Residuals pooled across lists train one shared codec.
        std::vector<double> residuals(docs.size() * dim_);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const auto v = docs.vec(i);
            const auto c = coarse_.centroid(fit.assignment[i]);
            for (std::size_t d = 0; d < dim_; ++d) residuals[i * dim_ + d] = v[d] - c[d];
        }
        codec_ = PqCodec::train_rows({residuals.data(), docs.size(), dim_, dim_}, m, k_pq, iters,
                                     derive_seed(seed, 0x7071ULL));

        lists_.assign(k_coarse, {});
        codes_.assign(k_coarse, {});
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const std::size_t list = fit.assignment[i];
            lists_[list].push_back(docs.id(i));
            codes_[list].push_back(
                codec_.encode({residuals.data() + i * dim_, dim_}));
        }
    }

    std::size_t size() const {
        std::size_t total = 0;
        for (const auto& l : lists_) total += l.size();
        return total;
    }
    std::size_t dim() const { return dim_; }
    std::size_t list_count() const { return lists_.size(); }
    const Codebook& coarse() const { return coarse_; }
    const PqCodec& codec() const { return codec_; }
    const std::vector<doc_id_t>& list_ids(std::size_t i) const { return lists_[i]; }
    const std::vector<PqCode>& list_codes(std::size_t i) const { return codes_[i]; }

    std::vector<ScoredHit> search(std::span<const double> query, std::size_t probes,
                                  std::size_t k) const {
        return search_with_stats(query, probes, k).hits;
    }

    SearchResult search_with_stats(std::span<const double> query, std::size_t probes,
                                   std::size_t k) const {
        if (query.size() != dim_) throw DimensionError("search_ivfpq: dimension mismatch");
        if (probes < 1 || probes > lists_.size())
            throw ProbeError("search_ivfpq: probe count " + std::to_string(probes) +
                             " outside [1, " + std::to_string(lists_.size()) + "]");
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(coarse_.k());
        for (std::size_t i = 0; i < coarse_.k(); ++i)
            order.push_back({euclidean_sq(query, coarse_.centroid(i)), i});
        std::sort(order.begin(), order.end());

        TopK top(k);
        std::size_t candidates = 0;
        std::vector<double> residual(dim_);
        for (std::size_t p = 0; p < probes; ++p) {
            const std::size_t list = order[p].second;
            if (lists_[list].empty()) continue;
            const auto c = coarse_.centroid(list);
            for (std::size_t d = 0; d < dim_; ++d) residual[d] = query[d] - c[d];
            const auto tables = codec_.adc_tables(residual);
            for (std::size_t i = 0; i < lists_[list].size(); ++i) {
                top.push(lists_[list][i], -adc_distance(tables, codes_[list][i]));
                ++candidates;
            }
        }
        return {top.take(), candidates};
    }

    void save_payload(BinaryWriter& w) const {
        w.u32(static_cast<std::uint32_t>(coarse_.k()));
        w.u32(static_cast<std::uint32_t>(codec_.m()));
        w.u32(static_cast<std::uint32_t>(iters_));
        w.u64(seed_);
        w.u32(static_cast<std::uint32_t>(codec_.k()));
        coarse_.save_payload(w);
        codec_.save_payload(w);
        for (std::size_t l = 0; l < lists_.size(); ++l) {
            w.u32(static_cast<std::uint32_t>(lists_[l].size()));
            for (doc_id_t id : lists_[l]) w.u64(id);
            const auto packed = detail::pack_codes(codes_[l], codec_.code_bits());
            w.u64(packed.size());
            w.bytes(packed);
        }
    }

    static IvfPqIndex load_payload(BinaryReader& r) {
        IvfPqIndex ix;
        const std::uint32_t k_coarse = r.u32();
        r.u32();
        ix.iters_ = r.u32();
        ix.seed_ = r.u64();
        r.u32();
        ix.coarse_ = Codebook::load_payload(r);
        ix.codec_ = PqCodec::load_payload(r);
        ix.dim_ = ix.coarse_.dim();
        ix.lists_.assign(k_coarse, {});
        ix.codes_.assign(k_coarse, {});
        for (std::size_t l = 0; l < k_coarse; ++l) {
            const std::uint32_t len = r.u32();
            ix.lists_[l].resize(len);
            for (auto& id : ix.lists_[l]) id = r.u64();
            const std::uint64_t packed_len = r.u64();
            const auto packed = r.bytes(packed_len);
            ix.codes_[l] =
                detail::unpack_codes(packed, len, ix.codec_.m(), ix.codec_.code_bits());
        }
        return ix;
    }

  private:
    IvfPqIndex()
        : coarse_(Codebook(std::vector<double>(1, 0.0), 1)),
          codec_(PqCodec(std::vector<Codebook>{Codebook(std::vector<double>(1, 0.0), 1)}, 1)) {}

    Codebook coarse_;
    PqCodec codec_;
    std::vector<std::vector<doc_id_t>> lists_;
    std::vector<std::vector<PqCode>> codes_;
    std::size_t dim_ = 0;
    std::size_t iters_ = 0;
    std::uint64_t seed_ = 0;
};

}  // namespace vx
