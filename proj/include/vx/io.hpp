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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vx/core.hpp"
#include "vx/errors.hpp"

// All on-disk formats are little-endian and versioned by a 4-byte magic;
// readers reject anything they do not recognise.

namespace vx {

inline constexpr char kMagicDense[5] = "VXE1";
inline constexpr char kMagicMulti[5] = "VXM1";
inline constexpr char kMagicFlat[5] = "VXF1";
inline constexpr char kMagicLsh[5] = "VXL1";
inline constexpr char kMagicIvf[5] = "VXI1";
inline constexpr char kMagicPq[5] = "VXP1";
inline constexpr char kMagicIvfPq[5] = "VXQ1";
inline constexpr char kMagicHnsw[5] = "VXH1";
inline constexpr char kMagicSparse[5] = "VXS1";
inline constexpr char kMagicMatrix[5] = "VXW1";

class BinaryWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }

    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }

    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }

    /// LEB128-style unsigned varint.
    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            buf_.push_back(static_cast<char>((v & 0x7f) | 0x80));
            v >>= 7;
        }
        buf_.push_back(static_cast<char>(v));
    }

    void magic(const char m[5]) { buf_.insert(buf_.end(), m, m + 4); }

    void bytes(const std::vector<char>& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    const std::vector<char>& buffer() const { return buf_; }

    void to_file(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + path);
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw DataError("write failed: " + path);
    }

  private:
    std::vector<char> buf_;
};

class BinaryReader {
  public:
    explicit BinaryReader(std::vector<char> data) : data_(std::move(data)) {}

    static BinaryReader from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary | std::ios::ate);
        if (!in) throw DataError("cannot open for reading: " + path);
        const auto size = in.tellg();
        in.seekg(0);
        std::vector<char> data(static_cast<std::size_t>(size));
        in.read(data.data(), size);
        if (!in) throw DataError("read failed: " + path);
        return BinaryReader(std::move(data));
    }

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
        return v;
    }

    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    std::uint64_t varint() {
        std::uint64_t v = 0;
        int shift = 0;
        while (true) {
            need(1);
            const auto byte = static_cast<unsigned char>(data_[pos_++]);
            v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
            if ((byte & 0x80) == 0) break;
            shift += 7;
            if (shift >= 64) throw DataError("varint overflow");
        }
        return v;
    }

    void expect_magic(const char m[5]) {
        need(4);
        if (std::memcmp(data_.data() + pos_, m, 4) != 0) {
            std::string found(data_.data() + pos_, 4);
            throw DataError("unknown magic '" + found + "', expected '" + std::string(m, 4) + "'");
        }
        pos_ += 4;
    }

    std::vector<char> bytes(std::size_t n) {
        need(n);
        std::vector<char> out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

    bool exhausted() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

  private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw DataError("truncated input");
    }

    std::vector<char> data_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Dense embedding file: magic, u32 n, u32 dim, n x [u64 id, dim x f32].
// ---------------------------------------------------------------------------

inline void write_embeddings(BinaryWriter& w, const EmbeddingSet& set) {
    w.magic(kMagicDense);
    w.u32(static_cast<std::uint32_t>(set.size()));
    w.u32(static_cast<std::uint32_t>(set.dim()));
    for (std::size_t i = 0; i < set.size(); ++i) {
        w.u64(set.id(i));
        for (double v : set.vec(i)) w.f32(static_cast<float>(v));
    }
}

inline void save_embeddings(const EmbeddingSet& set, const std::string& path) {
    BinaryWriter w;
    write_embeddings(w, set);
    w.to_file(path);
}

inline EmbeddingSet read_embeddings(BinaryReader& r) {
    r.expect_magic(kMagicDense);
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

inline EmbeddingSet load_embeddings(const std::string& path) {
    auto r = BinaryReader::from_file(path);
    return read_embeddings(r);
}

// ---------------------------------------------------------------------------
// Multi-embedding file: magic, u32 count, u32 dim, then per record
// [u64 id, u32 t, u8 has_token_ids, t x u32 token ids?, t*dim x f32].
// ---------------------------------------------------------------------------

inline void save_multi(const std::vector<MultiEmbedding>& docs, const std::string& path) {
    if (docs.empty()) throw IngestError("multi-embedding file: no records");
    BinaryWriter w;
    w.magic(kMagicMulti);
    w.u32(static_cast<std::uint32_t>(docs.size()));
    w.u32(static_cast<std::uint32_t>(docs.front().dim()));
    for (const auto& d : docs) {
        if (d.dim() != docs.front().dim())
            throw DimensionError("multi-embedding file: mixed dimensions");
        w.u64(d.id());
        w.u32(static_cast<std::uint32_t>(d.rows()));
        w.u8(d.has_token_ids() ? 1 : 0);
        if (d.has_token_ids())
            for (term_id_t t : d.token_ids()) w.u32(t);
        for (std::size_t i = 0; i < d.rows(); ++i)
            for (double v : d.row(i).values()) w.f32(static_cast<float>(v));
    }
    w.to_file(path);
}

inline std::vector<MultiEmbedding> load_multi(const std::string& path) {
    auto r = BinaryReader::from_file(path);
    r.expect_magic(kMagicMulti);
    const std::uint32_t n = r.u32();
    const std::uint32_t dim = r.u32();
    std::vector<MultiEmbedding> docs;
    docs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const doc_id_t id = r.u64();
        const std::uint32_t rows = r.u32();
        const bool has_tokens = r.u8() != 0;
        std::optional<std::vector<term_id_t>> token_ids;
        if (has_tokens) {
            std::vector<term_id_t> t(rows);
            for (auto& v : t) v = r.u32();
            token_ids = std::move(t);
        }
        std::vector<DenseVector> vecs;
        vecs.reserve(rows);
        for (std::uint32_t j = 0; j < rows; ++j) {
            std::vector<double> v(dim);
            for (auto& x : v) x = static_cast<double>(r.f32());
            vecs.emplace_back(std::move(v));
        }
        docs.emplace_back(id, std::move(vecs), std::move(token_ids));
    }
    return docs;
}

// ---------------------------------------------------------------------------
// Sparse corpus: JSON Lines, {"id": <int>, "w": {"<term_id>": <float>}}.
// ---------------------------------------------------------------------------

inline std::vector<SparseDoc> load_sparse_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open for reading: " + path);
    std::vector<SparseDoc> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!obj.contains("id") || !obj.contains("w"))
            throw DataError(path + ":" + std::to_string(lineno) + ": missing 'id' or 'w'");
        std::map<term_id_t, double> entries;
        for (const auto& [key, val] : obj.at("w").items()) {
            term_id_t term = 0;
            try {
                term = static_cast<term_id_t>(std::stoul(key));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(lineno) + ": bad term id '" + key +
                                "'");
            }
            entries[term] = val.get<double>();
        }
        docs.push_back({obj.at("id").get<doc_id_t>(), SparseVector(std::move(entries))});
    }
    if (docs.empty()) throw DataError(path + ": no records");
    return docs;
}

inline void save_sparse_jsonl(const std::vector<SparseDoc>& docs, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const auto& d : docs) {
        nlohmann::json w = nlohmann::json::object();
        for (const auto& [t, v] : d.vec.entries()) w[std::to_string(t)] = v;
        nlohmann::json obj{{"id", d.id}, {"w", std::move(w)}};
        out << obj.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Projection matrix file: magic, u32 rows, u32 cols, f32 row-major.
// ---------------------------------------------------------------------------

/// Dense row-major matrix, used for the learned projections that arrive as
/// data files rather than being trained here.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major, rows*cols

    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

    std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != cols) throw DimensionError("Matrix::apply: dimension mismatch");
        std::vector<double> out(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) out[r] = dot(row(r), x);
        return out;
    }
};

inline void save_matrix(const Matrix& m, const std::string& path) {
    BinaryWriter w;
    w.magic(kMagicMatrix);
    w.u32(static_cast<std::uint32_t>(m.rows));
    w.u32(static_cast<std::uint32_t>(m.cols));
    for (double v : m.values) w.f32(static_cast<float>(v));
    w.to_file(path);
}

inline Matrix load_matrix(const std::string& path) {
    auto r = BinaryReader::from_file(path);
    r.expect_magic(kMagicMatrix);
    Matrix m;
    m.rows = r.u32();
    m.cols = r.u32();
    if (m.rows == 0 || m.cols == 0) throw DataError(path + ": empty matrix");
    m.values.resize(m.rows * m.cols);
    for (auto& v : m.values) v = static_cast<double>(r.f32());
    detail::require_finite(m.values, "Matrix");
    return m;
}

}  // namespace vx
