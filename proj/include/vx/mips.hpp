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
#include <vector>

#include "vx/core.hpp"
#include "vx/errors.hpp"

namespace vx {

/// Reduction from maximum-inner-product search to Euclidean NN search by
/// augmenting vectors with one extra coordinate:
///
///   doc:    [psi / M ; sqrt(1 - |psi|^2 / M^2)]   (unit norm)
///   query:  [phi / |phi| ; 0]                     (unit norm)
///
/// with M the maximum document norm over the fitted collection. With both
/// sides unit-length, minimising the Euclidean distance to the transformed
/// query is the same as maximising the original inner product.
///
/// The transform is bound to the collection it was fitted on: a document
/// with a larger norm cannot be transformed, refit instead.
class MipTransform {
  public:
    static MipTransform fit(const EmbeddingSet& docs) {
        double max_norm_sq = 0.0;
        for (std::size_t i = 0; i < docs.size(); ++i)
            max_norm_sq = std::max(max_norm_sq, norm_sq(docs.vec(i)));
        if (max_norm_sq == 0.0)
            throw DegenerateCollectionError("MipTransform::fit: all-zero collection");
        return MipTransform(std::sqrt(max_norm_sq), docs.dim());
    }

    MipTransform(double big_m, std::size_t source_dim) : big_m_(big_m), source_dim_(source_dim) {
        if (!(big_m_ > 0.0)) throw DegenerateCollectionError("MipTransform: M must be positive");
    }

    double big_m() const { return big_m_; }
    std::size_t source_dim() const { return source_dim_; }
    std::size_t target_dim() const { return source_dim_ + 1; }

    DenseVector transform_doc(std::span<const double> psi) const {
        if (psi.size() != source_dim_) throw DimensionError("transform_doc: dimension mismatch");
        const double n = norm(psi);
        if (n > big_m_ * (1.0 + 1e-9))
            throw OutOfFitError("transform_doc: norm " + std::to_string(n) +
                                " exceeds fitted M " + std::to_string(big_m_));
        std::vector<double> out(source_dim_ + 1);
        for (std::size_t i = 0; i < source_dim_; ++i) out[i] = psi[i] / big_m_;
        const double ratio = std::min(n / big_m_, 1.0);  // clamp absorbs rounding at |psi| ~ M
        out[source_dim_] = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
        return DenseVector(std::move(out));
    }

    DenseVector transform_query(std::span<const double> phi) const {
        if (phi.size() != source_dim_) throw DimensionError("transform_query: dimension mismatch");
        const double n = norm(phi);
        if (n == 0.0) throw DegenerateVectorError("transform_query: zero query");
        std::vector<double> out(source_dim_ + 1);
        for (std::size_t i = 0; i < source_dim_; ++i) out[i] = phi[i] / n;
        out[source_dim_] = 0.0;
        return DenseVector(std::move(out));
    }

    /// Transforms a whole collection, preserving ids.
    EmbeddingSet transform_docs(const EmbeddingSet& docs) const {
        std::vector<double> data;
        data.reserve(docs.size() * target_dim());
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const DenseVector t = transform_doc(docs.vec(i));
            data.insert(data.end(), t.values().begin(), t.values().end());
        }
        return EmbeddingSet(docs.ids(), std::move(data), target_dim());
    }

  private:
    double big_m_;
    std::size_t source_dim_;
};

}  // namespace vx
