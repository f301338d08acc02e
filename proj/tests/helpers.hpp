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
#include <vector>

#include "vx/core.hpp"
#include "vx/rng.hpp"

namespace vxtest {

inline std::vector<double> random_values(std::size_t dim, vx::CounterRng& rng,
                                         double scale = 1.0) {
    std::vector<double> v(dim);
    for (auto& x : v) x = scale * rng.next_gaussian();
    return v;
}

inline vx::DenseVector random_vector(std::size_t dim, vx::CounterRng& rng, double scale = 1.0) {
    return vx::DenseVector(random_values(dim, rng, scale));
}

inline vx::EmbeddingSet random_set(std::size_t n, std::size_t dim, std::uint64_t seed,
                                   double scale = 1.0) {
    vx::CounterRng rng(seed);
    std::vector<vx::doc_id_t> ids(n);
    std::vector<double> data(n * dim);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<vx::doc_id_t>(i);
    for (auto& x : data) x = scale * rng.next_gaussian();
    return vx::EmbeddingSet(std::move(ids), std::move(data), dim);
}

/// Shared postcondition of every search op: sorted by descending score,
/// ties broken by ascending doc id, unique ids, ranks 1..n.
inline bool valid_hit_list(const std::vector<vx::ScoredHit>& hits) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (hits[i].rank != i + 1) return false;
        if (i == 0) continue;
        if (hits[i - 1].score < hits[i].score) return false;
        if (hits[i - 1].score == hits[i].score && hits[i - 1].doc_id >= hits[i].doc_id)
            return false;
        if (hits[i - 1].doc_id == hits[i].doc_id) return false;
    }
    return true;
}

}  // namespace vxtest
