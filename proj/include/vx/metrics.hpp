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
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "vx/core.hpp"
#include "vx/errors.hpp"

namespace vx {

/// |approx-top-k intersect oracle-top-k| / k. The oracle list must reach
/// depth k; the approximate list may be shorter.
inline double recall_at_k(const std::vector<ScoredHit>& approx,
                          const std::vector<ScoredHit>& oracle, std::size_t k) {
    if (k < 1) throw MetricError("recall_at_k: k must be >= 1");
    if (oracle.size() < k)
        throw MetricError("recall_at_k: oracle has " + std::to_string(oracle.size()) +
                          " hits, needs " + std::to_string(k));
    std::unordered_set<doc_id_t> truth;
    truth.reserve(k);
    for (std::size_t i = 0; i < k; ++i) truth.insert(oracle[i].doc_id);
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < approx.size() && i < k; ++i)
        if (truth.count(approx[i].doc_id)) ++overlap;
    return static_cast<double>(overlap) / static_cast<double>(k);
}

/// One benchmark run's output. Everything except the timing fields is
/// deterministic under the run's seed.
struct EvalReport {
    std::string index_kind;
    std::size_t doc_count = 0;
    std::size_t query_count = 0;
    std::map<std::size_t, double> recall;   // k -> mean recall over queries
    double mean_candidates = 0.0;
    std::size_t max_candidates = 0;
    std::uint64_t index_size_bytes = 0;
    std::uint64_t seed = 0;
    // timing fields; excluded from determinism comparisons
    double build_time_ms = 0.0;
    double mean_latency_us = 0.0;
    double median_latency_us = 0.0;
    double p99_latency_us = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json recall_json = nlohmann::json::object();
        for (const auto& [k, v] : recall) recall_json[std::to_string(k)] = v;
        return nlohmann::json{{"index_kind", index_kind},
                              {"doc_count", doc_count},
                              {"query_count", query_count},
                              {"recall_at_k", std::move(recall_json)},
                              {"mean_candidates", mean_candidates},
                              {"max_candidates", max_candidates},
                              {"index_size_bytes", index_size_bytes},
                              {"seed", seed},
                              {"timing", nlohmann::json{{"build_time_ms", build_time_ms},
                                                        {"mean_latency_us", mean_latency_us},
                                                        {"median_latency_us", median_latency_us},
                                                        {"p99_latency_us", p99_latency_us}}}};
    }
};

/// Structural validation against the shipped report schema (a JSON Schema
/// subset: type / required / properties / additionalProperties). Returns the
/// first violation found, or an empty string when the instance conforms.
inline std::string schema_violation(const nlohmann::json& instance, const nlohmann::json& schema,
                                    const std::string& where = "$") {
    if (schema.contains("type")) {
        const std::string type = schema.at("type").get<std::string>();
        const bool ok = (type == "object" && instance.is_object()) ||
                        (type == "array" && instance.is_array()) ||
                        (type == "string" && instance.is_string()) ||
                        (type == "integer" && instance.is_number_integer()) ||
                        (type == "number" && instance.is_number()) ||
                        (type == "boolean" && instance.is_boolean());
        if (!ok) return where + ": expected type '" + type + "'";
    }
    if (instance.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema.at("required")) {
                if (!instance.contains(key.get<std::string>()))
                    return where + ": missing required key '" + key.get<std::string>() + "'";
            }
        }
        if (schema.contains("properties")) {
            for (const auto& [key, sub] : schema.at("properties").items()) {
                if (!instance.contains(key)) continue;
                const auto v = schema_violation(instance.at(key), sub, where + "." + key);
                if (!v.empty()) return v;
            }
        }
        if (schema.contains("additionalProperties") &&
            schema.at("additionalProperties").is_object()) {
            const auto& sub = schema.at("additionalProperties");
            const auto known = schema.contains("properties") ? schema.at("properties")
                                                             : nlohmann::json::object();
            for (const auto& [key, value] : instance.items()) {
                if (known.contains(key)) continue;
                const auto v = schema_violation(value, sub, where + "." + key);
                if (!v.empty()) return v;
            }
        }
    }
    if (instance.is_array() && schema.contains("items")) {
        std::size_t i = 0;
        for (const auto& item : instance) {
            const auto v =
                schema_violation(item, schema.at("items"), where + "[" + std::to_string(i) + "]");
            if (!v.empty()) return v;
            ++i;
        }
    }
    return {};
}

}  // namespace vx
