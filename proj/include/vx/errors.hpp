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
#include <stdexcept>
#include <string>
#include <vector>

namespace vx {

/// Root of the library's exception hierarchy. The three direct children map
/// onto CLI exit codes: ConfigError -> 2, DataError -> 3, InvariantError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct InvariantError : Error {
    using Error::Error;
};

struct DimensionError : DataError {
    using DataError::DataError;
};

struct ArityError : DataError {
    using DataError::DataError;
};

struct DegenerateVectorError : DataError {
    using DataError::DataError;
};

struct DegenerateCollectionError : DataError {
    using DataError::DataError;
};

struct OutOfFitError : DataError {
    using DataError::DataError;
};

struct CardinalityError : DataError {
    using DataError::DataError;
};

struct SubspaceError : DataError {
    using DataError::DataError;
};

struct CodeError : DataError {
    using DataError::DataError;
};

struct ProbeError : ConfigError {
    using ConfigError::ConfigError;
};

struct EmptyLayerError : DataError {
    using DataError::DataError;
};

struct EmptyIndexError : DataError {
    using DataError::DataError;
};

struct LexicalInfoError : DataError {
    using DataError::DataError;
};

struct ConsistencyError : DataError {
    using DataError::DataError;
};

struct WeightError : DataError {
    using DataError::DataError;
};

struct IngestError : DataError {
    using DataError::DataError;
};

struct BatchError : DataError {
    using DataError::DataError;
};

struct DomainError : DataError {
    using DataError::DataError;
};

struct MetricError : DataError {
    using DataError::DataError;
};

// Graph build ends up here when the bottom layer is not fully reachable;
// a partial graph is never returned.
struct ConnectivityError : InvariantError {
    using InvariantError::InvariantError;
};

/// Hard-negative mining ran out of non-positive hits. Carries whatever was
/// gathered so callers can decide whether a short list is usable.
struct ShortfallError : DataError {
    ShortfallError(const std::string& msg, std::vector<std::uint64_t> partial)
        : DataError(msg), partial_result(std::move(partial)) {}

    std::vector<std::uint64_t> partial_result;
};

}  // namespace vx
