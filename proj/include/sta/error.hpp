// Copyright 2026 The STA Authors. All Rights Reserved.
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

#ifndef STA_ERROR_HPP
#define STA_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sta {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed CSV input. `offset()` is the byte offset where parsing failed.
class CsvError : public Error {
public:
    CsvError(const std::string& what, std::size_t offset)
        : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Knowledge-graph backend failure (network, HTTP status, bad payload).
class KgError : public Error {
public:
    using Error::Error;
};

/// A failure the KG client may retry.
class KgTransientError : public KgError {
public:
    using KgError::KgError;
};

/// Replay mode was asked for a query that is not in the fixture.
class KgFixtureMiss : public KgError {
public:
    explicit KgFixtureMiss(std::string key)
        : KgError("kg fixture miss: " + key), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class LlmError : public Error {
public:
    using Error::Error;
};

class ScoreError : public Error {
public:
    using Error::Error;
};

}  // namespace sta

#endif  // STA_ERROR_HPP
