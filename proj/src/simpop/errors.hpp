// Copyright 2026 The simpop Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simpop {

/// Base of every error raised by the library. The C API maps each subclass
/// onto one status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed input text. `line()` is 1-based; 0 when not line-related.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class MissingItemError : public Error {
public:
    explicit MissingItemError(std::string item)
        : Error("unknown item '" + item + "'"), item_(std::move(item)) {}
    const std::string& item() const noexcept { return item_; }

private:
    std::string item_;
};

/// Argument outside the mathematical domain of a formula (e.g. p <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Cosine similarity requested for an item without any session.
class UndefinedSimilarity : public Error {
public:
    using Error::Error;
};

class NoAnchorError : public Error {
public:
    NoAnchorError() : Error("session has no item known to the popularity table") {}
};

/// Non-finite objective or gradient while optimizing.
class DivergenceError : public Error {
public:
    DivergenceError(int iteration, const std::string& what)
        : Error("diverged at iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

} // namespace simpop
