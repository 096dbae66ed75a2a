/*
 * Copyright 2026 The smoothdyn Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smoothdyn {

/// Failure categories. Each maps to a distinct process exit code in the CLI.
enum class ErrorKind {
    dimension,      ///< shape mismatch between operands
    argument,       ///< invalid scalar argument or configuration value
    degree,         ///< isolated node where a degree normalization is required
    undefined,      ///< quantity undefined for the input (e.g. zero-norm quotient)
    geometry,       ///< degenerate triangle, zero area, bad mesh connectivity
    precondition,   ///< documented precondition not met (e.g. Delaunay assumption)
    rewiring,       ///< intrinsic edge flip impossible or did not terminate
    numerical,      ///< solver failure, NaN, instability
    io,             ///< file missing, parse error, bad binary header
    config,         ///< strict configuration parsing failure
};

std::string_view to_string(ErrorKind kind);
int exit_code(ErrorKind kind);

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message)
        , m_kind(kind)
    {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message)
{
    if (!condition) fail(kind, message);
}

} // namespace smoothdyn
