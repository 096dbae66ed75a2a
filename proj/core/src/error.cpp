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

#include <smoothdyn/error.hpp>

namespace smoothdyn {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::argument: return "argument";
    case ErrorKind::degree: return "degree";
    case ErrorKind::undefined: return "undefined";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::rewiring: return "rewiring";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

int exit_code(ErrorKind kind)
{
    // 1 is reserved for uncategorized failures, 2 for CLI usage errors.
    switch (kind) {
    case ErrorKind::config: return 3;
    case ErrorKind::io: return 4;
    case ErrorKind::argument: return 5;
    case ErrorKind::dimension: return 6;
    case ErrorKind::degree: return 7;
    case ErrorKind::undefined: return 8;
    case ErrorKind::geometry: return 9;
    case ErrorKind::precondition: return 10;
    case ErrorKind::rewiring: return 11;
    case ErrorKind::numerical: return 12;
    }
    return 1;
}

} // namespace smoothdyn
