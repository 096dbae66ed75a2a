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

#include <smoothdyn/dynamics.hpp>

#include <iosfwd>
#include <string>

namespace smoothdyn {

/// Little-endian binary layout:
///   "TRAJ" | u32 version = 1 | u64 n | u64 d | u64 n_frames |
///   f64 times[n_frames] | f64 frames, row-major, frame after frame.
inline constexpr std::uint32_t k_trajectory_version = 1;

void write_trajectory(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in, const std::string& source = "<stream>");

void save_trajectory(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& path);

/// Single matrix stored as a one-frame trajectory at time 0. Used for
/// checkpoint parameter tensors.
void save_matrix(const std::string& path, const RealMatrix& m);
RealMatrix load_matrix(const std::string& path);

} // namespace smoothdyn
