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
#include <smoothdyn/layers.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace smoothdyn::cli {

/// The graph or mesh a trajectory lives on. Stored next to every trajectory as
/// `<file>.json`: {"domain": {"type": "grid", "rows", "cols"} or
/// {"type": "mesh", "path" (relative to the sidecar), "rewire"}, "truncated"}.
struct Domain
{
    nlohmann::json descriptor;
    OperatorPtr op;
    /// Node coordinates (n x 3); grid nodes sit at integer (row, col, 0).
    RealMatrix positions;
};

Domain load_domain(const nlohmann::json& descriptor, const std::string& base_dir);

void save_trajectory_with_domain(const std::string& path, const Trajectory& traj, const nlohmann::json& domain);
/// Reads the trajectory and its sidecar; the domain descriptor is returned with
/// mesh paths made absolute.
Trajectory load_trajectory_with_domain(const std::string& path, nlohmann::json* domain);

struct CommonOptions
{
    int threads = 0;
};

void cmd_gen_data(const std::string& config, const std::string& out, const CommonOptions& opts);
void cmd_train(const std::string& config, const std::string& data, const std::string& out, const CommonOptions& opts);
void cmd_rollout(const std::string& checkpoint, const std::string& init, int steps, const std::string& out);
void cmd_eval(
    const std::string& pred,
    const std::string& truth,
    const std::vector<std::string>& metrics,
    const std::string& out);
void cmd_sensitivity(const std::string& config, const std::string& out, const CommonOptions& opts);
void cmd_bound(const std::string& config, const std::string& out, const CommonOptions& opts);
void cmd_mesh_prep(const std::string& in, const std::string& out);

std::string version_string();

} // namespace smoothdyn::cli
