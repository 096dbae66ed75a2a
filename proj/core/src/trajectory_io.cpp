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

#include <smoothdyn/trajectory_io.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace smoothdyn {

namespace {

static_assert(std::endian::native == std::endian::little, "binary trajectory I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& source)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) fail(ErrorKind::io, source + ": truncated trajectory file");
    return v;
}

} // namespace

void write_trajectory(std::ostream& out, const Trajectory& traj)
{
    traj.validate();
    out.write("TRAJ", 4);
    put<std::uint32_t>(out, k_trajectory_version);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(traj.nodes()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(traj.channels()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(traj.size()));
    for (double t : traj.times) put<double>(out, t);
    for (const RealMatrix& f : traj.frames) {
        for (Eigen::Index r = 0; r < f.rows(); ++r)
            for (Eigen::Index c = 0; c < f.cols(); ++c) put<double>(out, f(r, c));
    }
    require(static_cast<bool>(out), ErrorKind::io, "trajectory: write failed");
}

Trajectory read_trajectory(std::istream& in, const std::string& source)
{
    char magic[4] = {};
    in.read(magic, 4);
    require(in && std::memcmp(magic, "TRAJ", 4) == 0, ErrorKind::io, source + ": not a TRAJ file");
    const auto version = get<std::uint32_t>(in, source);
    require(
        version == k_trajectory_version,
        ErrorKind::io,
        source + ": unsupported trajectory version " + std::to_string(version));
    const auto n = get<std::uint64_t>(in, source);
    const auto d = get<std::uint64_t>(in, source);
    const auto count = get<std::uint64_t>(in, source);
    constexpr std::uint64_t k_limit = std::uint64_t{1} << 40;
    require(n < k_limit && d < k_limit && count < k_limit && n * d * count < k_limit, ErrorKind::io, source + ": implausible header sizes");

    Trajectory traj;
    traj.times.resize(count);
    for (auto& t : traj.times) t = get<double>(in, source);
    traj.frames.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        RealMatrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        for (Eigen::Index r = 0; r < f.rows(); ++r)
            for (Eigen::Index c = 0; c < f.cols(); ++c) f(r, c) = get<double>(in, source);
        traj.frames.push_back(std::move(f));
    }
    traj.validate();
    return traj;
}

void save_trajectory(const std::string& path, const Trajectory& traj)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write '" + path + "'");
    write_trajectory(out, traj);
}

Trajectory load_trajectory(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open '" + path + "'");
    return read_trajectory(in, path);
}

void save_matrix(const std::string& path, const RealMatrix& m)
{
    Trajectory t;
    t.times = {0.0};
    t.frames = {m};
    save_trajectory(path, t);
}

RealMatrix load_matrix(const std::string& path)
{
    Trajectory t = load_trajectory(path);
    require(t.size() == 1, ErrorKind::io, path + ": expected a single-frame matrix file");
    return t.frames.front();
}

} // namespace smoothdyn
