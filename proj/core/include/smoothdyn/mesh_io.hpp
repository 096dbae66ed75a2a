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

#include <smoothdyn/mesh.hpp>

#include <iosfwd>
#include <string>

namespace smoothdyn {

/// Triangle-only readers. Polygons with more than three corners are rejected
/// with an io error that names the offending face.
TriMesh read_off(std::istream& in, const std::string& source = "<stream>");
TriMesh read_obj(std::istream& in, const std::string& source = "<stream>");

/// Dispatches on the extension (.off / .obj, case-insensitive).
TriMesh load_mesh(const std::string& path);

void write_off(std::ostream& out, const TriMesh& mesh);
void save_off(const std::string& path, const TriMesh& mesh);

} // namespace smoothdyn
