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

#include <smoothdyn/mesh_io.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace smoothdyn {

namespace {

/// Next non-empty line with comments stripped.
bool next_content_line(std::istream& in, std::string& line, int& line_no)
{
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

[[noreturn]] void parse_error(const std::string& source, int line_no, const std::string& what)
{
    fail(ErrorKind::io, source + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace

TriMesh read_off(std::istream& in, const std::string& source)
{
    std::string line;
    int line_no = 0;
    if (!next_content_line(in, line, line_no)) parse_error(source, line_no, "empty file");
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "OFF") parse_error(source, line_no, "expected OFF header");
    long nv = -1;
    long nf = -1;
    long ne = 0;
    if (!(header >> nv)) {
        if (!next_content_line(in, line, line_no)) parse_error(source, line_no, "missing counts");
        std::istringstream counts(line);
        counts >> nv >> nf >> ne;
    } else {
        header >> nf >> ne;
    }
    if (nv < 0 || nf < 0) parse_error(source, line_no, "bad vertex/face counts");

    RealMatrix positions(nv, 3);
    for (long v = 0; v < nv; ++v) {
        if (!next_content_line(in, line, line_no)) parse_error(source, line_no, "unexpected end of vertices");
        std::istringstream row(line);
        if (!(row >> positions(v, 0) >> positions(v, 1) >> positions(v, 2)))
            parse_error(source, line_no, "bad vertex line");
    }
    std::vector<Face> faces;
    faces.reserve(static_cast<std::size_t>(nf));
    for (long f = 0; f < nf; ++f) {
        if (!next_content_line(in, line, line_no)) parse_error(source, line_no, "unexpected end of faces");
        std::istringstream row(line);
        int k = 0;
        row >> k;
        if (k != 3) {
            parse_error(
                source,
                line_no,
                "face " + std::to_string(f) + " has " + std::to_string(k) +
                    " corners; only triangles are supported");
        }
        Face face{};
        if (!(row >> face[0] >> face[1] >> face[2])) parse_error(source, line_no, "bad face line");
        faces.push_back(face);
    }
    return TriMesh(std::move(positions), std::move(faces));
}

TriMesh read_obj(std::istream& in, const std::string& source)
{
    std::vector<double> coords;
    std::vector<Face> faces;
    std::string line;
    int line_no = 0;
    while (next_content_line(in, line, line_no)) {
        std::istringstream row(line);
        std::string tag;
        row >> tag;
        if (tag == "v") {
            double x = 0.0;
            double y = 0.0;
            double z = 0.0;
            if (!(row >> x >> y >> z)) parse_error(source, line_no, "bad vertex line");
            coords.insert(coords.end(), {x, y, z});
        } else if (tag == "f") {
            std::vector<int> corners;
            std::string token;
            while (row >> token) {
                // v, v/vt, v/vt/vn, v//vn; negative indices are relative.
                long idx = 0;
                try {
                    idx = std::stol(token.substr(0, token.find('/')));
                } catch (const std::exception&) {
                    parse_error(source, line_no, "bad face index '" + token + "'");
                }
                const long nv = static_cast<long>(coords.size() / 3);
                corners.push_back(static_cast<int>(idx < 0 ? nv + idx : idx - 1));
            }
            if (corners.size() != 3) {
                parse_error(
                    source,
                    line_no,
                    "face " + std::to_string(faces.size()) + " has " +
                        std::to_string(corners.size()) + " corners; only triangles are supported");
            }
            faces.push_back({corners[0], corners[1], corners[2]});
        }
    }
    const Eigen::Index n = static_cast<Eigen::Index>(coords.size() / 3);
    RealMatrix positions(n, 3);
    for (Eigen::Index v = 0; v < n; ++v)
        for (int c = 0; c < 3; ++c) positions(v, c) = coords[static_cast<std::size_t>(3 * v + c)];
    return TriMesh(std::move(positions), std::move(faces));
}

TriMesh load_mesh(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open mesh file '" + path + "'");
    std::string ext = path.substr(path.find_last_of('.') == std::string::npos ? path.size() : path.find_last_of('.'));
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".off") return read_off(in, path);
    if (ext == ".obj") return read_obj(in, path);
    fail(ErrorKind::io, "unsupported mesh extension '" + ext + "' (expected .off or .obj)");
}

void write_off(std::ostream& out, const TriMesh& mesh)
{
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.faces().size() << " 0\n";
    out << std::setprecision(17);
    const RealMatrix& p = mesh.positions();
    for (Eigen::Index v = 0; v < p.rows(); ++v) out << p(v, 0) << ' ' << p(v, 1) << ' ' << p(v, 2) << '\n';
    for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_off(const std::string& path, const TriMesh& mesh)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write mesh file '" + path + "'");
    write_off(out, mesh);
}

} // namespace smoothdyn
