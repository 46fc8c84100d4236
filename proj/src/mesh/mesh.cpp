#include "msmr/mesh/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "msmr/error.hpp"

namespace msmr::mesh {

void Mesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  std::map<std::pair<int, int>, int> edge_use;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (int v : t)
      if (v < 0 || v >= n)
        throw GeometryError("face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                            " of " + std::to_string(n));
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw GeometryError("face " + std::to_string(f) + " is degenerate");
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (++edge_use[{std::min(a, b), std::max(a, b)}] > 2)
        throw GeometryError("edge (" + std::to_string(std::min(a, b)) + ", " +
                            std::to_string(std::max(a, b)) + ") shared by more than two faces");
    }
  }
}

std::vector<std::pair<int, int>> Mesh::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(faces.size() * 3);
  for (const Face& t : faces)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      out.emplace_back(std::min(a, b), std::max(a, b));
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::vector<int>> Mesh::adjacency() const {
  std::vector<std::vector<int>> adj(vertices.size());
  for (auto [a, b] : edges()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

std::vector<std::vector<int>> Mesh::vertex_faces() const {
  std::vector<std::vector<int>> out(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int v : faces[f]) out[v].push_back(static_cast<int>(f));
  return out;
}

bool Mesh::is_closed() const {
  std::map<std::pair<int, int>, int> use;
  for (const Face& t : faces)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++use[{std::min(a, b), std::max(a, b)}];
    }
  return std::all_of(use.begin(), use.end(), [](const auto& e) { return e.second == 2; });
}

bool Mesh::is_consistently_oriented() const {
  std::map<std::pair<int, int>, int> directed;
  for (const Face& t : faces)
    for (int k = 0; k < 3; ++k)
      if (++directed[{t[k], t[(k + 1) % 3]}] > 1) return false;
  return true;
}

double Mesh::signed_volume() const {
  double v = 0.0;
  for (const Face& t : faces)
    v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]])) / 6.0;
  return v;
}

Vec3 Mesh::face_normal(std::size_t f) const {
  const Face& t = faces[f];
  return (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
}

Vec3 Mesh::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : vertices) c += v;
  return vertices.empty() ? c : Vec3(c / static_cast<double>(vertices.size()));
}

Mesh Mesh::mirrored_x() const {
  Mesh out = *this;
  for (Vec3& v : out.vertices) v.x() = -v.x();
  for (Face& f : out.faces) std::swap(f[1], f[2]);
  return out;
}

Mesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh " + path.string());
  Mesh mesh;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const int i = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(i > 0 ? i - 1 : static_cast<int>(mesh.vertices.size()) + i);
      }
      if (idx.size() < 3)
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  mesh.validate();
  return mesh;
}

void write_obj(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write mesh " + path.string());
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const Face& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) throw IoError("failed writing mesh " + path.string());
}

}  // namespace msmr::mesh
