#include "msmr/hierarchy/decimate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "msmr/error.hpp"

namespace msmr::hierarchy {

std::vector<Eigen::Matrix4d> vertex_quadrics(const Mesh& mesh) {
  std::vector<Eigen::Matrix4d> q(mesh.vertex_count(), Eigen::Matrix4d::Zero());
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    Vec3 n = mesh.face_normal(f);
    const double len = n.norm();
    if (len == 0.0) continue;
    n /= len;
    const Eigen::Vector4d plane(n.x(), n.y(), n.z(), -n.dot(mesh.vertices[mesh.faces[f][0]]));
    const Eigen::Matrix4d k = plane * plane.transpose();
    for (int v : mesh.faces[f]) q[v] += k;
  }
  return q;
}

double quadric_error(const Eigen::Matrix4d& q, const Vec3& p) {
  const Eigen::Vector4d h(p.x(), p.y(), p.z(), 1.0);
  return h.dot(q * h);
}

double tie_tolerance(double cost) { return 1e-9 * std::abs(cost) + 1e-15; }

namespace {

class Contractor {
 public:
  explicit Contractor(const Mesh& mesh)
      : pos_(mesh.vertices), faces_(mesh.faces), face_alive_(mesh.face_count(), true),
        alive_(mesh.vertex_count(), true), quadric_(vertex_quadrics(mesh)) {}

  std::size_t alive_count() const { return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), true)); }

  /// Performs the cheapest legal contraction; false when none is legal.
  bool step(std::vector<Collapse>& trace) {
    rebuild_topology();
    std::vector<std::tuple<double, int, int>> order;
    order.reserve(edge_faces_.size());
    for (const auto& [e, count] : edge_faces_) {
      (void)count;
      order.emplace_back(quadric_error(quadric_[e.first] + quadric_[e.second], pos_[e.first]), e.first, e.second);
    }
    std::sort(order.begin(), order.end());
    std::size_t first = 0;
    while (first < order.size() && !legal(std::get<1>(order[first]), std::get<2>(order[first]))) ++first;
    if (first == order.size()) return false;
    // Costs equal up to rounding count as ties; the smallest edge wins.
    const double limit = std::get<0>(order[first]) + tie_tolerance(std::get<0>(order[first]));
    auto pick = order[first];
    for (std::size_t i = first + 1; i < order.size() && std::get<0>(order[i]) <= limit; ++i) {
      const auto& [c, a, b] = order[i];
      if (std::make_pair(a, b) < std::make_pair(std::get<1>(pick), std::get<2>(pick)) && legal(a, b)) pick = order[i];
    }
    const auto& [cost, a, b] = pick;
    contract(a, b);
    trace.push_back({a, b, cost});
    return true;
  }

  std::vector<Face> live_faces() const {
    std::vector<Face> out;
    for (std::size_t f = 0; f < faces_.size(); ++f)
      if (face_alive_[f]) out.push_back(faces_[f]);
    return out;
  }
  const std::vector<bool>& alive() const { return alive_; }

 private:
  void rebuild_topology() {
    neighbors_.assign(pos_.size(), {});
    incident_.assign(pos_.size(), {});
    edge_faces_.clear();
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (!face_alive_[f]) continue;
      const Face& t = faces_[f];
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        neighbors_[a].insert(b);
        neighbors_[b].insert(a);
        ++edge_faces_[{std::min(a, b), std::max(a, b)}];
        incident_[a].push_back(static_cast<int>(f));
      }
    }
  }

  bool on_boundary(int v) const {
    for (int u : neighbors_[v])
      if (edge_faces_.at({std::min(u, v), std::max(u, v)}) == 1) return true;
    return false;
  }

  bool legal(int a, int b) const {
    const int shared_faces = edge_faces_.at({a, b});
    std::size_t common = 0;
    for (int u : neighbors_[a]) common += neighbors_[b].count(u);
    if (common != static_cast<std::size_t>(shared_faces)) return false;
    if (shared_faces == 2 && on_boundary(a) && on_boundary(b)) return false;

    std::set<std::array<int, 3>> around_a;
    for (int f : incident_[a]) {
      Face s = faces_[f];
      std::sort(s.begin(), s.end());
      around_a.insert(s);
    }
    for (int f : incident_[b]) {
      const Face& t = faces_[f];
      if (std::find(t.begin(), t.end(), a) != t.end()) continue;
      Face moved = t;
      for (int& v : moved)
        if (v == b) v = a;
      const Vec3 before = (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]);
      const Vec3 after = (pos_[moved[1]] - pos_[moved[0]]).cross(pos_[moved[2]] - pos_[moved[0]]);
      if (after.norm() <= 1e-12 * before.norm() || before.dot(after) <= 0.0) return false;
      std::sort(moved.begin(), moved.end());
      if (around_a.count(moved)) return false;
    }
    return true;
  }

  void contract(int a, int b) {
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (!face_alive_[f]) continue;
      Face& t = faces_[f];
      const bool has_a = std::find(t.begin(), t.end(), a) != t.end();
      const bool has_b = std::find(t.begin(), t.end(), b) != t.end();
      if (has_a && has_b)
        face_alive_[f] = false;
      else if (has_b)
        for (int& v : t)
          if (v == b) v = a;
    }
    quadric_[a] += quadric_[b];
    alive_[b] = false;
  }

  std::vector<Vec3> pos_;
  std::vector<Face> faces_;
  std::vector<bool> face_alive_;
  std::vector<bool> alive_;
  std::vector<Eigen::Matrix4d> quadric_;
  std::vector<std::set<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
  std::map<std::pair<int, int>, int> edge_faces_;
};

}  // namespace

Decimation decimate_qem(const Mesh& mesh, std::size_t target) {
  mesh.validate();
  const std::size_t n = mesh.vertex_count();
  if (target < 4) throw ConfigError("decimation target must be at least 4, got " + std::to_string(target));
  if (target > n)
    throw ConfigError("decimation target " + std::to_string(target) + " exceeds vertex count " + std::to_string(n));

  Decimation out;
  Contractor work(mesh);
  std::size_t count = n;
  while (count > target) {
    if (!work.step(out.trace)) throw DecimationStuck(count, target);
    --count;
  }

  std::vector<int> remap(n, -1);
  for (std::size_t v = 0; v < n; ++v)
    if (work.alive()[v]) {
      remap[v] = static_cast<int>(out.source.size());
      out.source.push_back(static_cast<int>(v));
      out.mesh.vertices.push_back(mesh.vertices[v]);
    }
  for (Face t : work.live_faces()) {
    for (int& v : t) v = remap[v];
    out.mesh.faces.push_back(t);
  }
  std::vector<numeric::Triplet> sel;
  for (std::size_t i = 0; i < out.source.size(); ++i) sel.push_back({i, static_cast<std::size_t>(out.source[i]), 1.0});
  out.down = numeric::CsrMatrix(out.source.size(), n, std::move(sel));
  return out;
}

TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {a, Vec3(1, 0, 0)};
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {b, Vec3(0, 1, 0)};
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {a + v * ab, Vec3(1 - v, v, 0)};
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {c, Vec3(0, 0, 1)};
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {a + w * ac, Vec3(1 - w, 0, w)};
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {b + w * (c - b), Vec3(0, 1 - w, w)};
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return {a + ab * v + ac * w, Vec3(1 - v - w, v, w)};
}

numeric::CsrMatrix build_upsample(const Mesh& fine, const Mesh& coarse, const numeric::CsrMatrix& down) {
  if (down.rows() != coarse.vertex_count() || down.cols() != fine.vertex_count())
    throw ShapeError("down matrix does not match the fine/coarse meshes");
  if (coarse.face_count() == 0) throw GeometryError("coarse mesh has no faces to project onto");
  std::vector<int> kept(fine.vertex_count(), -1);
  for (std::size_t r = 0; r < down.rows(); ++r) {
    if (down.row_cols(r).size() != 1) throw GeometryError("down matrix row " + std::to_string(r) + " is not a selection");
    kept[down.row_cols(r)[0]] = static_cast<int>(r);
  }
  std::vector<numeric::Triplet> trip;
  for (std::size_t j = 0; j < fine.vertex_count(); ++j) {
    if (kept[j] >= 0) {
      trip.push_back({j, static_cast<std::size_t>(kept[j]), 1.0});
      continue;
    }
    const Vec3& p = fine.vertices[j];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_face = 0;
    Vec3 bary;
    for (std::size_t f = 0; f < coarse.face_count(); ++f) {
      const Face& t = coarse.faces[f];
      const auto hit = closest_point_on_triangle(p, coarse.vertices[t[0]], coarse.vertices[t[1]], coarse.vertices[t[2]]);
      const double d = (hit.point - p).squaredNorm();
      if (d < best) {
        best = d;
        best_face = f;
        bary = hit.barycentric;
      }
    }
    bary = bary.cwiseMax(0.0);
    bary /= bary.sum();
    for (int k = 0; k < 3; ++k)
      if (bary[k] > 0.0) trip.push_back({j, static_cast<std::size_t>(coarse.faces[best_face][k]), bary[k]});
  }
  return numeric::CsrMatrix(fine.vertex_count(), coarse.vertex_count(), std::move(trip));
}

}  // namespace msmr::hierarchy
