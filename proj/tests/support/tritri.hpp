#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "msmr/mesh/mesh.hpp"

namespace oracle {

using msmr::mesh::Vec3;

// Segment p-q against triangle abc (Moller-Trumbore on the segment).
inline bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                                  const Vec3& c) {
  const Vec3 d = q - p;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 h = d.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-15) return false;
  const double inv = 1.0 / det;
  const Vec3 s = p - a;
  const double u = inv * s.dot(h);
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = s.cross(e1);
  const double v = inv * d.dot(qv);
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = inv * e2.dot(qv);
  return t >= 0.0 && t <= 1.0;
}

inline bool triangles_intersect(const Vec3* t1, const Vec3* t2) {
  for (int i = 0; i < 3; ++i) {
    if (segment_hits_triangle(t1[i], t1[(i + 1) % 3], t2[0], t2[1], t2[2])) return true;
    if (segment_hits_triangle(t2[i], t2[(i + 1) % 3], t1[0], t1[1], t1[2])) return true;
  }
  return false;
}

struct Box {
  Vec3 lo, hi;
  bool overlaps(const Box& o) const {
    return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
  }
};

inline Box face_box(const msmr::mesh::Mesh& m, std::size_t f) {
  Box b{m.vertices[m.faces[f][0]], m.vertices[m.faces[f][0]]};
  for (int k = 1; k < 3; ++k) {
    b.lo = b.lo.cwiseMin(m.vertices[m.faces[f][k]]);
    b.hi = b.hi.cwiseMax(m.vertices[m.faces[f][k]]);
  }
  return b;
}

inline bool meshes_intersect(const msmr::mesh::Mesh& a, const msmr::mesh::Mesh& b) {
  std::vector<Box> bb(b.face_count());
  for (std::size_t g = 0; g < b.face_count(); ++g) bb[g] = face_box(b, g);
  for (std::size_t f = 0; f < a.face_count(); ++f) {
    const Box ba = face_box(a, f);
    const Vec3 ta[3] = {a.vertices[a.faces[f][0]], a.vertices[a.faces[f][1]], a.vertices[a.faces[f][2]]};
    for (std::size_t g = 0; g < b.face_count(); ++g) {
      if (!ba.overlaps(bb[g])) continue;
      const Vec3 tb[3] = {b.vertices[b.faces[g][0]], b.vertices[b.faces[g][1]], b.vertices[b.faces[g][2]]};
      if (triangles_intersect(ta, tb)) return true;
    }
  }
  return false;
}

// Pairs of faces sharing no vertex that intersect.
inline std::size_t self_intersections(const msmr::mesh::Mesh& m) {
  std::size_t hits = 0;
  for (std::size_t f = 0; f < m.face_count(); ++f)
    for (std::size_t g = f + 1; g < m.face_count(); ++g) {
      bool shared = false;
      for (int i : m.faces[f])
        for (int j : m.faces[g]) shared |= i == j;
      if (shared || !face_box(m, f).overlaps(face_box(m, g))) continue;
      const Vec3 ta[3] = {m.vertices[m.faces[f][0]], m.vertices[m.faces[f][1]], m.vertices[m.faces[f][2]]};
      const Vec3 tb[3] = {m.vertices[m.faces[g][0]], m.vertices[m.faces[g][1]], m.vertices[m.faces[g][2]]};
      if (triangles_intersect(ta, tb)) ++hits;
    }
  return hits;
}

}  // namespace oracle
