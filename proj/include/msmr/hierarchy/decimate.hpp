#pragma once

#include <cstddef>
#include <vector>

#include "msmr/mesh/mesh.hpp"
#include "msmr/numeric/sparse.hpp"

namespace msmr::hierarchy {

using mesh::Face;
using mesh::Mesh;
using mesh::Vec3;

struct Collapse {
  int kept;     // lower original index
  int removed;
  double cost;  // quadric error at the kept position
};

struct Decimation {
  Mesh mesh;
  /// coarse x fine selection matrix, one 1.0 per row
  numeric::CsrMatrix down;
  /// source[i] = fine index of coarse vertex i, increasing
  std::vector<int> source;
  std::vector<Collapse> trace;
};

/// Greedy quadric-error edge contraction down to `target` vertices. Each
/// collapse keeps the endpoint with the lower index at its original position.
/// Among equal costs the lexicographically smallest edge wins. Throws
/// DecimationStuck when no legal contraction remains.
Decimation decimate_qem(const Mesh& mesh, std::size_t target);

/// Per-vertex fundamental quadrics (sum of unit-normal plane quadrics).
std::vector<Eigen::Matrix4d> vertex_quadrics(const Mesh& mesh);
double quadric_error(const Eigen::Matrix4d& q, const Vec3& p);
/// Costs within this distance of the cheapest contraction are treated as equal.
double tie_tolerance(double cost);

/// fine x coarse barycentric interpolation matrix. Retained vertices map to
/// themselves, discarded ones to their projection on the nearest coarse face.
numeric::CsrMatrix build_upsample(const Mesh& fine, const Mesh& coarse, const numeric::CsrMatrix& down);

struct TrianglePoint {
  Vec3 point;
  Vec3 barycentric;
};
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace msmr::hierarchy
