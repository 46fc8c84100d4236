#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace msmr::mesh {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Triangle mesh. Positions are in meters; faces index into `vertices` and
/// are wound counter-clockwise when seen from outside.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  std::size_t face_count() const noexcept { return faces.size(); }

  /// Throws GeometryError on out-of-range or repeated face indices, or on an
  /// edge shared by more than two faces.
  void validate() const;

  /// Undirected edges as (low, high) pairs, sorted.
  std::vector<std::pair<int, int>> edges() const;
  /// Sorted neighbor lists.
  std::vector<std::vector<int>> adjacency() const;
  std::vector<std::vector<int>> vertex_faces() const;

  bool is_closed() const;
  /// Every interior edge is traversed once in each direction.
  bool is_consistently_oriented() const;
  double signed_volume() const;

  Vec3 face_normal(std::size_t f) const;  // unnormalized, length = 2 * area
  Vec3 centroid() const;

  /// Reflection through the x = 0 plane with face winding flipped, so the
  /// result stays outward-oriented.
  Mesh mirrored_x() const;
};

Mesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace msmr::mesh
