#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msmr/mesh/mesh.hpp"

namespace msmr::hierarchy {

/// Fixed-length spiral sequence per vertex, padded with -1.
struct SpiralTable {
  static constexpr int kPad = -1;
  std::size_t length = 0;
  std::vector<int> indices;  // vertex-major, vertex_count * length

  std::size_t vertex_count() const { return length ? indices.size() / length : 0; }
  std::span<const int> operator[](std::size_t v) const { return {indices.data() + v * length, length}; }
};

/// Neighbors of v in winding order, starting at the smallest-index neighbor
/// (or at the open end of a boundary fan).
std::vector<int> ordered_ring(const mesh::Mesh& mesh, const std::vector<std::vector<int>>& vertex_faces, int v);

SpiralTable enumerate_spirals(const mesh::Mesh& mesh, std::size_t length);

}  // namespace msmr::hierarchy
