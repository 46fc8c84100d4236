#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "msmr/hierarchy/decimate.hpp"
#include "msmr/hierarchy/spiral.hpp"

namespace msmr::hierarchy {

/// Mesh pyramid, level 0 finest. down[l] maps level l to l + 1, up[l] maps
/// level l + 1 back to level l.
struct MeshHierarchy {
  std::vector<Mesh> levels;
  std::vector<numeric::CsrMatrix> down;
  std::vector<numeric::CsrMatrix> up;
  std::vector<SpiralTable> spirals;
  /// Index of each level-0 vertex in the mesh the hierarchy was built from.
  std::vector<int> source_vertices;

  std::size_t level_count() const { return levels.size(); }
  std::size_t size(std::size_t level) const { return levels[level].vertex_count(); }
  void validate() const;
};

/// Lengths 12, 12, 10, 9, 9 from fine to coarse, extended with 9.
std::vector<std::size_t> default_spiral_lengths(std::size_t levels);

/// `finest` > 0 decimates the input to that many vertices before level 0.
MeshHierarchy build_hierarchy(const Mesh& mesh, std::size_t levels,
                              const std::vector<std::size_t>& spiral_lengths, std::size_t finest = 0);

void save_hierarchy(const MeshHierarchy& h, const std::filesystem::path& dir);
MeshHierarchy load_hierarchy(const std::filesystem::path& dir);

void write_sparse(const std::filesystem::path& path, const numeric::CsrMatrix& m);
numeric::CsrMatrix read_sparse(const std::filesystem::path& path);

}  // namespace msmr::hierarchy
