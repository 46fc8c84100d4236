#pragma once

#include <vector>

#include "msmr/mesh/mesh.hpp"
#include "msmr/numeric/sparse.hpp"

namespace msmr::mesh {

/// Sparse joints-by-vertices matrix with non-negative rows summing to one.
struct JointRegressor {
  numeric::CsrMatrix weights;

  /// Throws GeometryError on a negative weight or a row not summing to 1.
  void validate(double tol = 1e-9) const;
};

/// joints = weights * vertices
std::vector<Vec3> regress_joints(const Mesh& mesh, const JointRegressor& reg);
std::vector<Vec3> regress_joints(const std::vector<Vec3>& vertices, const JointRegressor& reg);

struct Centered {
  std::vector<Vec3> vertices;
  std::vector<Vec3> joints;
};

/// Translates vertices and joints so joints[root_index] lands on the origin.
Centered root_center(const std::vector<Vec3>& vertices, const std::vector<Vec3>& joints,
                     std::size_t root_index);

}  // namespace msmr::mesh
