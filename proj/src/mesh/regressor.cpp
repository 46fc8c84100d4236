#include "msmr/mesh/regressor.hpp"

#include <cmath>
#include <string>

#include "msmr/error.hpp"

namespace msmr::mesh {

void JointRegressor::validate(double tol) const {
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    double s = 0.0;
    for (double w : weights.row_values(r)) {
      if (w < 0.0) throw GeometryError("regressor row " + std::to_string(r) + " has a negative weight");
      s += w;
    }
    if (std::abs(s - 1.0) > tol)
      throw GeometryError("regressor row " + std::to_string(r) + " sums to " + std::to_string(s));
  }
}

std::vector<Vec3> regress_joints(const std::vector<Vec3>& vertices, const JointRegressor& reg) {
  if (reg.weights.cols() != vertices.size())
    throw ShapeError("regressor expects " + std::to_string(reg.weights.cols()) + " vertices, mesh has " +
                     std::to_string(vertices.size()));
  std::vector<Vec3> joints(reg.weights.rows(), Vec3::Zero());
  for (std::size_t r = 0; r < reg.weights.rows(); ++r) {
    auto cols = reg.weights.row_cols(r);
    auto vals = reg.weights.row_values(r);
    for (std::size_t i = 0; i < cols.size(); ++i) joints[r] += vals[i] * vertices[cols[i]];
  }
  return joints;
}

std::vector<Vec3> regress_joints(const Mesh& mesh, const JointRegressor& reg) {
  return regress_joints(mesh.vertices, reg);
}

Centered root_center(const std::vector<Vec3>& vertices, const std::vector<Vec3>& joints,
                     std::size_t root_index) {
  if (root_index >= joints.size())
    throw GeometryError("root joint " + std::to_string(root_index) + " out of range");
  const Vec3 offset = joints[root_index];
  Centered out{vertices, joints};
  for (Vec3& v : out.vertices) v -= offset;
  for (Vec3& j : out.joints) j -= offset;
  return out;
}

}  // namespace msmr::mesh
