#include "msmr/mesh/kinematics.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <string>

#include "msmr/error.hpp"

namespace msmr::mesh {

std::size_t KinematicChain::root() const {
  for (std::size_t j = 0; j < parent.size(); ++j)
    if (parent[j] == static_cast<int>(j)) return j;
  throw GeometryError("kinematic chain has no root");
}

std::vector<std::vector<int>> KinematicChain::children() const {
  std::vector<std::vector<int>> out(size());
  for (std::size_t j = 0; j < size(); ++j)
    if (parent[j] != static_cast<int>(j)) out[parent[j]].push_back(static_cast<int>(j));
  return out;
}

std::vector<int> KinematicChain::topological_order() const {
  const auto kids = children();
  std::vector<int> order{static_cast<int>(root())};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int c : kids[order[i]]) order.push_back(c);
  return order;
}

std::vector<int> KinematicChain::articulated_joints() const {
  const auto kids = children();
  const int r = static_cast<int>(root());
  std::vector<int> out;
  for (int j : topological_order())
    if (j != r && !kids[j].empty()) out.push_back(j);
  return out;
}

void KinematicChain::validate() const {
  const std::size_t n = joints.size();
  if (parent.size() != n || next.size() != n || flexion_vertex.size() != n || angles.size() != n)
    throw GeometryError("kinematic chain arrays disagree in length");
  std::size_t roots = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (parent[j] < 0 || parent[j] >= static_cast<int>(n))
      throw GeometryError("joint " + std::to_string(j) + " has invalid parent");
    if (parent[j] == static_cast<int>(j)) ++roots;
    if (next[j] >= static_cast<int>(n)) throw GeometryError("joint " + std::to_string(j) + " has invalid next");
  }
  if (roots != 1) throw GeometryError("kinematic chain needs exactly one root, found " + std::to_string(roots));
  if (topological_order().size() != n) throw GeometryError("kinematic chain is not a tree");
}

void KinematicChain::reset_angles() { std::fill(angles.begin(), angles.end(), Vec3::Zero()); }

void KinematicChain::clamp_angles(double limit) {
  for (Vec3& a : angles)
    for (int k = 0; k < 3; ++k) a[k] = std::clamp(a[k], -limit, limit);
}

Eigen::Matrix3d LocalFrame::basis() const {
  Eigen::Matrix3d m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = z;
  return m;
}

std::vector<LocalFrame> compute_local_frames(const KinematicChain& chain, const Mesh& mesh) {
  chain.validate();
  std::vector<LocalFrame> frames(chain.size());
  for (std::size_t j = 0; j < chain.size(); ++j) {
    const std::string who = "joint " + std::to_string(j);
    Vec3 z;
    if (chain.next[j] >= 0) {
      z = chain.joints[chain.next[j]] - chain.joints[j];
    } else {
      if (chain.parent[j] == static_cast<int>(j))
        throw GeometryError("degenerate frame at " + who + ": root needs a next joint");
      z = chain.joints[j] - chain.joints[chain.parent[j]];
    }
    const double zn = z.norm();
    if (zn < 1e-12) throw GeometryError("degenerate frame at " + who + ": zero-length z axis");
    z /= zn;

    const int fv = chain.flexion_vertex[j];
    if (fv < 0 || fv >= static_cast<int>(mesh.vertex_count()))
      throw GeometryError("degenerate frame at " + who + ": no flexion vertex");
    const Vec3 hint = mesh.vertices[fv] - chain.joints[j];
    Vec3 x = hint - hint.dot(z) * z;
    const double xn = x.norm();
    if (xn < 1e-9 * std::max(1.0, hint.norm()))
      throw GeometryError("degenerate frame at " + who + ": flexion vertex is collinear with z");
    x /= xn;
    // Re-orthogonalize once; the projection can leave rounding-level overlap.
    x -= x.dot(z) * z;
    x.normalize();
    frames[j] = LocalFrame{chain.joints[j], x, z.cross(x), z};
  }
  return frames;
}

RigidTransform RigidTransform::from(const Eigen::Matrix3d& r, const Vec3& t) {
  return RigidTransform{r, t, false};
}

RigidTransform RigidTransform::then(const RigidTransform& outer) const {
  if (identity) return outer;
  if (outer.identity) return *this;
  return from(outer.rotation * rotation, outer.rotation * translation + outer.translation);
}

RigidTransform RigidTransform::inverse() const {
  if (identity) return *this;
  const Eigen::Matrix3d rt = rotation.transpose();
  return from(rt, -(rt * translation));
}

Eigen::Matrix3d local_rotation(const Vec3& a) {
  return (Eigen::AngleAxisd(a.x(), Vec3::UnitX()) * Eigen::AngleAxisd(a.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(a.z(), Vec3::UnitZ()))
      .toRotationMatrix();
}

std::vector<RigidTransform> joint_transforms(const KinematicChain& chain,
                                             const std::vector<LocalFrame>& frames) {
  if (frames.size() != chain.size()) throw GeometryError("frame count does not match chain");
  std::vector<RigidTransform> world(chain.size());
  for (int j : chain.topological_order()) {
    RigidTransform local;
    if (!chain.angles[j].isZero(0.0)) {
      const Eigen::Matrix3d f = frames[j].basis();
      const Eigen::Matrix3d r = f * local_rotation(chain.angles[j]) * f.transpose();
      local = RigidTransform::from(r, frames[j].origin - r * frames[j].origin);
    }
    const int p = chain.parent[j];
    world[j] = p == j ? local : local.then(world[p]);
  }
  return world;
}

void validate_skinning(const Skinning& skinning, std::size_t vertex_count, std::size_t joint_count) {
  if (skinning.size() != vertex_count)
    throw GeometryError("skinning covers " + std::to_string(skinning.size()) + " of " +
                        std::to_string(vertex_count) + " vertices");
  for (std::size_t v = 0; v < skinning.size(); ++v)
    if (skinning[v] < 0 || skinning[v] >= static_cast<int>(joint_count))
      throw GeometryError("skinning error: vertex " + std::to_string(v) + " is not assigned to a joint");
}

Mesh pose_mesh(const Mesh& mesh, const KinematicChain& chain, const Skinning& skinning) {
  return pose_mesh(mesh, chain, skinning, compute_local_frames(chain, mesh));
}

Mesh pose_mesh(const Mesh& mesh, const KinematicChain& chain, const Skinning& skinning,
               const std::vector<LocalFrame>& frames) {
  validate_skinning(skinning, mesh.vertex_count(), chain.size());
  const auto world = joint_transforms(chain, frames);
  Mesh out = mesh;
  for (std::size_t v = 0; v < out.vertices.size(); ++v)
    out.vertices[v] = world[skinning[v]].apply(mesh.vertices[v]);
  return out;
}

std::vector<Vec3> posed_joints(const KinematicChain& chain, const std::vector<LocalFrame>& frames) {
  const auto world = joint_transforms(chain, frames);
  std::vector<Vec3> out(chain.size());
  for (std::size_t j = 0; j < chain.size(); ++j)
    out[j] = world[j].apply(chain.joints[j]);
  return out;
}

}  // namespace msmr::mesh
