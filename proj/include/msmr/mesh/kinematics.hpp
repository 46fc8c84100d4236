#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "msmr/mesh/mesh.hpp"

namespace msmr::mesh {

/// Joint tree of an articulated mesh in its neutral pose plus the current
/// joint angles.
struct KinematicChain {
  std::vector<Vec3> joints;        ///< neutral positions
  std::vector<int> parent;         ///< parent[root] == root
  std::vector<int> next;           ///< joint the z axis points to; -1 continues the parent bone
  std::vector<int> flexion_vertex; ///< mesh vertex giving the x axis; -1 when absent
  std::vector<Vec3> angles;        ///< radians about the local x, y, z axes

  std::size_t size() const noexcept { return joints.size(); }
  std::size_t root() const;
  std::vector<std::vector<int>> children() const;
  /// Parents listed before children.
  std::vector<int> topological_order() const;
  /// Joints with at least one child other than the root: the ones whose
  /// rotation moves geometry.
  std::vector<int> articulated_joints() const;

  /// Exactly one root, every other joint reaches it, array sizes agree.
  void validate() const;
  void reset_angles();
  /// Clamps each angle component into [-limit, limit].
  void clamp_angles(double limit);
};

/// Per-joint orthonormal right-handed frame.
struct LocalFrame {
  Vec3 origin;
  Vec3 x, y, z;

  Eigen::Matrix3d basis() const;  ///< columns x, y, z
};

/// z points from the joint to its `next` joint (or continues the parent
/// bone), x is the flexion-vertex offset projected off z, y = z cross x.
/// Throws GeometryError naming the joint when an axis degenerates.
std::vector<LocalFrame> compute_local_frames(const KinematicChain& chain, const Mesh& mesh);

/// Rigid motion p -> rotation * p + translation. `identity` short-circuits
/// application so the zero pose reproduces inputs bit for bit.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();
  bool identity = true;

  Vec3 apply(const Vec3& p) const { return identity ? p : Vec3(rotation * p + translation); }
  Vec3 apply_direction(const Vec3& d) const { return identity ? d : Vec3(rotation * d); }
  RigidTransform then(const RigidTransform& outer) const;  ///< outer ∘ this
  RigidTransform inverse() const;
  static RigidTransform from(const Eigen::Matrix3d& r, const Vec3& t);
};

/// Rotation about local x, then y, then z, expressed in local coordinates.
Eigen::Matrix3d local_rotation(const Vec3& angles);

/// World transform of every joint for the chain's current angles.
std::vector<RigidTransform> joint_transforms(const KinematicChain& chain,
                                             const std::vector<LocalFrame>& frames);

/// Each vertex follows exactly one joint.
using Skinning = std::vector<int>;

/// Throws GeometryError on an unassigned or out-of-range entry.
void validate_skinning(const Skinning& skinning, std::size_t vertex_count, std::size_t joint_count);

/// Rigid segment skinning: every vertex moves with its joint's transform.
Mesh pose_mesh(const Mesh& mesh, const KinematicChain& chain, const Skinning& skinning);
Mesh pose_mesh(const Mesh& mesh, const KinematicChain& chain, const Skinning& skinning,
               const std::vector<LocalFrame>& frames);
std::vector<Vec3> posed_joints(const KinematicChain& chain, const std::vector<LocalFrame>& frames);

}  // namespace msmr::mesh
