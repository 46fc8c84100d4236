#pragma once

#include <utility>
#include <vector>

#include "msmr/mesh/kinematics.hpp"

namespace msmr::scene {

using mesh::Vec3;

struct Capsule {
  Vec3 a, b;
  double radius = 0.0;
  int object = 0;
  int segment = 0;
};

/// Closest distance between segments [p1, q1] and [p2, q2].
double segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2);
double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

/// Capsules overlap when their axes come closer than the sum of radii.
bool capsules_intersect(const Capsule& c1, const Capsule& c2);

struct CapsulePolicy {
  double margin = 0.001;
  double fallback_radius = 0.005;  // bones without skinned vertices
};

/// Joint-to-child segment of a kinematic chain with its fitted radius.
struct Bone {
  int parent = 0;
  int child = 0;
  double radius = 0.0;
};

/// One bone per non-root joint. Each vertex belongs to a bone of its joint
/// (the nearest one when the joint has several children). A bone's radius
/// bounds every vertex of every face touching its vertices, using distances
/// that no joint rotation can change, so the capsules keep enclosing the
/// surface in any pose.
std::vector<Bone> fit_bones(const mesh::Mesh& rest, const mesh::KinematicChain& chain,
                            const mesh::Skinning& skinning, const CapsulePolicy& policy = {});

/// Bone index each vertex was assigned to by fit_bones.
std::vector<int> bone_assignment(const mesh::Mesh& rest, const mesh::KinematicChain& chain,
                                 const mesh::Skinning& skinning, const std::vector<Bone>& bones);

/// Capsules of `bones` placed at the given joint positions.
std::vector<Capsule> place_capsules(const std::vector<Bone>& bones, const std::vector<Vec3>& joints, int object);

/// Capsules for the chain's current angles, radii fitted on `rest`.
std::vector<Capsule> capsules_from_chain(const mesh::Mesh& rest, const mesh::KinematicChain& chain,
                                         const mesh::Skinning& skinning, const CapsulePolicy& policy = {},
                                         int object = 0);

/// Bone pairs of one model that may overlap: pairs sharing a joint and pairs
/// already overlapping in the rest pose.
std::vector<std::pair<int, int>> self_collision_exemptions(const std::vector<Bone>& bones,
                                                           const std::vector<Vec3>& rest_joints);

}  // namespace msmr::scene
