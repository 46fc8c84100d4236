#include "msmr/scene/capsule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msmr/error.hpp"

namespace msmr::scene {

double segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  constexpr double eps = 1e-18;
  double s = 0.0, t = 0.0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2), denom = a * e - b * b;
      s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + d1 * s) - (p2 + d2 * t)).norm();
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (a + t * d - p).norm();
}

bool capsules_intersect(const Capsule& c1, const Capsule& c2) {
  return segment_distance(c1.a, c1.b, c2.a, c2.b) < c1.radius + c2.radius;
}

namespace {

std::vector<Bone> chain_bones(const mesh::KinematicChain& chain) {
  std::vector<Bone> bones;
  const int root = static_cast<int>(chain.root());
  for (std::size_t j = 0; j < chain.size(); ++j)
    if (static_cast<int>(j) != root) bones.push_back({chain.parent[j], static_cast<int>(j), 0.0});
  return bones;
}

}  // namespace

std::vector<int> bone_assignment(const mesh::Mesh& rest, const mesh::KinematicChain& chain,
                                 const mesh::Skinning& skinning, const std::vector<Bone>& bones) {
  std::vector<std::vector<int>> of_joint(chain.size()), into_joint(chain.size());
  for (std::size_t b = 0; b < bones.size(); ++b) {
    of_joint[bones[b].parent].push_back(static_cast<int>(b));
    into_joint[bones[b].child].push_back(static_cast<int>(b));
  }
  std::vector<int> out(rest.vertex_count(), -1);
  for (std::size_t v = 0; v < rest.vertex_count(); ++v) {
    const int j = skinning[v];
    const auto& candidates = of_joint[j].empty() ? into_joint[j] : of_joint[j];
    double best = std::numeric_limits<double>::infinity();
    for (int b : candidates) {
      const double d = point_segment_distance(rest.vertices[v], chain.joints[bones[b].parent], chain.joints[bones[b].child]);
      if (d < best) {
        best = d;
        out[v] = b;
      }
    }
  }
  return out;
}

std::vector<Bone> fit_bones(const mesh::Mesh& rest, const mesh::KinematicChain& chain, const mesh::Skinning& skinning,
                            const CapsulePolicy& policy) {
  chain.validate();
  mesh::validate_skinning(skinning, rest.vertex_count(), chain.size());
  if (policy.fallback_radius <= 0.0 || policy.margin < 0.0) throw ConfigError("capsule radii must be positive");
  std::vector<Bone> bones = chain_bones(chain);
  const std::vector<int> assigned = bone_assignment(rest, chain, skinning, bones);
  const auto vf = rest.vertex_faces();
  const auto& J = chain.joints;
  std::vector<double> reach(bones.size(), -1.0);
  for (std::size_t v = 0; v < rest.vertex_count(); ++v) {
    const int b = assigned[v];
    if (b < 0) continue;
    const int p = bones[b].parent;
    const Vec3 &s0 = J[p], &s1 = J[bones[b].child];
    for (int f : vf[v])
      for (int w : rest.faces[f]) {
        const Vec3& x = rest.vertices[w];
        const int owner = skinning[w];
        double d;
        if (owner != p && owner != static_cast<int>(chain.root()) && chain.parent[owner] == p)
          d = point_segment_distance(J[owner], s0, s1) + (x - J[owner]).norm();
        else if (owner != p && chain.parent[p] == owner && p != static_cast<int>(chain.root()))
          d = (x - s0).norm();
        else
          d = point_segment_distance(x, s0, s1);
        reach[b] = std::max(reach[b], d);
      }
  }
  for (std::size_t b = 0; b < bones.size(); ++b) {
    if ((J[bones[b].parent] - J[bones[b].child]).norm() == 0.0)
      throw GeometryError("bone " + std::to_string(bones[b].parent) + "->" + std::to_string(bones[b].child) +
                          " has zero length");
    bones[b].radius = reach[b] < 0.0 ? policy.fallback_radius : reach[b] + policy.margin;
  }
  return bones;
}

std::vector<Capsule> place_capsules(const std::vector<Bone>& bones, const std::vector<Vec3>& joints, int object) {
  std::vector<Capsule> out;
  out.reserve(bones.size());
  for (std::size_t b = 0; b < bones.size(); ++b)
    out.push_back({joints[bones[b].parent], joints[bones[b].child], bones[b].radius, object, static_cast<int>(b)});
  return out;
}

std::vector<Capsule> capsules_from_chain(const mesh::Mesh& rest, const mesh::KinematicChain& chain,
                                         const mesh::Skinning& skinning, const CapsulePolicy& policy, int object) {
  mesh::KinematicChain neutral = chain;
  neutral.reset_angles();
  const auto bones = fit_bones(rest, neutral, skinning, policy);
  const auto frames = mesh::compute_local_frames(neutral, rest);
  return place_capsules(bones, mesh::posed_joints(chain, frames), object);
}

std::vector<std::pair<int, int>> self_collision_exemptions(const std::vector<Bone>& bones,
                                                           const std::vector<Vec3>& rest_joints) {
  std::vector<std::pair<int, int>> out;
  const auto caps = place_capsules(bones, rest_joints, 0);
  for (std::size_t i = 0; i < bones.size(); ++i)
    for (std::size_t k = i + 1; k < bones.size(); ++k) {
      const Bone &a = bones[i], &b = bones[k];
      const bool shared = a.parent == b.parent || a.parent == b.child || a.child == b.parent || a.child == b.child;
      if (shared || capsules_intersect(caps[i], caps[k])) out.emplace_back(static_cast<int>(i), static_cast<int>(k));
    }
  return out;
}

}  // namespace msmr::scene
