#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "msmr/mesh/asset.hpp"
#include "msmr/scene/capsule.hpp"

namespace msmr::scene {

/// An asset prepared for collision checks: rest frames, fitted bones and the
/// bone pairs allowed to touch.
struct Rig {
  std::string stem;  // asset file stem
  mesh::ArticulatedAsset asset;
  std::vector<mesh::LocalFrame> frames;
  std::vector<Bone> bones;
  std::vector<std::pair<int, int>> exempt;
  std::vector<std::vector<bool>> exempt_matrix;
  /// Palm (root segment) center in asset coordinates.
  Vec3 anchor = Vec3::Zero();
  /// Radius around the anchor enclosing every capsule in every pose of the
  /// articulated joints within the angle limit is not attempted; this bounds
  /// the rest pose only.
  double reach = 0.0;

  static std::shared_ptr<const Rig> create(std::string stem, mesh::ArticulatedAsset asset,
                                           const CapsulePolicy& policy = {});
};

struct SceneObject {
  int id = 0;  // mask label, 1-based
  std::shared_ptr<const Rig> rig;
  std::vector<Vec3> angles;  // per joint
  mesh::RigidTransform pose;
  bool dynamic = true;

  std::vector<Vec3> joints() const;  // world positions
  std::vector<Capsule> capsules() const;
  mesh::Mesh posed_mesh() const;
};

enum class Mode { HandHand, HandObject };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct Camera {
  double focal = 500.0;
  double cx = 112.0;
  double cy = 112.0;
  std::size_t width = 224;
  std::size_t height = 224;
  /// Camera center; the camera looks along +z with image x along +x and
  /// image y along +y (downwards on screen).
  Vec3 position = Vec3(0, 0, -0.9);

  Vec3 to_camera(const Vec3& world) const { return world - position; }
};

struct Scene {
  std::uint64_t seed = 0;
  Mode mode = Mode::HandHand;
  std::vector<SceneObject> objects;
  Camera camera;
  int placement_attempts = 0;
  int articulation_passes = 0;
};

/// No capsule pair from different objects overlaps and no non-exempt pair
/// within one object overlaps.
bool scene_valid(const Scene& scene);
/// Number of offending capsule pairs, for diagnostics.
std::size_t invalid_pairs(const Scene& scene);

struct GenerationConfig {
  Mode mode = Mode::HandHand;
  double shift_step = 0.002;       // meters
  double angle_step_deg = 5.0;
  double angle_limit_deg = 60.0;
  double approach_gap = 0.01;      // initial clearance between bounding spheres
  int max_placement_attempts = 20;
  double camera_distance_min = 0.8;
  double camera_distance_max = 1.0;
  Camera camera;
};

struct SceneAssets {
  std::shared_ptr<const Rig> left_hand;
  std::shared_ptr<const Rig> right_hand;
  std::shared_ptr<const Rig> object;
};

/// Rigs built from the procedural hand template and the capsule object.
SceneAssets builtin_scene_assets();
/// Rigs loaded from hand_left / hand_right / object asset files.
SceneAssets load_scene_assets(const std::filesystem::path& dir);

/// Closed capsule-shaped mesh along +z with a two-joint rigid chain.
mesh::ArticulatedAsset make_capsule_object(double radius = 0.02, double length = 0.08);

/// Places the center model (object 1), brings the right hand (object 2) in
/// from a random direction facing the center until the first collision,
/// backs off one step, then articulates the dynamic models joint by joint
/// until a full pass accepts no move. Throws GenerationFailure when the
/// second hand cannot be placed.
Scene generate_interaction(std::uint64_t seed, const GenerationConfig& config, const SceneAssets& assets);

}  // namespace msmr::scene
