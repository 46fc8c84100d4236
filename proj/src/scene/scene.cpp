#include "msmr/scene/scene.hpp"

#include <algorithm>
#include <cmath>

#include "msmr/error.hpp"
#include "msmr/numeric/rng.hpp"

namespace msmr::scene {

using mesh::RigidTransform;

std::shared_ptr<const Rig> Rig::create(std::string stem, mesh::ArticulatedAsset asset, const CapsulePolicy& policy) {
  auto rig = std::make_shared<Rig>();
  rig->stem = std::move(stem);
  asset.chain.reset_angles();
  asset.validate();
  rig->frames = mesh::compute_local_frames(asset.chain, asset.mesh);
  rig->bones = fit_bones(asset.mesh, asset.chain, asset.skinning, policy);
  rig->exempt = self_collision_exemptions(rig->bones, asset.chain.joints);
  rig->exempt_matrix.assign(rig->bones.size(), std::vector<bool>(rig->bones.size(), false));
  for (auto [a, b] : rig->exempt) rig->exempt_matrix[a][b] = rig->exempt_matrix[b][a] = true;

  const int root = static_cast<int>(asset.chain.root());
  std::size_t count = 0;
  for (std::size_t v = 0; v < asset.mesh.vertex_count(); ++v)
    if (asset.skinning[v] == root) {
      rig->anchor += asset.mesh.vertices[v];
      ++count;
    }
  rig->anchor = count ? Vec3(rig->anchor / static_cast<double>(count)) : asset.mesh.centroid();
  for (const Capsule& c : place_capsules(rig->bones, asset.chain.joints, 0))
    rig->reach = std::max({rig->reach, (c.a - rig->anchor).norm() + c.radius, (c.b - rig->anchor).norm() + c.radius});
  rig->asset = std::move(asset);
  return rig;
}

std::vector<Vec3> SceneObject::joints() const {
  mesh::KinematicChain chain = rig->asset.chain;
  chain.angles = angles;
  std::vector<Vec3> j = mesh::posed_joints(chain, rig->frames);
  for (Vec3& p : j) p = pose.apply(p);
  return j;
}

std::vector<Capsule> SceneObject::capsules() const { return place_capsules(rig->bones, joints(), id); }

mesh::Mesh SceneObject::posed_mesh() const {
  mesh::KinematicChain chain = rig->asset.chain;
  chain.angles = angles;
  mesh::Mesh m = mesh::pose_mesh(rig->asset.mesh, chain, rig->asset.skinning, rig->frames);
  for (Vec3& v : m.vertices) v = pose.apply(v);
  return m;
}

std::string to_string(Mode m) { return m == Mode::HandHand ? "hand-hand" : "hand-object"; }

Mode parse_mode(const std::string& s) {
  if (s == "hand-hand") return Mode::HandHand;
  if (s == "hand-object") return Mode::HandObject;
  throw ConfigError("unknown scene mode '" + s + "' (expected hand-hand or hand-object)");
}

namespace {

std::size_t count_invalid(const std::vector<std::vector<Capsule>>& caps, const std::vector<const Rig*>& rigs,
                          bool stop_at_first) {
  std::size_t bad = 0;
  for (std::size_t o = 0; o < caps.size(); ++o) {
    const auto& mine = caps[o];
    for (std::size_t i = 0; i < mine.size(); ++i)
      for (std::size_t k = i + 1; k < mine.size(); ++k)
        if (!rigs[o]->exempt_matrix[i][k] && capsules_intersect(mine[i], mine[k])) {
          if (stop_at_first) return 1;
          ++bad;
        }
    for (std::size_t p = o + 1; p < caps.size(); ++p)
      for (const Capsule& a : mine)
        for (const Capsule& b : caps[p])
          if (capsules_intersect(a, b)) {
            if (stop_at_first) return 1;
            ++bad;
          }
  }
  return bad;
}

std::size_t check(const Scene& scene, bool stop_at_first) {
  std::vector<std::vector<Capsule>> caps;
  std::vector<const Rig*> rigs;
  for (const SceneObject& o : scene.objects) {
    caps.push_back(o.capsules());
    rigs.push_back(o.rig.get());
  }
  return count_invalid(caps, rigs, stop_at_first);
}

Eigen::Matrix3d random_rotation(numeric::Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized().toRotationMatrix();
}

Vec3 random_direction(numeric::Rng& rng) {
  Vec3 d;
  do d = Vec3(rng.normal(), rng.normal(), rng.normal());
  while (d.norm() < 1e-9);
  return d.normalized();
}

SceneObject make_object(int id, std::shared_ptr<const Rig> rig, bool dynamic) {
  SceneObject o;
  o.id = id;
  o.angles.assign(rig->asset.chain.size(), Vec3::Zero());
  o.rig = std::move(rig);
  o.dynamic = dynamic;
  return o;
}

}  // namespace

bool scene_valid(const Scene& scene) { return check(scene, true) == 0; }
std::size_t invalid_pairs(const Scene& scene) { return check(scene, false); }

Scene generate_interaction(std::uint64_t seed, const GenerationConfig& config, const SceneAssets& assets) {
  if (config.shift_step <= 0.0 || config.angle_step_deg <= 0.0 || config.angle_limit_deg < 0.0)
    throw ConfigError("generation steps must be positive and the angle limit non-negative");
  if (!assets.right_hand || !(config.mode == Mode::HandHand ? assets.left_hand : assets.object))
    throw ConfigError("scene assets missing for mode " + to_string(config.mode));
  numeric::Rng rng = numeric::Rng(seed).derive("generation");

  Scene scene;
  scene.seed = seed;
  scene.mode = config.mode;
  scene.camera = config.camera;
  scene.camera.position = Vec3(0, 0, -rng.uniform(config.camera_distance_min, config.camera_distance_max));

  // (1) center model at a random rotation, anchor at the origin
  const bool hands = config.mode == Mode::HandHand;
  SceneObject center = make_object(1, hands ? assets.left_hand : assets.object, hands);
  const Eigen::Matrix3d rc = random_rotation(rng);
  center.pose = RigidTransform::from(rc, -rc * center.rig->anchor);

  // (2) right hand in neutral pose, palm normal aimed at the center, outside
  // the bounding spheres
  SceneObject mover = make_object(2, assets.right_hand, true);
  const Vec3 palm_normal = mover.rig->frames[mover.rig->asset.chain.root()].y;
  const double start = center.rig->reach + mover.rig->reach + config.approach_gap;
  Vec3 dir;
  for (;;) {
    if (scene.placement_attempts++ >= config.max_placement_attempts)
      throw GenerationFailure(seed, "cannot place the second hand without intersection");
    dir = random_direction(rng);
    const Eigen::Matrix3d aim = Eigen::Quaterniond::FromTwoVectors(palm_normal, -dir).toRotationMatrix();
    const Eigen::Matrix3d roll = Eigen::AngleAxisd(rng.uniform(0.0, 2.0 * M_PI), dir).toRotationMatrix();
    const Eigen::Matrix3d r = roll * aim;
    mover.pose = RigidTransform::from(r, start * dir - r * mover.rig->anchor);
    scene.objects = {center, mover};
    if (scene_valid(scene)) break;
  }

  // (3) approach until the first collision, then back off one step
  const int max_steps = static_cast<int>(std::ceil(start / config.shift_step)) + 1;
  for (int step = 0;; ++step) {
    if (step > max_steps) throw GenerationFailure(seed, "approach never collided");
    SceneObject& m = scene.objects[1];
    const Vec3 previous = m.pose.translation;
    m.pose.translation -= config.shift_step * dir;
    if (!scene_valid(scene)) {
      m.pose.translation = previous;
      break;
    }
  }

  // (4, 5) joint moves in a fixed random direction per axis until collision
  // or the angle limit; repeat until a full pass accepts nothing
  const double step = config.angle_step_deg * M_PI / 180.0;
  const double limit = config.angle_limit_deg * M_PI / 180.0;
  std::vector<std::vector<Vec3>> sign(scene.objects.size());
  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    sign[o].resize(scene.objects[o].angles.size());
    for (Vec3& s : sign[o]) s = Vec3(rng.coin() ? 1 : -1, rng.coin() ? 1 : -1, rng.coin() ? 1 : -1);
  }
  for (bool moved = true; moved;) {
    moved = false;
    ++scene.articulation_passes;
    for (std::size_t o = 0; o < scene.objects.size(); ++o) {
      SceneObject& obj = scene.objects[o];
      if (!obj.dynamic) continue;
      std::vector<int> joints = obj.rig->asset.chain.articulated_joints();
      for (std::size_t i = joints.size(); i > 1; --i) std::swap(joints[i - 1], joints[rng.index(i)]);
      for (int j : joints) {
        int axes[3] = {0, 1, 2};
        for (int i = 2; i > 0; --i) std::swap(axes[i], axes[rng.index(static_cast<std::uint64_t>(i) + 1)]);
        for (int axis : axes)
          for (;;) {
            double& angle = obj.angles[j][axis];
            const double next = std::clamp(angle + sign[o][j][axis] * step, -limit, limit);
            if (next == angle) break;
            const double previous = angle;
            angle = next;
            if (!scene_valid(scene)) {
              angle = previous;
              break;
            }
            moved = true;
          }
      }
    }
  }
  return scene;
}

mesh::ArticulatedAsset make_capsule_object(double radius, double length) {
  if (radius <= 0.0 || length <= 0.0) throw ConfigError("capsule object needs positive size");
  constexpr int kSegments = 12, kCapRings = 3;
  // profile from the bottom pole to the top pole
  std::vector<std::pair<double, double>> profile;  // (ring radius, z)
  for (int i = 1; i <= kCapRings; ++i) {
    const double t = M_PI / 2.0 * i / kCapRings;
    profile.emplace_back(radius * std::sin(t), -length / 2.0 - radius * std::cos(t));
  }
  for (int i = kCapRings - 1; i >= 1; --i) {
    const double t = M_PI / 2.0 * i / kCapRings;
    profile.emplace_back(radius * std::sin(t), length / 2.0 + radius * std::cos(t));
  }
  profile.insert(profile.begin() + kCapRings, {radius, length / 2.0});
  mesh::Mesh m;
  m.vertices.emplace_back(0, 0, -length / 2.0 - radius);
  for (const auto& [r, z] : profile)
    for (int k = 0; k < kSegments; ++k) {
      const double a = 2.0 * M_PI * k / kSegments;
      m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
  m.vertices.emplace_back(0, 0, length / 2.0 + radius);
  const int rings = static_cast<int>(profile.size());
  const int top = static_cast<int>(m.vertices.size()) - 1;
  auto at = [&](int ring, int k) { return 1 + ring * kSegments + (k % kSegments); };
  for (int k = 0; k < kSegments; ++k) {
    m.faces.push_back({0, at(0, k + 1), at(0, k)});
    for (int r = 0; r + 1 < rings; ++r) {
      m.faces.push_back({at(r, k), at(r, k + 1), at(r + 1, k + 1)});
      m.faces.push_back({at(r, k), at(r + 1, k + 1), at(r + 1, k)});
    }
    m.faces.push_back({top, at(rings - 1, k), at(rings - 1, k + 1)});
  }

  mesh::ArticulatedAsset asset;
  asset.name = "capsule";
  asset.mesh = std::move(m);
  asset.joint_names = {"base", "end"};
  asset.center_joint = 0;
  asset.chain.joints = {Vec3(0, 0, -length / 2.0), Vec3(0, 0, length / 2.0)};
  asset.chain.parent = {0, 0};
  asset.chain.next = {1, -1};
  asset.chain.flexion_vertex = {1, 1};
  asset.chain.angles.assign(2, Vec3::Zero());
  asset.skinning.assign(asset.mesh.vertex_count(), 0);
  asset.regressor.weights =
      numeric::CsrMatrix(2, asset.mesh.vertex_count(), {{0, 0, 1.0}, {1, static_cast<std::size_t>(top), 1.0}});
  return asset;
}

SceneAssets builtin_scene_assets() {
  const auto right = mesh::make_hand_template();
  return {Rig::create("hand_left", right.mirrored()), Rig::create("hand_right", right),
          Rig::create("object", make_capsule_object())};
}

SceneAssets load_scene_assets(const std::filesystem::path& dir) {
  return {Rig::create("hand_left", mesh::load_asset(dir, "hand_left")),
          Rig::create("hand_right", mesh::load_asset(dir, "hand_right")),
          Rig::create("object", mesh::load_asset(dir, "object"))};
}

}  // namespace msmr::scene
