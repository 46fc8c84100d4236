#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "msmr/error.hpp"
#include "msmr/mesh/asset.hpp"
#include "msmr/scene/io.hpp"
#include "msmr/scene/render.hpp"
#include "msmr/scene/scene.hpp"
#include "support/capsule_oracle.hpp"
#include "support/tritri.hpp"

using namespace msmr::scene;
using msmr::mesh::Mesh;

namespace {

const SceneAssets& assets() {
  static const SceneAssets a = builtin_scene_assets();
  return a;
}

SceneObject neutral(int id, const std::shared_ptr<const Rig>& rig, const Vec3& at) {
  SceneObject o;
  o.id = id;
  o.rig = rig;
  o.angles.assign(rig->asset.chain.size(), Vec3::Zero());
  o.pose = msmr::mesh::RigidTransform::from(Eigen::Matrix3d::Identity(), at - rig->anchor);
  return o;
}

Mesh triangle_mesh(const Vec3& a, const Vec3& b, const Vec3& c) {
  Mesh m;
  m.vertices = {a, b, c};
  m.faces = {{0, 1, 2}};
  return m;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("msmr_scene_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("capsule distance and intersection") {
  const Capsule p1{Vec3(0, 0, 0), Vec3(0, 0, 5), 1.0};
  const Capsule p2{Vec3(3, 0, 0), Vec3(3, 0, 5), 1.0};
  CHECK(segment_distance(p1.a, p1.b, p2.a, p2.b) == doctest::Approx(3.0));
  CHECK_FALSE(capsules_intersect(p1, p2));
  const Capsule coaxial{Vec3(0, 0, 2), Vec3(0, 0, 8), 0.5};
  CHECK(capsules_intersect(p1, coaxial));
  // end caps touch only through the hemispheres
  const Capsule cap{Vec3(0, 0, 6.5), Vec3(0, 0, 9), 1.0};
  CHECK(capsules_intersect(p1, cap));
  CHECK_FALSE(capsules_intersect(p1, Capsule{Vec3(0, 0, 7.01), Vec3(0, 0, 9), 1.0}));
  CHECK(point_segment_distance(Vec3(2, 0, -1), p1.a, p1.b) == doctest::Approx(std::sqrt(5.0)));
  // crossing skew segments
  CHECK(segment_distance(Vec3(-1, 0, 0), Vec3(1, 0, 0), Vec3(0, -1, 2), Vec3(0, 1, 2)) == doctest::Approx(2.0));
  // parallel, overlapping in projection
  CHECK(segment_distance(Vec3(0, 0, 0), Vec3(4, 0, 0), Vec3(1, 1, 0), Vec3(2, 1, 0)) == doctest::Approx(1.0));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a1(u(gen), u(gen), u(gen)), b1(u(gen), u(gen), u(gen)), a2(u(gen), u(gen), u(gen)),
        b2(u(gen), u(gen), u(gen));
    CHECK(segment_distance(a1, b1, a2, b2) == doctest::Approx(oracle::segment_distance_search(a1, b1, a2, b2)).epsilon(1e-9));
  }
}

TEST_CASE("capsule test agrees with surface sampling") {
  std::mt19937_64 gen(5), sampler(6);
  std::uniform_real_distribution<double> pos(-1.5, 1.5), rad(0.1, 0.6);
  int compared = 0, disagree = 0;
  for (int i = 0; i < 200; ++i) {
    const Capsule c1{Vec3(pos(gen), pos(gen), pos(gen)), Vec3(pos(gen), pos(gen), pos(gen)), rad(gen)};
    const Capsule c2{Vec3(pos(gen), pos(gen), pos(gen)), Vec3(pos(gen), pos(gen), pos(gen)), rad(gen)};
    const double d = oracle::segment_distance_search(c1.a, c1.b, c2.a, c2.b);
    if (std::abs(d - (c1.radius + c2.radius)) < 1e-3) continue;
    ++compared;
    if (capsules_intersect(c1, c2) != oracle::capsules_overlap_sampled(c1.a, c1.b, c1.radius, c2.a, c2.b, c2.radius, sampler))
      ++disagree;
  }
  CHECK(compared > 190);
  CHECK(disagree == 0);
}

TEST_CASE("capsules fitted to a tube and to the hand") {
  const auto obj = make_capsule_object(0.02, 0.08);
  const auto bones = fit_bones(obj.mesh, obj.chain, obj.skinning);
  REQUIRE(bones.size() == 1);
  CHECK(bones[0].parent == 0);
  CHECK(bones[0].child == 1);
  CHECK(bones[0].radius == doctest::Approx(0.021).epsilon(1e-9));
  const auto caps = capsules_from_chain(obj.mesh, obj.chain, obj.skinning);
  CHECK((caps[0].a - obj.chain.joints[0]).norm() < 1e-15);
  CHECK((caps[0].b - obj.chain.joints[1]).norm() < 1e-15);

  const auto& rig = *assets().right_hand;
  CHECK(rig.bones.size() == 20);
  const auto assign = bone_assignment(rig.asset.mesh, rig.asset.chain, rig.asset.skinning, rig.bones);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ang(-M_PI / 3, M_PI / 3);
  for (int trial = 0; trial < 20; ++trial) {
    SceneObject o = neutral(1, assets().right_hand, Vec3::Zero());
    if (trial > 0)
      for (Vec3& a : o.angles) a = Vec3(ang(gen), ang(gen), ang(gen));
    const Mesh posed = o.posed_mesh();
    const auto c = o.capsules();
    std::size_t outside = 0;
    for (std::size_t v = 0; v < posed.vertex_count(); ++v) {
      const Capsule& k = c[assign[v]];
      if (oracle::dist_to_segment(posed.vertices[v], k.a, k.b) > k.radius) ++outside;
    }
    CHECK(outside == 0);
  }

  // a bone with no skinned vertices falls back to the policy radius
  auto bare = obj;
  bare.chain.joints.push_back(Vec3(0, 0, 0.1));
  bare.chain.parent.push_back(1);
  bare.chain.next.push_back(-1);
  bare.chain.flexion_vertex.push_back(1);
  bare.chain.angles.push_back(Vec3::Zero());
  CapsulePolicy policy;
  policy.fallback_radius = 0.0042;
  const auto b2 = fit_bones(bare.mesh, bare.chain, bare.skinning, policy);
  REQUIRE(b2.size() == 2);
  CHECK(b2[1].radius == doctest::Approx(0.0042));
}

TEST_CASE("scene validity") {
  Scene far;
  far.objects = {neutral(1, assets().left_hand, Vec3(-0.5, 0, 0)), neutral(2, assets().right_hand, Vec3(0.5, 0, 0))};
  CHECK(scene_valid(far));
  CHECK(invalid_pairs(far) == 0);

  Scene same;
  same.objects = {neutral(1, assets().left_hand, Vec3::Zero()), neutral(2, assets().right_hand, Vec3::Zero())};
  CHECK_FALSE(scene_valid(same));
  CHECK(invalid_pairs(same) > 0);

  // parent-child bones share a joint and always touch there
  const auto& rig = *assets().right_hand;
  for (std::size_t i = 0; i < rig.bones.size(); ++i)
    for (std::size_t k = 0; k < rig.bones.size(); ++k)
      if (rig.bones[i].child == rig.bones[k].parent) CHECK(rig.exempt_matrix[i][k]);
  Scene bent;
  bent.objects = {neutral(1, assets().right_hand, Vec3::Zero())};
  bent.objects[0].angles[10] = Vec3(0, M_PI / 6, 0);  // middle finger PIP, flexion about y
  const auto caps = bent.objects[0].capsules();
  bool touching = false;
  for (std::size_t i = 0; i < caps.size(); ++i)
    for (std::size_t k = 0; k < caps.size(); ++k)
      if (rig.bones[i].child == rig.bones[k].parent && capsules_intersect(caps[i], caps[k])) touching = true;
  CHECK(touching);
  CHECK(scene_valid(bent));
}

TEST_CASE("interaction generation") {
  GenerationConfig cfg;
  for (std::uint64_t seed : {0u, 1u, 2u, 3u, 4u}) {
    const Scene s = generate_interaction(seed, cfg, assets());
    REQUIRE(s.objects.size() == 2);
    CHECK(s.objects[0].rig->stem == "hand_left");
    CHECK(s.objects[1].rig->stem == "hand_right");
    CHECK(scene_valid(s));
    CHECK_FALSE(oracle::meshes_intersect(s.objects[0].posed_mesh(), s.objects[1].posed_mesh()));
    for (const auto& o : s.objects)
      for (const Vec3& a : o.angles) CHECK(a.cwiseAbs().maxCoeff() <= M_PI / 3 + 1e-12);
    CHECK(to_json(generate_interaction(seed, cfg, assets())).dump() == to_json(s).dump());
    // the approach stopped one step short of contact
    Scene closer = s;
    for (auto& o : closer.objects) std::fill(o.angles.begin(), o.angles.end(), Vec3::Zero());
    CHECK(scene_valid(closer));
  }
  CHECK(to_json(generate_interaction(0, cfg, assets())).dump() != to_json(generate_interaction(1, cfg, assets())).dump());

  GenerationConfig still = cfg;
  still.angle_limit_deg = 0.0;
  still.shift_step = 0.05;
  const Scene s = generate_interaction(9, still, assets());
  CHECK(s.articulation_passes == 1);
  for (const auto& o : s.objects)
    for (const Vec3& a : o.angles) CHECK(a == Vec3::Zero());
  CHECK(scene_valid(s));
  Scene nudged = s;
  nudged.objects[1].pose.translation -= 0.05 * (s.objects[1].pose.apply(s.objects[1].rig->anchor)).normalized();
  CHECK_FALSE(scene_valid(nudged));

  GenerationConfig object_mode = cfg;
  object_mode.mode = Mode::HandObject;
  const Scene ho = generate_interaction(4, object_mode, assets());
  CHECK(ho.objects[0].rig->stem == "object");
  CHECK_FALSE(ho.objects[0].dynamic);
  CHECK(scene_valid(ho));

  GenerationConfig bad = cfg;
  bad.shift_step = 0.0;
  CHECK_THROWS_AS(generate_interaction(0, bad, assets()), msmr::ConfigError);
  GenerationConfig cramped = cfg;
  cramped.max_placement_attempts = 0;
  try {
    generate_interaction(42, cramped, assets());
    FAIL("expected failure");
  } catch (const msmr::GenerationFailure& e) {
    CHECK(e.seed() == 42);
  }
  CHECK_THROWS_AS(parse_mode("hands"), msmr::ConfigError);
}

TEST_CASE("mask rasterization") {
  Camera cam;
  cam.position = Vec3(0, 0, -1);
  // covers the image center: projected corners (12, 12), (412, 112), (112, 412)
  const Mesh tri = triangle_mesh(Vec3(-0.2, -0.2, 0), Vec3(0.6, 0, 0), Vec3(0, 0.6, 0));
  Render r = rasterize({tri}, {3}, cam);
  CHECK(r.scene.at(112, 112) == 3);
  CHECK(r.scene.at(0, 0) == 0);
  CHECK(r.scene.at(223, 0) == 0);
  for (std::uint8_t v : r.scene.labels) CHECK((v == 0 || v == 3));
  CHECK(r.scene.labels == r.only[0].labels);
  CHECK(r.depth[112 * 224 + 112] == doctest::Approx(1.0));
  CHECK(r.warnings.empty());

  // pixel-center rule: a square covering pixels 100..109 exactly
  Camera unit;
  unit.focal = 1.0;
  unit.cx = unit.cy = 0.0;
  unit.position = Vec3(0, 0, -1);
  Mesh square;
  square.vertices = {Vec3(100, 100, 0), Vec3(110, 100, 0), Vec3(110, 110, 0), Vec3(100, 110, 0)};
  square.faces = {{0, 1, 2}, {0, 2, 3}};
  CHECK(rasterize({square}, {1}, unit).scene.count(1) == 100);

  const Mesh near = triangle_mesh(Vec3(-0.1, -0.1, 0), Vec3(0.1, -0.1, 0), Vec3(0, 0.1, 0));
  const Mesh back = triangle_mesh(Vec3(-0.3, -0.3, 0.5), Vec3(0.3, -0.3, 0.5), Vec3(0, 0.3, 0.5));
  for (bool near_first : {true, false}) {
    const Render two = near_first ? rasterize({near, back}, {1, 2}, cam) : rasterize({back, near}, {2, 1}, cam);
    const auto& m = two.scene;
    std::size_t overlap = 0;
    const auto& near_only = two.only[near_first ? 0 : 1];
    const auto& back_only = two.only[near_first ? 1 : 0];
    for (std::size_t i = 0; i < m.labels.size(); ++i)
      if (near_only.labels[i] == 1 && back_only.labels[i] == 2) {
        ++overlap;
        CHECK(m.labels[i] == 1);
      }
    CHECK(overlap > 100);
    CHECK(m.count(2) < back_only.count(2));
  }

  const Mesh behind = triangle_mesh(Vec3(0, 0, -2), Vec3(1, 0, -2), Vec3(0, 1, -2));
  const Render hidden = rasterize({tri, behind}, {1, 2}, cam);
  CHECK(hidden.only[1].count(2) == 0);
  REQUIRE(hidden.warnings.size() == 1);
  CHECK(hidden.warnings[0].find("object 2") != std::string::npos);
  CHECK_THROWS_AS(rasterize({tri}, {0}, cam), msmr::ConfigError);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Render sr = rasterize(generate_interaction(seed, GenerationConfig{}, assets()));
    for (std::size_t o = 0; o < 2; ++o) {
      const auto id = static_cast<std::uint8_t>(o + 1);
      CHECK(sr.only[o].count(id) > 0);
      for (std::size_t i = 0; i < sr.scene.labels.size(); ++i)
        if (sr.scene.labels[i] == id) CHECK(sr.only[o].labels[i] == id);
    }
  }
}

TEST_CASE("scene files") {
  const auto dir = scratch_dir("files");
  const Scene s = generate_interaction(7, GenerationConfig{}, assets());
  const Render r = rasterize(s);
  write_scene_files(dir, s, r);
  for (const char* f : {"scene.json", "object_1.obj", "object_2.obj", "mask_scene.pgm", "mask_only_1.pgm",
                        "mask_only_2.pgm", "image.ppm"})
    CHECK(std::filesystem::exists(dir / f));
  const Scene back = load_scene(dir, assets());
  CHECK(to_json(back).dump() == to_json(s).dump());
  const Mesh m = back.objects[1].posed_mesh(), orig = s.objects[1].posed_mesh();
  for (std::size_t v = 0; v < m.vertex_count(); ++v) CHECK((m.vertices[v] - orig.vertices[v]).norm() < 1e-12);

  const MaskImage mask = read_pgm(dir / "mask_scene.pgm");
  CHECK(mask.width == 224);
  CHECK(mask.labels == r.scene.labels);
  const auto img = read_ppm(dir / "image.ppm");
  REQUIRE(img.size() == r.image.size());
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::abs(img[i] - r.image[i]) <= 0.5 / 255 + 1e-12);

  CHECK_THROWS_AS(read_pgm(dir / "image.ppm"), msmr::IoError);
  CHECK_THROWS_AS(load_scene(dir / "missing", assets()), msmr::IoError);
  std::filesystem::remove_all(dir);
}
