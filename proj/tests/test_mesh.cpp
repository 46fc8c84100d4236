#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "msmr/error.hpp"
#include "msmr/mesh/asset.hpp"
#include "support/tritri.hpp"

using namespace msmr::mesh;

namespace {

Mesh tetra() {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return m;
}

// Straight chain along +z with one vertex per joint offset along +x.
struct Rod {
  Mesh mesh;
  KinematicChain chain;
  Skinning skin;
};

Rod rod(int joints) {
  Rod r;
  for (int j = 0; j < joints; ++j) {
    r.chain.joints.emplace_back(0, 0, j);
    r.chain.parent.push_back(j == 0 ? 0 : j - 1);
    r.chain.next.push_back(j + 1 < joints ? j + 1 : -1);
    r.mesh.vertices.emplace_back(1, 0, j + 0.5);
    r.chain.flexion_vertex.push_back(j);
    r.skin.push_back(j);
  }
  r.chain.angles.assign(joints, Vec3::Zero());
  return r;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(gen), n(gen), n(gen), n(gen));
  return q.normalized().toRotationMatrix();
}

}  // namespace

TEST_CASE("mesh basics") {
  Mesh m = tetra();
  CHECK_NOTHROW(m.validate());
  CHECK(m.is_closed());
  CHECK(m.is_consistently_oriented());
  CHECK(m.signed_volume() == doctest::Approx(1.0 / 6.0));
  CHECK(m.edges().size() == 6);
  CHECK(m.mirrored_x().signed_volume() == doctest::Approx(1.0 / 6.0));
  CHECK(m.mirrored_x().is_consistently_oriented());

  Mesh bad = m;
  bad.faces.push_back({0, 0, 1});
  CHECK_THROWS_AS(bad.validate(), msmr::GeometryError);
  bad = m;
  bad.faces.push_back({0, 1, 9});
  CHECK_THROWS_AS(bad.validate(), msmr::GeometryError);
  bad = m;
  bad.vertices.emplace_back(0, -1, 0);
  bad.faces.push_back({0, 1, 4});  // third face on edge 0-1
  CHECK_THROWS_AS(bad.validate(), msmr::GeometryError);
}

TEST_CASE("obj round trip") {
  const auto path = std::filesystem::temp_directory_path() / "msmr_tetra.obj";
  Mesh m = tetra();
  m.vertices[3] = Vec3(0.1, 1.0 / 3.0, std::sqrt(2.0));
  write_obj(path, m);
  Mesh back = read_obj(path);
  CHECK(back.faces == m.faces);
  for (std::size_t i = 0; i < m.vertex_count(); ++i) CHECK(back.vertices[i] == m.vertices[i]);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_obj(path), msmr::IoError);
}

TEST_CASE("local frames") {
  SUBCASE("axis aligned") {
    KinematicChain c;
    c.joints = {Vec3(0, 0, 0), Vec3(0, 0, 1)};
    c.parent = {0, 0};
    c.next = {1, -1};
    c.flexion_vertex = {0, 0};
    c.angles.assign(2, Vec3::Zero());
    Mesh m;
    m.vertices = {Vec3(1, 0, 0.5)};
    auto frames = compute_local_frames(c, m);
    CHECK((frames[0].z - Vec3(0, 0, 1)).norm() < 1e-15);
    CHECK((frames[0].x - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((frames[0].y - Vec3(0, 1, 0)).norm() < 1e-15);
  }
  SUBCASE("degenerate flexion vertex names the joint") {
    Rod r = rod(3);
    r.mesh.vertices[1] = Vec3(0, 0, 2);
    try {
      compute_local_frames(r.chain, r.mesh);
      FAIL("expected a GeometryError");
    } catch (const msmr::GeometryError& e) {
      CHECK(std::string(e.what()).find("joint 1") != std::string::npos);
    }
  }
  SUBCASE("template frames orthonormal and rigid-invariant") {
    ArticulatedAsset hand = make_hand_template();
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial) {
      auto frames = compute_local_frames(hand.chain, hand.mesh);
      for (const auto& f : frames) {
        CHECK(std::abs(f.x.dot(f.z)) < 1e-9);
        CHECK(std::abs(f.x.dot(f.y)) < 1e-9);
        CHECK((f.x.cross(f.y) - f.z).norm() < 1e-9);
        CHECK(std::abs(f.x.norm() - 1.0) < 1e-9);
        CHECK(std::abs(f.y.norm() - 1.0) < 1e-9);
        CHECK(std::abs(f.z.norm() - 1.0) < 1e-9);
      }
      const Eigen::Matrix3d r = random_rotation(gen);
      const Vec3 t(std::uniform_real_distribution<double>(-1, 1)(gen), 0.3, -0.2);
      ArticulatedAsset moved = hand;
      for (Vec3& v : moved.mesh.vertices) v = r * v + t;
      for (Vec3& j : moved.chain.joints) j = r * j + t;
      auto mf = compute_local_frames(moved.chain, moved.mesh);
      double worst = 0.0;
      for (std::size_t j = 0; j < frames.size(); ++j) {
        worst = std::max(worst, (mf[j].origin - (r * frames[j].origin + t)).norm());
        worst = std::max(worst, (mf[j].x - r * frames[j].x).norm());
        worst = std::max(worst, (mf[j].y - r * frames[j].y).norm());
        worst = std::max(worst, (mf[j].z - r * frames[j].z).norm());
      }
      CHECK(worst < 1e-9);
      hand = moved;
    }
  }
}

TEST_CASE("pose mesh") {
  ArticulatedAsset hand = make_hand_template();
  SUBCASE("zero pose is bit exact") {
    Mesh posed = pose_mesh(hand.mesh, hand.chain, hand.skinning);
    for (std::size_t i = 0; i < posed.vertex_count(); ++i) CHECK(posed.vertices[i] == hand.mesh.vertices[i]);
  }
  SUBCASE("terminal joint moves only its segment rigidly") {
    const int dip = 7;  // index DIP: its child is the tip, which owns nothing
    hand.chain.angles[dip] = Vec3(0.4, -0.2, 0.1);
    Mesh posed = pose_mesh(hand.mesh, hand.chain, hand.skinning);
    const Vec3 origin = hand.chain.joints[dip];
    int moved = 0;
    for (std::size_t i = 0; i < posed.vertex_count(); ++i) {
      if (hand.skinning[i] != dip) {
        CHECK(posed.vertices[i] == hand.mesh.vertices[i]);
        continue;
      }
      ++moved;
      CHECK(std::abs((posed.vertices[i] - origin).norm() - (hand.mesh.vertices[i] - origin).norm()) < 1e-9);
    }
    CHECK(moved > 0);
  }
  SUBCASE("segments stay rigid under a full random pose") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> a(-1.0, 1.0);
    for (int j : hand.chain.articulated_joints()) hand.chain.angles[j] = Vec3(a(gen), a(gen), a(gen));
    Mesh posed = pose_mesh(hand.mesh, hand.chain, hand.skinning);
    double worst = 0.0;
    for (std::size_t i = 0; i < posed.vertex_count(); ++i)
      for (std::size_t k = i + 1; k < posed.vertex_count(); ++k)
        if (hand.skinning[i] == hand.skinning[k])
          worst = std::max(worst, std::abs((posed.vertices[i] - posed.vertices[k]).norm() -
                                           (hand.mesh.vertices[i] - hand.mesh.vertices[k]).norm()));
    CHECK(worst < 1e-9);
  }
  SUBCASE("two 30 degree flexions equal one of 60") {
    Rod r = rod(2);
    const double deg = M_PI / 180.0;
    r.chain.angles[0] = Vec3(30 * deg, 0, 0);
    Mesh once = pose_mesh(r.mesh, r.chain, r.skin);
    Rod r2 = r;
    r2.mesh = once;
    r2.chain.joints = posed_joints(r.chain, compute_local_frames(r.chain, r.mesh));
    Mesh twice = pose_mesh(r2.mesh, r2.chain, r2.skin);
    r.chain.angles[0] = Vec3(60 * deg, 0, 0);
    Mesh direct = pose_mesh(r.mesh, r.chain, r.skin);
    for (std::size_t i = 0; i < direct.vertex_count(); ++i)
      CHECK((twice.vertices[i] - direct.vertices[i]).norm() < 1e-9);
  }
  SUBCASE("unassigned vertex is a skinning error") {
    Skinning bad = hand.skinning;
    bad[17] = -1;
    CHECK_THROWS_AS(pose_mesh(hand.mesh, hand.chain, bad), msmr::GeometryError);
  }
  SUBCASE("clamp never wraps") {
    hand.chain.angles[5] = Vec3(3.0, -3.0, 0.5);
    hand.chain.clamp_angles(1.0);
    CHECK(hand.chain.angles[5] == Vec3(1.0, -1.0, 0.5));
  }
}

TEST_CASE("joint regression") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> verts(12);
  for (auto& v : verts) v = Vec3(u(gen), u(gen), u(gen));

  SUBCASE("one hot rows select vertices") {
    JointRegressor reg{msmr::numeric::CsrMatrix(3, 12, {{0, 4, 1.0}, {1, 0, 1.0}, {2, 11, 1.0}})};
    auto j = regress_joints(verts, reg);
    CHECK(j[0] == verts[4]);
    CHECK(j[1] == verts[0]);
    CHECK(j[2] == verts[11]);
  }
  SUBCASE("uniform row is the centroid") {
    std::vector<msmr::numeric::Triplet> t;
    Vec3 c = Vec3::Zero();
    for (std::size_t i = 0; i < 12; ++i) {
      t.push_back({0, i, 1.0 / 12.0});
      c += verts[i] / 12.0;
    }
    JointRegressor reg{msmr::numeric::CsrMatrix(1, 12, t)};
    CHECK((regress_joints(verts, reg)[0] - c).norm() < 1e-12);
  }
  SUBCASE("translation equivariance") {
    ArticulatedAsset hand = make_hand_template();
    const auto base = regress_joints(hand.mesh, hand.regressor);
    for (int trial = 0; trial < 10; ++trial) {
      const Vec3 t(u(gen), u(gen), u(gen));
      Mesh moved = hand.mesh;
      for (auto& v : moved.vertices) v += t;
      const auto j = regress_joints(moved, hand.regressor);
      for (std::size_t k = 0; k < j.size(); ++k) CHECK((j[k] - base[k] - t).norm() < 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    JointRegressor reg{msmr::numeric::CsrMatrix(1, 5, {{0, 0, 1.0}})};
    CHECK_THROWS_AS(regress_joints(verts, reg), msmr::ShapeError);
  }
  SUBCASE("invalid rows") {
    JointRegressor neg{msmr::numeric::CsrMatrix(1, 2, {{0, 0, 1.5}, {0, 1, -0.5}})};
    CHECK_THROWS_AS(neg.validate(), msmr::GeometryError);
    JointRegressor sum{msmr::numeric::CsrMatrix(1, 2, {{0, 0, 0.5}, {0, 1, 0.4}})};
    CHECK_THROWS_AS(sum.validate(), msmr::GeometryError);
  }
}

TEST_CASE("root centering") {
  std::vector<Vec3> v{Vec3(1, 2, 3), Vec3(-1, 0.5, 2)};
  std::vector<Vec3> j{Vec3(0.3, 0.1, 0.2), Vec3(1, 1, 1)};
  auto c = root_center(v, j, 1);
  CHECK(c.joints[1].norm() < 1e-12);
  CHECK((c.vertices[0] - Vec3(0, 1, 2)).norm() < 1e-12);
  auto again = root_center(c.vertices, c.joints, 1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(again.vertices[i] == c.vertices[i]);
    CHECK(again.joints[i] == c.joints[i]);
  }
}

TEST_CASE("hand template") {
  ArticulatedAsset hand = make_hand_template();
  CHECK_NOTHROW(hand.validate());
  CHECK(hand.mesh.vertex_count() == 160);
  CHECK(hand.chain.size() == 21);
  CHECK(hand.mesh.is_closed());
  CHECK(hand.mesh.is_consistently_oriented());
  CHECK(hand.mesh.signed_volume() > 0.0);
  CHECK(oracle::self_intersections(hand.mesh) == 0);
  CHECK(hand.chain.root() == 0);
  CHECK(hand.chain.articulated_joints().size() == 15);
  const auto reg = regress_joints(hand.mesh, hand.regressor);
  for (std::size_t j = 0; j < 21; ++j) CHECK((reg[j] - hand.chain.joints[j]).norm() < 1e-12);
  // palm faces -z: the wrist frame's y axis points mostly along -z
  const auto frames = compute_local_frames(hand.chain, hand.mesh);
  CHECK(frames[0].y.z() < -0.9);

  ArticulatedAsset left = hand.mirrored();
  CHECK_NOTHROW(left.validate());
  CHECK(left.mesh.is_consistently_oriented());
  CHECK(left.mesh.signed_volume() == doctest::Approx(hand.mesh.signed_volume()));

  const auto dir = std::filesystem::temp_directory_path() / "msmr_asset_test";
  save_asset(hand, dir, "hand");
  ArticulatedAsset back = load_asset(dir, "hand");
  CHECK(back.mesh.faces == hand.mesh.faces);
  CHECK(back.skinning == hand.skinning);
  CHECK(back.chain.parent == hand.chain.parent);
  CHECK(back.chain.next == hand.chain.next);
  CHECK(back.chain.flexion_vertex == hand.chain.flexion_vertex);
  for (std::size_t j = 0; j < 21; ++j) CHECK(back.chain.joints[j] == hand.chain.joints[j]);
  std::filesystem::remove_all(dir);
}
