#include <array>
#include <cmath>

#include "msmr/mesh/asset.hpp"

namespace msmr::mesh {

namespace {

class Builder {
 public:
  int add(const Vec3& p) {
    mesh_.vertices.push_back(p);
    return static_cast<int>(mesh_.vertices.size()) - 1;
  }
  const Vec3& at(int i) const { return mesh_.vertices[i]; }

  /// Adds a triangle wound so its normal points away from `inside`.
  void tri(int a, int b, int c, const Vec3& inside) {
    const Vec3 n = (at(b) - at(a)).cross(at(c) - at(a));
    const Vec3 centroid = (at(a) + at(b) + at(c)) / 3.0;
    if (n.dot(centroid - inside) < 0.0) std::swap(b, c);
    mesh_.faces.push_back({a, b, c});
  }
  /// Quad a-b-c-d in cyclic order, split along a-c.
  void quad(int a, int b, int c, int d, const Vec3& inside) {
    tri(a, b, c, inside);
    tri(a, c, d, inside);
  }

  Mesh take() { return std::move(mesh_); }

 private:
  Mesh mesh_;
};

Vec3 closest_on_line(const Vec3& origin, const Vec3& dir, const Vec3& p) {
  return origin + dir * (p - origin).dot(dir);
}

struct Digit {
  std::array<int, 4> joints;  // base, two intermediate, tip
};

constexpr std::array<double, 6> kRingPosition{0.22, 0.45, 0.60, 0.75, 0.88, 1.0};
constexpr std::array<double, 6> kRingTaper{0.90, 0.85, 0.80, 0.75, 0.70, 0.60};
constexpr int kJointRing[3] = {1, 3, 5};  // rings sitting on the 2nd, 3rd and tip joints

}  // namespace

ArticulatedAsset make_hand_template() {
  Builder b;
  const Vec3 palm_axis_origin(0, 0, 0);
  const Vec3 palm_axis(0, 1, 0);

  // Palm: four rings of five front (z < 0) and five back vertices.
  const std::array<double, 4> ring_y{0.0, 0.03, 0.06, 0.09};
  const std::array<double, 4> half_width{0.03, 0.035, 0.04, 0.04};
  const std::array<double, 4> half_thick{0.009, 0.012, 0.012, 0.011};
  int palm[4][2][5];
  for (int r = 0; r < 4; ++r)
    for (int side = 0; side < 2; ++side)
      for (int k = 0; k < 5; ++k) {
        const double x = -half_width[r] + k * half_width[r] / 2.0;
        palm[r][side][k] = b.add(Vec3(x, ring_y[r], side == 0 ? -half_thick[r] : half_thick[r]));
      }
  auto palm_inside = [&](int a, int c) {
    return closest_on_line(palm_axis_origin, palm_axis, (b.at(a) + b.at(c)) / 2.0);
  };
  for (int r = 0; r < 3; ++r) {
    for (int side = 0; side < 2; ++side)
      for (int k = 0; k < 4; ++k) {
        const int q[4] = {palm[r][side][k], palm[r][side][k + 1], palm[r + 1][side][k + 1],
                          palm[r + 1][side][k]};
        b.quad(q[0], q[1], q[2], q[3], palm_inside(q[0], q[2]));
      }
    b.quad(palm[r][0][0], palm[r][1][0], palm[r + 1][1][0], palm[r + 1][0][0],
           palm_inside(palm[r][0][0], palm[r + 1][1][0]));
    if (r > 0)  // the lowest +x quad is where the thumb attaches
      b.quad(palm[r][0][4], palm[r][1][4], palm[r + 1][1][4], palm[r + 1][0][4],
             palm_inside(palm[r][0][4], palm[r + 1][1][4]));
  }
  for (int k = 0; k < 4; ++k)
    b.quad(palm[0][0][k], palm[0][0][k + 1], palm[0][1][k + 1], palm[0][1][k], Vec3(0, 0.045, 0));

  ArticulatedAsset asset;
  asset.name = "hand";
  asset.center_joint = 9;
  asset.joint_names = {"wrist",
                       "thumb1",  "thumb2",  "thumb3",  "thumb4",
                       "index1",  "index2",  "index3",  "index4",
                       "middle1", "middle2", "middle3", "middle4",
                       "ring1",   "ring2",   "ring3",   "ring4",
                       "little1", "little2", "little3", "little4"};
  const std::size_t joint_count = asset.joint_names.size();
  std::vector<std::vector<int>> joint_vertices(joint_count);  // regressor support
  std::vector<int> flexion(joint_count, -1);
  std::vector<int> skin_of;  // filled after all vertices exist
  std::vector<std::pair<int, int>> skin_pairs;

  for (int r = 0; r < 4; ++r)
    for (int side = 0; side < 2; ++side)
      for (int k = 0; k < 5; ++k) skin_pairs.emplace_back(palm[r][side][k], 0);
  for (int side = 0; side < 2; ++side)
    for (int k = 0; k < 5; ++k) joint_vertices[0].push_back(palm[0][side][k]);
  flexion[0] = palm[0][0][4];

  // Extrudes a digit from a base quad given in cyclic order front-left,
  // front-right, back-right, back-left (front is the palm side).
  auto extrude = [&](const std::array<int, 4>& base, Vec3 dir, double length, const Digit& d) {
    dir.normalize();
    Vec3 center = Vec3::Zero();
    for (int v : base) center += b.at(v);
    center /= 4.0;
    Vec3 u = b.at(base[1]) - b.at(base[0]);
    const double w0 = u.norm() / 2.0;
    u = (u - u.dot(dir) * dir).normalized();
    Vec3 n = b.at(base[3]) - b.at(base[0]);
    const double t0 = n.norm() / 2.0;
    n = dir.cross(u);
    if (n.dot(b.at(base[3]) - b.at(base[0])) < 0.0) n = -n;

    std::array<std::array<int, 4>, 6> rings;
    for (int i = 0; i < 6; ++i) {
      const Vec3 c = center + dir * (kRingPosition[i] * length);
      const double w = w0 * kRingTaper[i], t = t0 * kRingTaper[i];
      rings[i] = {b.add(c - n * t), b.add(c + u * w), b.add(c + n * t), b.add(c - u * w)};
    }
    auto inside = [&](int a, int c) { return closest_on_line(center, dir, (b.at(a) + b.at(c)) / 2.0); };
    for (int j = 0; j < 4; ++j) {
      const int j1 = (j + 1) % 4;
      b.tri(base[j], base[j1], rings[0][j], inside(base[j], rings[0][j]));
      b.tri(base[j1], rings[0][j1], rings[0][j], inside(base[j1], rings[0][j]));
    }
    for (int i = 0; i + 1 < 6; ++i)
      for (int j = 0; j < 4; ++j) {
        const int j1 = (j + 1) % 4;
        b.quad(rings[i][j], rings[i][j1], rings[i + 1][j1], rings[i + 1][j],
               inside(rings[i][j], rings[i + 1][j1]));
      }
    const Vec3 beyond = center + dir * (2.0 * length);
    b.quad(rings[5][0], rings[5][1], rings[5][2], rings[5][3], 2.0 * b.at(rings[5][0]) - beyond);

    for (int v : base) joint_vertices[d.joints[0]].push_back(v);
    for (int k = 0; k < 3; ++k)
      for (int v : rings[kJointRing[k]]) joint_vertices[d.joints[k + 1]].push_back(v);
    flexion[d.joints[0]] = rings[0][0];
    for (int k = 0; k < 3; ++k) flexion[d.joints[k + 1]] = rings[kJointRing[k]][0];
    // Ring 0 follows the base joint, rings 1-2 the second, rings 3-5 the third.
    const int owner[6] = {d.joints[0], d.joints[1], d.joints[1], d.joints[2], d.joints[2], d.joints[2]};
    for (int i = 0; i < 6; ++i)
      for (int v : rings[i]) skin_pairs.emplace_back(v, owner[i]);
  };

  extrude({palm[0][0][4], palm[1][0][4], palm[1][1][4], palm[0][1][4]}, Vec3(1.0, 0.35, -0.3), 0.065,
          Digit{{1, 2, 3, 4}});
  const Vec3 finger_dir[4] = {Vec3(-0.12, 1, 0), Vec3(-0.04, 1, 0), Vec3(0.02, 1, 0), Vec3(0.08, 1, 0)};
  const double finger_len[4] = {0.06, 0.075, 0.08, 0.075};
  const Digit fingers[4] = {{{17, 18, 19, 20}}, {{13, 14, 15, 16}}, {{9, 10, 11, 12}}, {{5, 6, 7, 8}}};
  for (int k = 0; k < 4; ++k)
    extrude({palm[3][0][k], palm[3][0][k + 1], palm[3][1][k + 1], palm[3][1][k]}, finger_dir[k],
            finger_len[k], fingers[k]);

  asset.mesh = b.take();
  asset.skinning.assign(asset.mesh.vertex_count(), -1);
  for (auto [v, j] : skin_pairs) asset.skinning[v] = j;

  std::vector<numeric::Triplet> reg;
  for (std::size_t j = 0; j < joint_count; ++j)
    for (int v : joint_vertices[j])
      reg.push_back({j, static_cast<std::size_t>(v), 1.0 / static_cast<double>(joint_vertices[j].size())});
  asset.regressor.weights = numeric::CsrMatrix(joint_count, asset.mesh.vertex_count(), std::move(reg));

  KinematicChain& chain = asset.chain;
  chain.joints = regress_joints(asset.mesh, asset.regressor);
  chain.parent.assign(joint_count, 0);
  chain.next.assign(joint_count, -1);
  chain.flexion_vertex = flexion;
  chain.angles.assign(joint_count, Vec3::Zero());
  for (int base : {1, 5, 9, 13, 17}) {
    chain.parent[base] = 0;
    for (int k = 1; k < 4; ++k) chain.parent[base + k] = base + k - 1;
    for (int k = 0; k < 3; ++k) chain.next[base + k] = base + k + 1;
  }
  chain.next[0] = asset.center_joint;
  return asset;
}

}  // namespace msmr::mesh
