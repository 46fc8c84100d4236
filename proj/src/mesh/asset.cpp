#include "msmr/mesh/asset.hpp"

#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "msmr/error.hpp"

#ifndef MSMR_DEFAULT_ASSET_DIR
#define MSMR_DEFAULT_ASSET_DIR "assets"
#endif

namespace msmr::mesh {

using nlohmann::json;

void ArticulatedAsset::validate() const {
  mesh.validate();
  chain.validate();
  validate_skinning(skinning, mesh.vertex_count(), chain.size());
  regressor.validate();
  if (regressor.weights.cols() != mesh.vertex_count() || regressor.weights.rows() != chain.size())
    throw GeometryError("regressor shape does not match asset '" + name + "'");
  if (center_joint < 0 || center_joint >= static_cast<int>(chain.size()))
    throw GeometryError("center joint out of range");
  for (std::size_t j = 0; j < chain.size(); ++j)
    if (chain.flexion_vertex[j] >= static_cast<int>(mesh.vertex_count()))
      throw GeometryError("flexion vertex of joint " + std::to_string(j) + " out of range");
}

ArticulatedAsset ArticulatedAsset::mirrored() const {
  ArticulatedAsset out = *this;
  out.mesh = mesh.mirrored_x();
  for (Vec3& j : out.chain.joints) j.x() = -j.x();
  return out;
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

json vec3_list(const std::vector<Vec3>& pts) {
  json arr = json::array();
  for (const Vec3& p : pts) arr.push_back({p.x(), p.y(), p.z()});
  return arr;
}

std::vector<Vec3> parse_vec3_list(const json& arr) {
  std::vector<Vec3> out;
  for (const auto& p : arr) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  return out;
}

}  // namespace

void save_asset(const ArticulatedAsset& asset, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_obj(dir / (stem + ".obj"), asset.mesh);
  write_json(dir / (stem + "_chain.json"), json{{"name", asset.name},
                                               {"joint_names", asset.joint_names},
                                               {"center_joint", asset.center_joint},
                                               {"joints", vec3_list(asset.chain.joints)},
                                               {"parent", asset.chain.parent},
                                               {"next", asset.chain.next}});
  write_json(dir / (stem + "_flexion.json"), json{{"flexion_vertex", asset.chain.flexion_vertex}});
  write_json(dir / (stem + "_skinning.json"), json{{"joint", asset.skinning}});
  json trip = json::array();
  for (const auto& t : asset.regressor.weights.triplets()) trip.push_back({t.row, t.col, t.value});
  write_json(dir / (stem + "_regressor.json"), json{{"rows", asset.regressor.weights.rows()},
                                                   {"cols", asset.regressor.weights.cols()},
                                                   {"triplets", trip}});
}

ArticulatedAsset load_asset(const std::filesystem::path& dir, const std::string& stem) {
  ArticulatedAsset asset;
  asset.mesh = read_obj(dir / (stem + ".obj"));
  try {
    const json chain = read_json(dir / (stem + "_chain.json"));
    asset.name = chain.value("name", stem);
    asset.joint_names = chain.at("joint_names").get<std::vector<std::string>>();
    asset.center_joint = chain.at("center_joint").get<int>();
    asset.chain.joints = parse_vec3_list(chain.at("joints"));
    asset.chain.parent = chain.at("parent").get<std::vector<int>>();
    asset.chain.next = chain.at("next").get<std::vector<int>>();
    asset.chain.flexion_vertex =
        read_json(dir / (stem + "_flexion.json")).at("flexion_vertex").get<std::vector<int>>();
    asset.chain.angles.assign(asset.chain.joints.size(), Vec3::Zero());
    asset.skinning = read_json(dir / (stem + "_skinning.json")).at("joint").get<std::vector<int>>();
    const json reg = read_json(dir / (stem + "_regressor.json"));
    std::vector<numeric::Triplet> trips;
    for (const auto& t : reg.at("triplets"))
      trips.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<double>()});
    asset.regressor.weights =
        numeric::CsrMatrix(reg.at("rows").get<std::size_t>(), reg.at("cols").get<std::size_t>(), std::move(trips));
  } catch (const json::exception& e) {
    throw IoError("malformed asset '" + stem + "' in " + dir.string() + ": " + e.what());
  }
  asset.validate();
  return asset;
}

std::filesystem::path asset_root() {
  if (const char* env = std::getenv("MSMR_ASSET_ROOT"); env && *env) return env;
  return MSMR_DEFAULT_ASSET_DIR;
}

}  // namespace msmr::mesh
