#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msmr/mesh/kinematics.hpp"
#include "msmr/mesh/mesh.hpp"
#include "msmr/mesh/regressor.hpp"

namespace msmr::mesh {

/// A template mesh together with everything needed to pose it and read
/// joints back from it.
struct ArticulatedAsset {
  std::string name;
  Mesh mesh;
  KinematicChain chain;
  Skinning skinning;
  JointRegressor regressor;
  std::vector<std::string> joint_names;
  /// Joint placed at the origin when ground truth is root-centered.
  int center_joint = 0;

  void validate() const;
  /// Reflection through x = 0; turns a right hand into a left hand.
  ArticulatedAsset mirrored() const;
};

/// Low-poly 160-vertex closed hand with a 21-joint chain (wrist, then thumb,
/// index, middle, ring and little finger, four joints each ending in the
/// tip). Palm faces -z, fingers point along +y, thumb on +x.
ArticulatedAsset make_hand_template();

/// Files written: <stem>.obj, <stem>_chain.json, <stem>_flexion.json,
/// <stem>_skinning.json, <stem>_regressor.json.
void save_asset(const ArticulatedAsset& asset, const std::filesystem::path& dir,
                const std::string& stem);
ArticulatedAsset load_asset(const std::filesystem::path& dir, const std::string& stem);

/// $MSMR_ASSET_ROOT when set, else the repository's assets/ directory.
std::filesystem::path asset_root();

}  // namespace msmr::mesh
