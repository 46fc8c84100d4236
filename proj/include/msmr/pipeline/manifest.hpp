#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace msmr::pipeline {

inline constexpr int kManifestVersion = 1;

/// One generated scene. Paths are relative to the manifest's directory.
struct ManifestRecord {
  std::string name;
  std::string scene;  // scene directory
  std::uint64_t seed = 0;
  std::string mode;
  std::vector<int> object_ids;
  nlohmann::json camera;
  std::map<int, std::string> gt_meshes;  // object id -> posed OBJ
  int target = 1;                        // object id of the evaluated hand
  std::string gt;                        // its vertices and joints, camera frame
  std::map<int, double> vr;              // object id -> visibility ratio

  bool operator==(const ManifestRecord& o) const;
};

struct Manifest {
  std::filesystem::path root;  // directory the relative paths resolve against
  std::vector<ManifestRecord> records;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const ManifestRecord& r);
ManifestRecord record_from_json(const nlohmann::json& j);

/// Header line {"format_version": 1} followed by one record per line.
std::string manifest_text(const std::vector<ManifestRecord>& records);
void write_manifest(const Manifest& m, const std::filesystem::path& path);
/// Checks the header, every line, seed uniqueness and that every referenced
/// file exists. Errors name the line or record.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace msmr::pipeline
