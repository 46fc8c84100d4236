#include "msmr/pipeline/manifest.hpp"

#include <set>
#include <sstream>

#include "msmr/error.hpp"
#include "msmr/pipeline/fs.hpp"

namespace msmr::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

bool ManifestRecord::operator==(const ManifestRecord& o) const { return to_json(*this) == to_json(o); }

json to_json(const ManifestRecord& r) {
  json meshes = json::object(), vr = json::object();
  for (const auto& [id, p] : r.gt_meshes) meshes[std::to_string(id)] = p;
  for (const auto& [id, v] : r.vr) vr[std::to_string(id)] = v;
  return {{"name", r.name}, {"scene", r.scene},     {"seed", r.seed},       {"mode", r.mode},
          {"object_ids", r.object_ids}, {"camera", r.camera}, {"gt_meshes", meshes}, {"target", r.target}, {"gt", r.gt},
          {"vr", vr}};
}

ManifestRecord record_from_json(const json& j) {
  static const std::set<std::string> known = {"name", "scene", "seed", "mode", "object_ids", "camera", "gt_meshes", "target", "gt", "vr"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw IoError("unknown manifest field '" + key + "'");
  ManifestRecord r;
  r.name = j.at("name").get<std::string>();
  r.scene = j.at("scene").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.mode = j.at("mode").get<std::string>();
  r.object_ids = j.at("object_ids").get<std::vector<int>>();
  r.camera = j.at("camera");
  for (const auto& [id, p] : j.at("gt_meshes").items()) r.gt_meshes[std::stoi(id)] = p.get<std::string>();
  r.target = j.at("target").get<int>();
  r.gt = j.at("gt").get<std::string>();
  for (const auto& [id, v] : j.at("vr").items()) r.vr[std::stoi(id)] = v.get<double>();
  return r;
}

std::string manifest_text(const std::vector<ManifestRecord>& records) {
  std::string s = json{{"format_version", kManifestVersion}}.dump() + "\n";
  for (const ManifestRecord& r : records) s += to_json(r).dump() + "\n";
  return s;
}

void write_manifest(const Manifest& m, const fs::path& path) { atomic_write_text(path, manifest_text(m.records)); }

Manifest load_manifest(const fs::path& path) {
  std::istringstream in(read_text(path));
  Manifest m;
  m.root = path.parent_path();
  std::string line;
  int line_no = 0;
  bool header = false;
  std::set<std::uint64_t> seeds;
  std::set<std::string> names;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError(where + ": corrupt manifest line: " + e.what());
    }
    if (!header) {
      if (!j.is_object() || !j.contains("format_version"))
        throw IoError(where + ": missing format_version header");
      if (j["format_version"] != kManifestVersion)
        throw IoError(where + ": unsupported manifest format_version " + j["format_version"].dump());
      header = true;
      continue;
    }
    ManifestRecord r;
    try {
      r = record_from_json(j);
    } catch (const json::exception& e) {
      throw IoError(where + ": malformed record: " + e.what());
    } catch (const IoError& e) {
      throw IoError(where + ": " + e.what());
    }
    if (!seeds.insert(r.seed).second) throw IoError(where + ": record '" + r.name + "' repeats seed " + std::to_string(r.seed));
    if (!names.insert(r.name).second) throw IoError(where + ": duplicate record name '" + r.name + "'");
    std::vector<std::string> files = {r.scene, r.gt};
    for (const auto& [id, p] : r.gt_meshes) files.push_back(p);
    for (const std::string& f : files)
      if (!fs::exists(m.root / f)) throw IoError("manifest record '" + r.name + "' references missing file " + f);
    m.records.push_back(std::move(r));
  }
  if (m.records.empty()) m.warnings.push_back("manifest " + path.string() + " has no records: dataset is empty");
  return m;
}

}  // namespace msmr::pipeline
