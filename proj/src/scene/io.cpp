#include "msmr/scene/io.hpp"

#include <fstream>

#include "msmr/error.hpp"

namespace msmr::scene {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-vector, got " + j.dump());
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

const std::shared_ptr<const Rig>& rig_for(const std::string& stem, const SceneAssets& assets) {
  for (const auto* r : {&assets.left_hand, &assets.right_hand, &assets.object})
    if (*r && (*r)->stem == stem) return *r;
  throw IoError("scene references unknown asset '" + stem + "'");
}

}  // namespace

json to_json(const Camera& c) {
  return {{"focal", c.focal}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height},
          {"position", vec(c.position)}};
}

Camera camera_from_json(const json& j) {
  Camera c;
  c.focal = j.at("focal").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<std::size_t>();
  c.height = j.at("height").get<std::size_t>();
  c.position = vec(j.at("position"));
  return c;
}

json to_json(const Scene& s) {
  json objects = json::array();
  for (const SceneObject& o : s.objects) {
    json angles = json::array(), rot = json::array();
    for (const Vec3& a : o.angles) angles.push_back(vec(a));
    for (int r = 0; r < 3; ++r) rot.push_back(json::array({o.pose.rotation(r, 0), o.pose.rotation(r, 1), o.pose.rotation(r, 2)}));
    objects.push_back({{"id", o.id},
                       {"asset", o.rig->stem},
                       {"dynamic", o.dynamic},
                       {"angles", angles},
                       {"rotation", rot},
                       {"translation", vec(o.pose.translation)}});
  }
  return {{"format_version", 1},
          {"seed", s.seed},
          {"mode", to_string(s.mode)},
          {"camera", to_json(s.camera)},
          {"placement_attempts", s.placement_attempts},
          {"articulation_passes", s.articulation_passes},
          {"objects", objects}};
}

Scene scene_from_json(const json& j, const SceneAssets& assets) {
  try {
    if (j.at("format_version").get<int>() != 1) throw IoError("unsupported scene format_version");
    Scene s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.mode = parse_mode(j.at("mode").get<std::string>());
    s.camera = camera_from_json(j.at("camera"));
    s.placement_attempts = j.value("placement_attempts", 0);
    s.articulation_passes = j.value("articulation_passes", 0);
    for (const json& jo : j.at("objects")) {
      SceneObject o;
      o.id = jo.at("id").get<int>();
      o.rig = rig_for(jo.at("asset").get<std::string>(), assets);
      o.dynamic = jo.at("dynamic").get<bool>();
      for (const json& a : jo.at("angles")) o.angles.push_back(vec(a));
      if (o.angles.size() != o.rig->asset.chain.size())
        throw IoError("object " + std::to_string(o.id) + ": angle count does not match its chain");
      Eigen::Matrix3d r;
      const json& jr = jo.at("rotation");
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) r(a, b) = jr.at(a).at(b).get<double>();
      o.pose = mesh::RigidTransform::from(r, vec(jo.at("translation")));
      s.objects.push_back(std::move(o));
    }
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed scene: ") + e.what());
  }
}

void write_scene_files(const std::filesystem::path& dir, const Scene& scene, const Render& render) {
  {
    std::ofstream out(dir / "scene.json");
    if (!out) throw IoError("cannot write " + (dir / "scene.json").string());
    out << to_json(scene).dump(2) << '\n';
  }
  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    const std::string id = std::to_string(scene.objects[o].id);
    mesh::write_obj(dir / ("object_" + id + ".obj"), scene.objects[o].posed_mesh());
    write_pgm(dir / ("mask_only_" + id + ".pgm"), render.only.at(o));
  }
  write_pgm(dir / "mask_scene.pgm", render.scene);
  write_ppm(dir / "image.ppm", render.image);
}

Scene load_scene(const std::filesystem::path& dir, const SceneAssets& assets) {
  std::ifstream in(dir / "scene.json");
  if (!in) throw IoError("cannot open " + (dir / "scene.json").string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError((dir / "scene.json").string() + ": " + e.what());
  }
  return scene_from_json(j, assets);
}

}  // namespace msmr::scene
