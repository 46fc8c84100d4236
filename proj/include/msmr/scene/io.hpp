#pragma once

#include <filesystem>

#include "json.hpp"
#include "msmr/scene/render.hpp"
#include "msmr/scene/scene.hpp"

namespace msmr::scene {

nlohmann::json to_json(const Camera& c);
Camera camera_from_json(const nlohmann::json& j);

/// Seed, mode, camera and per object: id, asset stem, dynamic flag, joint
/// angles and global pose. Meshes are not embedded.
nlohmann::json to_json(const Scene& s);
/// Rigs are looked up by the stored asset stem.
Scene scene_from_json(const nlohmann::json& j, const SceneAssets& assets);

/// Writes scene.json, object_<id>.obj (posed, world space), mask_scene.pgm,
/// mask_only_<id>.pgm and image.ppm into `dir`, which must exist.
void write_scene_files(const std::filesystem::path& dir, const Scene& scene, const Render& render);
Scene load_scene(const std::filesystem::path& dir, const SceneAssets& assets);

}  // namespace msmr::scene
