#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "msmr/hierarchy/hierarchy.hpp"
#include "msmr/mesh/asset.hpp"
#include "msmr/net/train.hpp"
#include "msmr/pipeline/manifest.hpp"
#include "msmr/scene/scene.hpp"

namespace msmr::pipeline {

using mesh::Vec3;

/// Full-resolution hand vertices and joints in the camera frame, centered on
/// the asset's center joint.
struct HandPoints {
  std::vector<Vec3> vertices;
  std::vector<Vec3> joints;
};

void write_points(const std::filesystem::path& path, const HandPoints& p);
HandPoints read_points(const std::filesystem::path& path);

HandPoints target_points(const scene::Scene& s, const scene::SceneObject& hand);

/// Links the template an asset defines to level 0 of a hierarchy built from
/// it: sampling picks level-0 vertices out of template-sized arrays,
/// upsampling interpolates template vertices from level 0.
struct TemplateMapping {
  std::shared_ptr<const hierarchy::MeshHierarchy> hierarchy;
  mesh::ArticulatedAsset asset;
  numeric::CsrMatrix up;

  /// Throws ConfigError when level 0 is not a subset of the asset's vertices.
  TemplateMapping(std::shared_ptr<const hierarchy::MeshHierarchy> h, mesh::ArticulatedAsset a);
  std::vector<Vec3> to_level0(const std::vector<Vec3>& full) const;
  HandPoints from_level0(const std::vector<Vec3>& level0) const;
};

enum class Split { All, Train, Test };
Split parse_split(const std::string& s);

/// Deterministic shuffle of record indices, the first round(train * n) train.
std::vector<std::size_t> split_indices(std::size_t n, double train_fraction, std::uint64_t seed, Split which);

net::Tensor load_image(const Manifest& m, const ManifestRecord& r, std::size_t size);
std::vector<net::Sample> load_samples(const Manifest& m, const std::vector<std::size_t>& records,
                                      const TemplateMapping& map, std::size_t image_size);

}  // namespace msmr::pipeline
