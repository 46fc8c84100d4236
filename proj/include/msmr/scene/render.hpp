#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msmr/numeric/tensor.hpp"
#include "msmr/scene/scene.hpp"

namespace msmr::scene {

/// Per-pixel object ids, 0 is background. Row-major, y down.
struct MaskImage {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> labels;

  MaskImage() = default;
  MaskImage(std::size_t w, std::size_t h) : width(w), height(h), labels(w * h, 0) {}
  std::uint8_t& at(std::size_t x, std::size_t y) { return labels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }
  std::size_t count(std::uint8_t id) const;
};

struct Render {
  MaskImage scene;
  std::vector<MaskImage> only;  // one per scene object, same order
  numeric::Tensor image;        // [h x w x 3] flat-shaded, in [0, 1]
  std::vector<double> depth;    // camera z per pixel, +inf for background
  std::vector<std::string> warnings;
};

/// Pixel coordinates (x, y) and camera depth of a world point.
Vec3 project(const Camera& camera, const Vec3& world);

/// Z-buffered rasterization sampled at pixel centers. Triangles with a vertex
/// at or behind the near plane are dropped; an object losing all its
/// triangles that way yields an empty mask and a warning.
Render rasterize(const Scene& scene);
Render rasterize(const std::vector<mesh::Mesh>& meshes, const std::vector<int>& ids, const Camera& camera);

void write_pgm(const std::filesystem::path& path, const MaskImage& mask);
MaskImage read_pgm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const numeric::Tensor& image);
numeric::Tensor read_ppm(const std::filesystem::path& path);

}  // namespace msmr::scene
