#pragma once

#include <cstddef>
#include <vector>

#include "msmr/mesh/mesh.hpp"
#include "msmr/numeric/rng.hpp"
#include "msmr/numeric/tensor.hpp"

namespace msmr::net {

// Images are [height x width x 3] tensors with values in [0, 1].

/// (x - 0.5) / 1.0 per channel.
numeric::Tensor normalize_image(const numeric::Tensor& image);

/// Bilinear sample at continuous pixel coordinates (pixel centers at +0.5);
/// zero outside the image.
double sample_bilinear(const numeric::Tensor& image, double x, double y, std::size_t channel);

/// Resize with supersampled bilinear filtering.
numeric::Tensor resize_image(const numeric::Tensor& image, std::size_t height, std::size_t width);

struct AugmentConfig {
  double crop_min = 0.8;
  double crop_max = 1.0;
  double max_rotation_deg = 30.0;
};

/// Square crop of side crop * source size, shifted by (dx, dy) pixels from
/// the center, rotated by `angle` (radians, content turns from +x towards
/// +y, i.e. clockwise on screen).
struct Augmentation {
  double crop = 1.0;
  double dx = 0.0;
  double dy = 0.0;
  double angle = 0.0;
};

Augmentation draw_augmentation(const AugmentConfig& config, std::size_t source_size, numeric::Rng& rng);
numeric::Tensor augment_image(const numeric::Tensor& image, const Augmentation& a, std::size_t out_size);
/// Camera-space points rotated about the optical axis by the image angle.
std::vector<mesh::Vec3> augment_points(const std::vector<mesh::Vec3>& points, const Augmentation& a);

}  // namespace msmr::net
