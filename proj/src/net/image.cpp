#include "msmr/net/image.hpp"

#include <algorithm>
#include <cmath>

#include "msmr/error.hpp"

namespace msmr::net {

using numeric::Tensor;

namespace {
void require_image(const Tensor& image) {
  if (image.rank() != 3 || image.shape()[2] != 3)
    throw ShapeError("expected an [h x w x 3] image, got " + numeric::to_string(image.shape()));
}
}  // namespace

Tensor normalize_image(const Tensor& image) {
  require_image(image);
  Tensor out(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) out[i] = (image[i] - 0.5) / 1.0;
  return out;
}

double sample_bilinear(const Tensor& image, double x, double y, std::size_t channel) {
  const auto h = static_cast<std::ptrdiff_t>(image.shape()[0]);
  const auto w = static_cast<std::ptrdiff_t>(image.shape()[1]);
  const double fx = x - 0.5, fy = y - 0.5;
  const auto x0 = static_cast<std::ptrdiff_t>(std::floor(fx));
  const auto y0 = static_cast<std::ptrdiff_t>(std::floor(fy));
  const double tx = fx - static_cast<double>(x0), ty = fy - static_cast<double>(y0);
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0 || c < 0 || r >= h || c >= w) return 0.0;
    return image[(static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)) * 3 + channel];
  };
  return (1 - ty) * ((1 - tx) * at(y0, x0) + tx * at(y0, x0 + 1)) +
         ty * ((1 - tx) * at(y0 + 1, x0) + tx * at(y0 + 1, x0 + 1));
}

namespace {

// Each output pixel averages k x k bilinear samples of the source region
// mapped through `map` (output pixel coords -> source pixel coords).
template <class Map>
Tensor resample_image(const Tensor& image, std::size_t out_h, std::size_t out_w, std::size_t k, Map map) {
  Tensor out({out_h, out_w, 3});
  for (std::size_t r = 0; r < out_h; ++r)
    for (std::size_t c = 0; c < out_w; ++c)
      for (std::size_t sr = 0; sr < k; ++sr)
        for (std::size_t sc = 0; sc < k; ++sc) {
          const double px = static_cast<double>(c) + (static_cast<double>(sc) + 0.5) / static_cast<double>(k);
          const double py = static_cast<double>(r) + (static_cast<double>(sr) + 0.5) / static_cast<double>(k);
          const auto [sx, sy] = map(px, py);
          for (std::size_t ch = 0; ch < 3; ++ch)
            out[(r * out_w + c) * 3 + ch] += sample_bilinear(image, sx, sy, ch) / static_cast<double>(k * k);
        }
  return out;
}

std::size_t supersampling(double ratio) { return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(ratio)), 1, 8); }

}  // namespace

Tensor resize_image(const Tensor& image, std::size_t height, std::size_t width) {
  require_image(image);
  if (height == 0 || width == 0) throw ShapeError("cannot resize to an empty image");
  const double sy = static_cast<double>(image.shape()[0]) / static_cast<double>(height);
  const double sx = static_cast<double>(image.shape()[1]) / static_cast<double>(width);
  return resample_image(image, height, width, supersampling(std::max(sx, sy)),
                        [&](double x, double y) { return std::pair{x * sx, y * sy}; });
}

Augmentation draw_augmentation(const AugmentConfig& config, std::size_t source_size, numeric::Rng& rng) {
  Augmentation a;
  a.crop = rng.uniform(config.crop_min, config.crop_max);
  const double slack = (1.0 - a.crop) * static_cast<double>(source_size) / 2.0;
  a.dx = rng.uniform(-slack, slack);
  a.dy = rng.uniform(-slack, slack);
  const double max_angle = config.max_rotation_deg * M_PI / 180.0;
  a.angle = rng.uniform(-max_angle, max_angle);
  return a;
}

Tensor augment_image(const Tensor& image, const Augmentation& a, std::size_t out_size) {
  require_image(image);
  const double src = static_cast<double>(image.shape()[1]);
  const double srch = static_cast<double>(image.shape()[0]);
  const double scale = a.crop * src / static_cast<double>(out_size);
  const double half_out = static_cast<double>(out_size) / 2.0;
  const double cs = std::cos(a.angle), sn = std::sin(a.angle);
  return resample_image(image, out_size, out_size, supersampling(scale), [&](double x, double y) {
    const double u = (x - half_out) * scale, v = (y - half_out) * scale;
    // inverse rotation: output content is the source turned by +angle
    return std::pair{src / 2.0 + a.dx + cs * u + sn * v, srch / 2.0 + a.dy - sn * u + cs * v};
  });
}

std::vector<mesh::Vec3> augment_points(const std::vector<mesh::Vec3>& points, const Augmentation& a) {
  const double cs = std::cos(a.angle), sn = std::sin(a.angle);
  std::vector<mesh::Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.emplace_back(cs * p.x() - sn * p.y(), sn * p.x() + cs * p.y(), p.z());
  return out;
}

}  // namespace msmr::net
