#include "msmr/scene/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "msmr/error.hpp"

namespace msmr::scene {

namespace {

constexpr double kNear = 1e-3;

struct Buffers {
  MaskImage mask;
  std::vector<double> inv_depth;  // 1/z, 0 for empty
  std::vector<double> shade;
};

const std::array<Vec3, 4> kPalette = {Vec3(0.85, 0.65, 0.55), Vec3(0.80, 0.55, 0.45), Vec3(0.35, 0.55, 0.85),
                                      Vec3(0.55, 0.80, 0.40)};

bool draw(Buffers& buf, const mesh::Mesh& m, std::uint8_t id, const Camera& cam) {
  const std::size_t w = cam.width, h = cam.height;
  bool any = false;
  std::vector<Vec3> proj(m.vertex_count());
  for (std::size_t v = 0; v < m.vertex_count(); ++v) proj[v] = project(cam, m.vertices[v]);
  for (std::size_t fi = 0; fi < m.faces.size(); ++fi) {
    const mesh::Face& f = m.faces[fi];
    const Vec3 &p0 = proj[f[0]], &p1 = proj[f[1]], &p2 = proj[f[2]];
    if (p0.z() <= kNear || p1.z() <= kNear || p2.z() <= kNear) continue;
    any = true;
    const double area = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
    if (std::abs(area) < 1e-14) continue;
    const Vec3 n = m.face_normal(fi).normalized();
    const Vec3 view = (cam.to_camera(m.vertices[f[0]])).normalized();
    const double lambert = 0.25 + 0.75 * std::abs(n.dot(view));

    const double xmin = std::min({p0.x(), p1.x(), p2.x()}), xmax = std::max({p0.x(), p1.x(), p2.x()});
    const double ymin = std::min({p0.y(), p1.y(), p2.y()}), ymax = std::max({p0.y(), p1.y(), p2.y()});
    const long x0 = std::max(0L, static_cast<long>(std::floor(xmin - 0.5)));
    const long x1 = std::min(static_cast<long>(w) - 1, static_cast<long>(std::ceil(xmax - 0.5)));
    const long y0 = std::max(0L, static_cast<long>(std::floor(ymin - 0.5)));
    const long y1 = std::min(static_cast<long>(h) - 1, static_cast<long>(std::ceil(ymax - 0.5)));
    for (long y = y0; y <= y1; ++y)
      for (long x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        double b0 = (p1.x() - px) * (p2.y() - py) - (p1.y() - py) * (p2.x() - px);
        double b1 = (p2.x() - px) * (p0.y() - py) - (p2.y() - py) * (p0.x() - px);
        double b2 = (p0.x() - px) * (p1.y() - py) - (p0.y() - py) * (p1.x() - px);
        if (area < 0) b0 = -b0, b1 = -b1, b2 = -b2;
        if (b0 < 0 || b1 < 0 || b2 < 0) continue;
        const double s = std::abs(area);
        const double inv_z = (b0 / p0.z() + b1 / p1.z() + b2 / p2.z()) / s;
        const std::size_t i = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
        if (inv_z <= buf.inv_depth[i]) continue;
        buf.inv_depth[i] = inv_z;
        buf.mask.labels[i] = id;
        buf.shade[i] = lambert;
      }
  }
  return any;
}

Buffers empty(const Camera& cam) {
  return {MaskImage(cam.width, cam.height), std::vector<double>(cam.width * cam.height, 0.0),
          std::vector<double>(cam.width * cam.height, 0.0)};
}

}  // namespace

std::size_t MaskImage::count(std::uint8_t id) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), id));
}

Vec3 project(const Camera& camera, const Vec3& world) {
  const Vec3 c = camera.to_camera(world);
  if (c.z() <= 0.0) return Vec3(0, 0, c.z());
  return Vec3(camera.focal * c.x() / c.z() + camera.cx, camera.focal * c.y() / c.z() + camera.cy, c.z());
}

Render rasterize(const std::vector<mesh::Mesh>& meshes, const std::vector<int>& ids, const Camera& camera) {
  if (meshes.size() != ids.size()) throw ConfigError("rasterize: one id per mesh required");
  for (int id : ids)
    if (id <= 0 || id > 255) throw ConfigError("rasterize: object ids must be in 1..255");
  Render out;
  Buffers all = empty(camera);
  for (std::size_t o = 0; o < meshes.size(); ++o) {
    const auto id = static_cast<std::uint8_t>(ids[o]);
    Buffers one = empty(camera);
    if (!draw(one, meshes[o], id, camera))
      out.warnings.push_back("object " + std::to_string(ids[o]) + " is entirely behind the camera");
    draw(all, meshes[o], id, camera);
    out.only.push_back(std::move(one.mask));
  }
  out.scene = std::move(all.mask);
  const std::size_t w = camera.width, h = camera.height;
  out.image = numeric::Tensor({h, w, 3});
  out.depth.assign(w * h, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < w * h; ++i) {
    const std::uint8_t id = out.scene.labels[i];
    if (id == 0) {
      for (std::size_t c = 0; c < 3; ++c) out.image[i * 3 + c] = 0.1;
      continue;
    }
    out.depth[i] = 1.0 / all.inv_depth[i];
    const Vec3& color = kPalette[(id - 1) % kPalette.size()];
    for (std::size_t c = 0; c < 3; ++c) out.image[i * 3 + c] = color[static_cast<int>(c)] * all.shade[i];
  }
  return out;
}

Render rasterize(const Scene& scene) {
  std::vector<mesh::Mesh> meshes;
  std::vector<int> ids;
  for (const SceneObject& o : scene.objects) {
    meshes.push_back(o.posed_mesh());
    ids.push_back(o.id);
  }
  return rasterize(meshes, ids, scene.camera);
}

namespace {

std::ifstream open_netpbm(const std::filesystem::path& path, const char* magic, std::size_t& w, std::size_t& h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string m;
  int maxval = 0;
  in >> m;
  auto skip = [&] {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
  };
  skip();
  in >> w;
  skip();
  in >> h;
  skip();
  in >> maxval;
  if (m != magic || !in || maxval != 255 || w == 0 || h == 0)
    throw IoError(path.string() + ": expected 8-bit " + magic + " image");
  in.get();
  return in;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const MaskImage& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(mask.labels.data()), static_cast<std::streamsize>(mask.labels.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

MaskImage read_pgm(const std::filesystem::path& path) {
  std::size_t w = 0, h = 0;
  std::ifstream in = open_netpbm(path, "P5", w, h);
  MaskImage m(w, h);
  in.read(reinterpret_cast<char*>(m.labels.data()), static_cast<std::streamsize>(m.labels.size()));
  if (in.gcount() != static_cast<std::streamsize>(m.labels.size())) throw IoError(path.string() + ": truncated");
  return m;
}

void write_ppm(const std::filesystem::path& path, const numeric::Tensor& image) {
  if (image.rank() != 3 || image.dim(2) != 3) throw ShapeError("write_ppm expects [h x w x 3]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << image.dim(1) << ' ' << image.dim(0) << "\n255\n";
  std::vector<unsigned char> bytes(image.size());
  for (std::size_t i = 0; i < image.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(image[i], 0.0, 1.0) * 255.0));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

numeric::Tensor read_ppm(const std::filesystem::path& path) {
  std::size_t w = 0, h = 0;
  std::ifstream in = open_netpbm(path, "P6", w, h);
  std::vector<unsigned char> bytes(w * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw IoError(path.string() + ": truncated");
  numeric::Tensor t({h, w, 3});
  for (std::size_t i = 0; i < bytes.size(); ++i) t[i] = bytes[i] / 255.0;
  return t;
}

}  // namespace msmr::scene
