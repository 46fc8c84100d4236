#include "msmr/pipeline/dataset.hpp"

#include <cmath>

#include "msmr/error.hpp"
#include "msmr/numeric/rng.hpp"
#include "msmr/pipeline/fs.hpp"
#include "msmr/scene/render.hpp"

namespace msmr::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json points_json(const std::vector<Vec3>& p) {
  json a = json::array();
  for (const Vec3& v : p) a.push_back({v.x(), v.y(), v.z()});
  return a;
}

std::vector<Vec3> points_from(const json& a) {
  std::vector<Vec3> p;
  for (const json& v : a) {
    if (!v.is_array() || v.size() != 3) throw IoError("expected 3-vectors");
    p.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }
  return p;
}

}  // namespace

void write_points(const fs::path& path, const HandPoints& p) {
  atomic_write_text(path, json{{"vertices", points_json(p.vertices)}, {"joints", points_json(p.joints)}}.dump() + "\n");
}

HandPoints read_points(const fs::path& path) {
  try {
    const json j = json::parse(read_text(path));
    return {points_from(j.at("vertices")), points_from(j.at("joints"))};
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

HandPoints target_points(const scene::Scene& s, const scene::SceneObject& hand) {
  const mesh::Mesh posed = hand.posed_mesh();
  HandPoints out;
  for (const Vec3& v : posed.vertices) out.vertices.push_back(s.camera.to_camera(v));
  out.joints = mesh::regress_joints(out.vertices, hand.rig->asset.regressor);
  const mesh::Centered c = mesh::root_center(out.vertices, out.joints, static_cast<std::size_t>(hand.rig->asset.center_joint));
  return {c.vertices, c.joints};
}

TemplateMapping::TemplateMapping(std::shared_ptr<const hierarchy::MeshHierarchy> h, mesh::ArticulatedAsset a)
    : hierarchy(std::move(h)), asset(std::move(a)) {
  const auto& src = hierarchy->source_vertices;
  const mesh::Mesh& level0 = hierarchy->levels.at(0);
  const std::size_t n = asset.mesh.vertex_count();
  if (src.size() != level0.vertex_count()) throw ConfigError("hierarchy source_vertices do not match level 0");
  std::vector<numeric::Triplet> down;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] < 0 || static_cast<std::size_t>(src[i]) >= n ||
        (asset.mesh.vertices[src[i]] - level0.vertices[i]).norm() > 1e-9)
      throw ConfigError("hierarchy level 0 was not built from asset '" + asset.name + "'");
    down.push_back({i, static_cast<std::size_t>(src[i]), 1.0});
  }
  up = hierarchy::build_upsample(asset.mesh, level0, numeric::CsrMatrix(src.size(), n, std::move(down)));
}

std::vector<Vec3> TemplateMapping::to_level0(const std::vector<Vec3>& full) const {
  if (full.size() != asset.mesh.vertex_count())
    throw ShapeError("expected " + std::to_string(asset.mesh.vertex_count()) + " template vertices, got " +
                     std::to_string(full.size()));
  std::vector<Vec3> out;
  for (int s : hierarchy->source_vertices) out.push_back(full[s]);
  return out;
}

HandPoints TemplateMapping::from_level0(const std::vector<Vec3>& level0) const {
  if (level0.size() != up.cols()) throw ShapeError("prediction does not match hierarchy level 0");
  HandPoints p;
  p.vertices.assign(up.rows(), Vec3::Zero());
  for (std::size_t r = 0; r < up.rows(); ++r) {
    const auto cols = up.row_cols(r);
    const auto vals = up.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) p.vertices[r] += vals[k] * level0[cols[k]];
  }
  p.joints = mesh::regress_joints(p.vertices, asset.regressor);
  return p;
}

Split parse_split(const std::string& s) {
  if (s == "all") return Split::All;
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw ConfigError("unknown split '" + s + "' (expected all, train or test)");
}

std::vector<std::size_t> split_indices(std::size_t n, double train_fraction, std::uint64_t seed, Split which) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw ConfigError("train fraction must lie in [0, 1]");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (which == Split::All) return idx;
  numeric::Rng rng = numeric::Rng(seed).derive("split");
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::vector<std::size_t> out = which == Split::Train ? std::vector<std::size_t>(idx.begin(), idx.begin() + cut)
                                                       : std::vector<std::size_t>(idx.begin() + cut, idx.end());
  std::sort(out.begin(), out.end());
  return out;
}

net::Tensor load_image(const Manifest& m, const ManifestRecord& r, std::size_t size) {
  const net::Tensor img = scene::read_ppm(m.root / r.scene / "image.ppm");
  return img.shape()[0] == size && img.shape()[1] == size ? img : net::resize_image(img, size, size);
}

std::vector<net::Sample> load_samples(const Manifest& m, const std::vector<std::size_t>& records,
                                      const TemplateMapping& map, std::size_t image_size) {
  std::vector<net::Sample> out;
  for (std::size_t i : records) {
    const ManifestRecord& r = m.records.at(i);
    out.push_back({load_image(m, r, image_size), map.to_level0(read_points(m.root / r.gt).vertices)});
  }
  return out;
}

}  // namespace msmr::pipeline
