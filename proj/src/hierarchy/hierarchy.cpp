#include "msmr/hierarchy/hierarchy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "msmr/error.hpp"

namespace msmr::hierarchy {

using nlohmann::json;

std::vector<std::size_t> default_spiral_lengths(std::size_t levels) {
  std::vector<std::size_t> out{12, 12, 10, 9, 9};
  out.resize(levels, 9);
  return out;
}

void MeshHierarchy::validate() const {
  const std::size_t L = levels.size();
  if (L == 0) throw GeometryError("hierarchy has no levels");
  if (down.size() != L - 1 || up.size() != L - 1 || spirals.size() != L)
    throw GeometryError("hierarchy operator counts do not match level count");
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t n = levels[l].vertex_count();
    if (spirals[l].vertex_count() != n) throw GeometryError("spiral table of level " + std::to_string(l) + " has wrong size");
    for (int v : spirals[l].indices)
      if (v < SpiralTable::kPad || v >= static_cast<int>(n))
        throw GeometryError("spiral index out of range at level " + std::to_string(l));
    for (std::size_t v = 0; v < n; ++v)
      if (spirals[l][v][0] != static_cast<int>(v)) throw GeometryError("spiral does not start at its vertex");
    if (l + 1 == L) break;
    const std::size_t m = levels[l + 1].vertex_count();
    const std::size_t half = (n + 1) / 2;
    if (m + 1 < half || m > half + 1)
      throw GeometryError("level " + std::to_string(l + 1) + " does not halve level " + std::to_string(l));
    const auto& d = down[l];
    const auto& u = up[l];
    if (d.rows() != m || d.cols() != n || u.rows() != n || u.cols() != m)
      throw GeometryError("resampling operators of level " + std::to_string(l) + " have wrong shape");
    for (std::size_t r = 0; r < m; ++r)
      if (d.row_cols(r).size() != 1 || d.row_values(r)[0] != 1.0)
        throw GeometryError("down operator row " + std::to_string(r) + " is not one-hot");
    for (std::size_t r = 0; r < n; ++r) {
      const auto vals = u.row_values(r);
      double sum = 0.0;
      for (double w : vals) {
        if (w < 0.0) throw GeometryError("negative upsampling weight");
        sum += w;
      }
      if (vals.size() > 3 || vals.empty() || std::abs(sum - 1.0) > 1e-12)
        throw GeometryError("upsampling row " + std::to_string(r) + " is not barycentric");
    }
  }
}

MeshHierarchy build_hierarchy(const Mesh& input, std::size_t levels, const std::vector<std::size_t>& spiral_lengths,
                              std::size_t finest) {
  if (levels == 0) throw ConfigError("hierarchy needs at least one level");
  if (spiral_lengths.size() != levels)
    throw ConfigError("expected " + std::to_string(levels) + " spiral lengths, got " +
                      std::to_string(spiral_lengths.size()));
  MeshHierarchy h;
  if (finest > 0 && finest < input.vertex_count()) {
    Decimation pre = decimate_qem(input, finest);
    h.levels.push_back(std::move(pre.mesh));
    h.source_vertices = std::move(pre.source);
  } else {
    input.validate();
    h.levels.push_back(input);
    for (std::size_t v = 0; v < input.vertex_count(); ++v) h.source_vertices.push_back(static_cast<int>(v));
  }
  for (std::size_t l = 1; l < levels; ++l) {
    const Mesh& fine = h.levels.back();
    const std::size_t target = (fine.vertex_count() + 1) / 2;
    if (target < 4)
      throw ConfigError("mesh with " + std::to_string(h.levels.front().vertex_count()) + " vertices is too small for " +
                        std::to_string(levels) + " levels");
    Decimation dec = decimate_qem(fine, target);
    h.up.push_back(build_upsample(fine, dec.mesh, dec.down));
    h.down.push_back(std::move(dec.down));
    h.levels.push_back(std::move(dec.mesh));
  }
  for (std::size_t l = 0; l < levels; ++l) h.spirals.push_back(enumerate_spirals(h.levels[l], spiral_lengths[l]));
  h.validate();
  return h;
}

void write_sparse(const std::filesystem::path& path, const numeric::CsrMatrix& m) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "# %zu %zu\n", m.rows(), m.cols());
  for (const auto& t : m.triplets()) std::fprintf(f, "%zu %zu %.17g\n", t.row, t.col, t.value);
  if (std::fclose(f) != 0) throw IoError("cannot write " + path.string());
}

numeric::CsrMatrix read_sparse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t rows = 0, cols = 0;
  char hash = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> hash >> rows >> cols) || hash != '#')
    throw IoError(path.string() + ": missing '# rows cols' header");
  std::vector<numeric::Triplet> trip;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    numeric::Triplet t{};
    if (!(std::istringstream(line) >> t.row >> t.col >> t.value) || t.row >= rows || t.col >= cols)
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad entry");
    trip.push_back(t);
  }
  return numeric::CsrMatrix(rows, cols, std::move(trip));
}

namespace {
std::string level_file(const char* prefix, std::size_t l, const char* ext) {
  return std::string(prefix) + "_" + std::to_string(l) + ext;
}
}  // namespace

void save_hierarchy(const MeshHierarchy& h, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json meta{{"format_version", 1}, {"sizes", json::array()}, {"spiral_lengths", json::array()},
            {"source_vertices", h.source_vertices}};
  for (std::size_t l = 0; l < h.level_count(); ++l) {
    meta["sizes"].push_back(h.size(l));
    meta["spiral_lengths"].push_back(h.spirals[l].length);
    mesh::write_obj(dir / level_file("level", l, ".obj"), h.levels[l]);
    json sp{{"length", h.spirals[l].length}, {"pad", SpiralTable::kPad}, {"spirals", json::array()}};
    for (std::size_t v = 0; v < h.size(l); ++v) {
      const auto s = h.spirals[l][v];
      sp["spirals"].push_back(std::vector<int>(s.begin(), s.end()));
    }
    std::ofstream(dir / level_file("spirals", l, ".json")) << sp.dump() << '\n';
    if (l + 1 < h.level_count()) {
      write_sparse(dir / level_file("down", l, ".txt"), h.down[l]);
      write_sparse(dir / level_file("up", l, ".txt"), h.up[l]);
    }
  }
  std::ofstream out(dir / "hierarchy.json");
  out << meta.dump(1) << '\n';
  if (!out) throw IoError("cannot write " + (dir / "hierarchy.json").string());
}

MeshHierarchy load_hierarchy(const std::filesystem::path& dir) {
  std::ifstream in(dir / "hierarchy.json");
  if (!in) throw IoError("no hierarchy.json in " + dir.string());
  MeshHierarchy h;
  try {
    const json meta = json::parse(in);
    if (meta.value("format_version", 0) != 1) throw IoError("unsupported hierarchy format in " + dir.string());
    const auto sizes = meta.at("sizes").get<std::vector<std::size_t>>();
    h.source_vertices = meta.at("source_vertices").get<std::vector<int>>();
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      h.levels.push_back(mesh::read_obj(dir / level_file("level", l, ".obj")));
      std::ifstream sf(dir / level_file("spirals", l, ".json"));
      if (!sf) throw IoError("missing spiral table for level " + std::to_string(l));
      const json sp = json::parse(sf);
      SpiralTable t;
      t.length = sp.at("length").get<std::size_t>();
      for (const auto& row : sp.at("spirals")) {
        const auto r = row.get<std::vector<int>>();
        if (r.size() != t.length) throw IoError("spiral row of wrong length at level " + std::to_string(l));
        t.indices.insert(t.indices.end(), r.begin(), r.end());
      }
      h.spirals.push_back(std::move(t));
      if (l + 1 < sizes.size()) {
        h.down.push_back(read_sparse(dir / level_file("down", l, ".txt")));
        h.up.push_back(read_sparse(dir / level_file("up", l, ".txt")));
      }
    }
  } catch (const json::exception& e) {
    throw IoError("malformed hierarchy in " + dir.string() + ": " + e.what());
  }
  h.validate();
  return h;
}

}  // namespace msmr::hierarchy
