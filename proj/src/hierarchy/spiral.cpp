#include "msmr/hierarchy/spiral.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "msmr/error.hpp"

namespace msmr::hierarchy {

std::vector<int> ordered_ring(const mesh::Mesh& mesh, const std::vector<std::vector<int>>& vertex_faces, int v) {
  std::map<int, int> succ;
  std::set<int> has_pred, remaining;
  for (int f : vertex_faces[v]) {
    const mesh::Face& t = mesh.faces[f];
    const int k = static_cast<int>(std::find(t.begin(), t.end(), v) - t.begin());
    const int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
    succ[a] = b;
    has_pred.insert(b);
    remaining.insert(a);
    remaining.insert(b);
  }
  std::vector<int> out;
  while (!remaining.empty()) {
    // Open fans start where no predecessor exists; closed ones at the smallest index.
    int start = *remaining.begin();
    for (int u : remaining)
      if (!has_pred.count(u)) {
        start = u;
        break;
      }
    for (int u = start; remaining.count(u);) {
      out.push_back(u);
      remaining.erase(u);
      const auto it = succ.find(u);
      if (it == succ.end()) break;
      u = it->second;
    }
  }
  return out;
}

SpiralTable enumerate_spirals(const mesh::Mesh& mesh, std::size_t length) {
  if (length == 0) throw ConfigError("spiral length must be at least 1");
  const auto vf = mesh.vertex_faces();
  const std::size_t n = mesh.vertex_count();
  std::vector<std::vector<int>> rings(n);
  for (std::size_t v = 0; v < n; ++v) rings[v] = ordered_ring(mesh, vf, static_cast<int>(v));

  SpiralTable table;
  table.length = length;
  table.indices.assign(n * length, SpiralTable::kPad);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<int> seq{static_cast<int>(v)};
    std::vector<bool> seen(n, false);
    seen[v] = true;
    std::vector<int> frontier{static_cast<int>(v)};
    while (seq.size() < length && !frontier.empty()) {
      std::vector<int> next;
      for (int u : frontier)
        for (int w : rings[u])
          if (!seen[w]) {
            seen[w] = true;
            seq.push_back(w);
            next.push_back(w);
          }
      frontier = std::move(next);
    }
    seq.resize(std::min(seq.size(), length));
    std::copy(seq.begin(), seq.end(), table.indices.begin() + static_cast<std::ptrdiff_t>(v * length));
  }
  return table;
}

}  // namespace msmr::hierarchy
