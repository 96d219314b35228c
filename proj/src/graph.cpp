#include "artic/graph.hpp"

#include <algorithm>
#include <numeric>

namespace artic {

bool KinematicGraph::has_part(int id) const {
  return std::find(parts.begin(), parts.end(), id) != parts.end();
}

const KinematicEdge* KinematicGraph::find_edge(int a, int b) const {
  for (const auto& e : edges)
    if ((e.i == a && e.j == b) || (e.i == b && e.j == a)) return &e;
  return nullptr;
}

bool KinematicGraph::is_spanning_tree() const {
  if (parts.empty()) return edges.empty();
  if (edges.size() + 1 != parts.size()) return false;
  std::map<int, int> index;
  for (std::size_t k = 0; k < parts.size(); ++k)
    if (!index.emplace(parts[k], int(k)).second) return false;

  std::vector<int> parent(parts.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    auto a = index.find(e.i), b = index.find(e.j);
    if (a == index.end() || b == index.end()) return false;
    const int ra = find(a->second), rb = find(b->second);
    if (ra == rb) return false;
    parent[ra] = rb;
  }
  return true;
}

}  // namespace artic
