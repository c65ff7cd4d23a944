#include "gann/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "gann/distance.hpp"
#include "gann/parallel.hpp"
#include "gann/random.hpp"

namespace gann {

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : adjacency) total += list.size();
  return total;
}

void validate_graph(const Graph& g, const VectorSet& base,
                    std::size_t distance_spot_checks) {
  const std::size_t n = g.vertex_count();
  if (n != static_cast<std::size_t>(base.count())) {
    throw std::invalid_argument("validate_graph: vertex count != base count");
  }
  for (std::size_t v = 0; v < n; ++v) {
    const auto& list = g.adjacency[v];
    std::unordered_set<VertexId> seen;
    seen.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Neighbor& nb = list[i];
      if (nb.id == v) {
        throw std::invalid_argument("validate_graph: self-loop at vertex " +
                                    std::to_string(v));
      }
      if (nb.id >= n) {
        throw std::invalid_argument("validate_graph: neighbor id out of range");
      }
      if (!seen.insert(nb.id).second) {
        throw std::invalid_argument("validate_graph: duplicate neighbor id");
      }
      if (i > 0 && nb < list[i - 1]) {
        throw std::invalid_argument(
            "validate_graph: adjacency not sorted by (distance, id)");
      }
    }
  }
  // Spot-sample cached distances against the data.
  const std::size_t edges = g.edge_count();
  if (edges == 0 || distance_spot_checks == 0) return;
  SplitMix64 rng(0x5b07c3ec5ULL);
  for (std::size_t s = 0; s < distance_spot_checks; ++s) {
    std::size_t v = rng.next_below(n);
    if (g.adjacency[v].empty()) continue;
    const Neighbor& nb = g.adjacency[v][rng.next_below(g.adjacency[v].size())];
    float expect = euclidean_distance(base.vec(static_cast<Eigen::Index>(v)),
                                      base.vec(nb.id));
    if (nb.dist != expect) {
      throw std::invalid_argument("validate_graph: cached distance mismatch");
    }
  }
}

Graph build_exact_knng(const VectorSet& base, Eigen::Index k) {
  const Eigen::Index n = base.count();
  if (k < 1 || k >= n) {
    throw std::invalid_argument("build_exact_knng: require 1 <= k < count");
  }
  Graph g(static_cast<std::size_t>(n));
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t v) {
    const auto x = base.vec(static_cast<Eigen::Index>(v));
    std::vector<Neighbor> heap;  // max-heap on (dist, id), worst on top
    heap.reserve(k + 1);
    for (Eigen::Index u = 0; u < n; ++u) {
      if (static_cast<std::size_t>(u) == v) continue;
      Neighbor cand{static_cast<VertexId>(u),
                    euclidean_distance(x, base.vec(u))};
      if (static_cast<Eigen::Index>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    std::sort_heap(heap.begin(), heap.end());
    g.adjacency[v] = std::move(heap);
  });
  return g;
}

double graph_quality(const Graph& g, const Graph& exact) {
  if (g.vertex_count() != exact.vertex_count()) {
    throw std::invalid_argument("graph_quality: vertex count mismatch");
  }
  std::size_t exact_edges = exact.edge_count();
  if (exact_edges == 0) return 0.0;
  std::size_t hit = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    std::unordered_set<VertexId> ids;
    ids.reserve(g.adjacency[v].size());
    for (const Neighbor& nb : g.adjacency[v]) ids.insert(nb.id);
    for (const Neighbor& nb : exact.adjacency[v]) hit += ids.count(nb.id);
  }
  return static_cast<double>(hit) / static_cast<double>(exact_edges);
}

double nearest_neighbor_hit_rate(const Graph& g, const Graph& exact) {
  if (g.vertex_count() != exact.vertex_count()) {
    throw std::invalid_argument("nearest_neighbor_hit_rate: vertex count mismatch");
  }
  if (g.vertex_count() == 0) return 0.0;
  std::size_t hit = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (exact.adjacency[v].empty()) continue;
    VertexId nn = exact.adjacency[v].front().id;
    for (const Neighbor& nb : g.adjacency[v]) {
      if (nb.id == nn) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(g.vertex_count());
}

DegreeStats degree_stats(const Graph& g) {
  if (g.vertex_count() == 0) {
    throw std::invalid_argument("degree_stats: empty graph");
  }
  DegreeStats s;
  s.d_min = g.adjacency.front().size();
  std::size_t total = 0;
  for (const auto& list : g.adjacency) {
    total += list.size();
    s.d_max = std::max(s.d_max, list.size());
    s.d_min = std::min(s.d_min, list.size());
  }
  s.ad = static_cast<double>(total) / static_cast<double>(g.vertex_count());
  return s;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

std::size_t connected_components(const Graph& g) {
  const std::size_t n = g.vertex_count();
  if (n == 0) return 0;
  UnionFind uf(n);
  std::size_t components = n;
  for (std::size_t v = 0; v < n; ++v) {
    for (const Neighbor& nb : g.adjacency[v]) {
      if (uf.unite(v, nb.id)) --components;
    }
  }
  return components;
}

}  // namespace gann
