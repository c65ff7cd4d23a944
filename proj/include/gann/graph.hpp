#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gann/dataset.hpp"
#include "gann/types.hpp"

namespace gann {

/// One out-edge: target id plus the cached Euclidean distance between the
/// endpoints. Ordered by (distance, id).
struct Neighbor {
  VertexId id = 0;
  float dist = 0.0f;

  friend bool operator==(const Neighbor& a, const Neighbor& b) = default;
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.id < b.id;
  }
};

/// Directed adjacency lists, one per vertex, each sorted ascending by
/// (distance, id). Immutable after construction by convention.
struct Graph {
  std::vector<std::vector<Neighbor>> adjacency;

  Graph() = default;
  explicit Graph(std::size_t vertex_count) : adjacency(vertex_count) {}

  std::size_t vertex_count() const { return adjacency.size(); }
  std::size_t edge_count() const;
};

/// Checks the structural invariants every graph in this project must hold:
/// no self-loops, in-range distinct neighbor ids, (distance, id) ordering,
/// and cached distances matching the data (spot-sampled).
/// Throws std::invalid_argument on the first violation.
void validate_graph(const Graph& g, const VectorSet& base,
                    std::size_t distance_spot_checks = 256);

/// Exact k-nearest-neighbor graph by pairwise scan, ties by smaller id.
Graph build_exact_knng(const VectorSet& base, Eigen::Index k);

/// |E(g) ∩ E(exact)| / |E(exact)| over directed edges.
double graph_quality(const Graph& g, const Graph& exact);

/// Fraction of vertices whose true nearest neighbor (first entry of the
/// exact KNNG list) appears in their adjacency. Reported alongside gq for
/// comparison; gq is the normative quality metric.
double nearest_neighbor_hit_rate(const Graph& g, const Graph& exact);

struct DegreeStats {
  double ad = 0.0;
  std::size_t d_max = 0;
  std::size_t d_min = 0;
};

DegreeStats degree_stats(const Graph& g);

/// Number of weakly connected components (edges treated as undirected).
std::size_t connected_components(const Graph& g);

}  // namespace gann
