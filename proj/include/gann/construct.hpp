#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gann/dataset.hpp"
#include "gann/graph.hpp"

namespace gann {

/// KGraph-style refinement parameters: k neighbors per vertex, pool size l,
/// per-iteration forward sample and reverse sample sizes.
struct NNDescentParams {
  Eigen::Index k = 20;
  Eigen::Index l = 40;
  int iterations = 8;
  int sample = 10;
  int reverse = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Neighbor selection rule (C3). alpha applies to rng_alpha, theta to
/// angle_threshold, kappa to dpg_anglesum, max_degree to the rest.
struct SelectionRule {
  enum class Kind { distance_topk, rng_alpha, angle_threshold, dpg_anglesum, mst };
  Kind kind = Kind::distance_topk;
  std::size_t max_degree = 25;
  float alpha = 1.0f;
  double theta = 1.0471975511965976;  // 60 degrees
  std::size_t kappa = 10;

  void validate() const;
};

/// Angle at p between the directions towards x and y, in radians, computed
/// with double accumulation and a clamped arccos. A zero-length difference
/// (duplicate point) yields pi so it never blocks selection.
double angle_at(const VectorSet& base, VertexId p, VertexId x, VertexId y);

/// k distinct random non-self neighbors per vertex. Per-vertex generator
/// streams make the result independent of thread count.
Graph init_random(const VectorSet& base, Eigen::Index k, std::uint64_t seed);

/// NN-Descent refinement starting from init_random(k, seed). With
/// iterations == 0 this is exactly init_random. on_iteration, when set,
/// receives the truncated-to-k graph after every iteration (0 = initial).
Graph init_nn_descent(
    const VectorSet& base, const NNDescentParams& params,
    const std::function<void(int, const Graph&)>& on_iteration = {});

/// Recursive two-pivot division: pick two random points, send every point
/// to the nearer pivot, recurse until a part has at most min_cluster
/// points. The returned leaves partition [0, n).
std::vector<std::vector<VertexId>> divide_dataset(const VectorSet& base,
                                                  std::size_t min_cluster,
                                                  std::uint64_t seed);

enum class CandidateStrategy { neighbors, expansion, search };

/// Candidate neighbor acquisition (C2) for vertex p over graph g. Entries
/// carry distances to p and come back sorted ascending by (distance, id).
/// For the search strategy the seed is p's first neighbor, or a vertex
/// derived from p's id when the adjacency is empty.
std::vector<Neighbor> acquire_candidates(const Graph& g, const VectorSet& base,
                                         VertexId p, CandidateStrategy strategy,
                                         std::size_t size,
                                         std::size_t search_c);

/// Neighbor selection (C3). candidates must be sorted ascending by
/// (distance to p, id) with no self entries.
std::vector<Neighbor> select_neighbors(VertexId p,
                                       const std::vector<Neighbor>& candidates,
                                       const SelectionRule& rule,
                                       const VectorSet& base);

struct MstEdge {
  VertexId u = 0;
  VertexId v = 0;
  float weight = 0.0f;
};

/// Euclidean minimum spanning tree over the given points (Kruskal,
/// ties broken by lexicographic edge ids). |edges| = |points| - 1.
std::vector<MstEdge> build_mst(const std::vector<VertexId>& points,
                               const VectorSet& base);

/// NGT-style degree reduction: an edge (p, n) is removed when some
/// two-edge path p -> x -> n exists in the current graph with
/// max(d(p,x), d(x,n)) < d(p,n). Edges with no such path are kept.
Graph path_adjustment(const Graph& g, const VectorSet& base);

/// Depth-first reachability repair (C5): while vertices remain unreachable
/// from root, connect the smallest-id unreached vertex to its nearest
/// reached vertex and resume the traversal. search_c is accepted for
/// interface compatibility; at this scale the nearest reached vertex is
/// found by an exact scan of the reached set.
Graph ensure_connectivity_dfs(const Graph& g, const VectorSet& base,
                              VertexId root, std::size_t search_c);

}  // namespace gann
