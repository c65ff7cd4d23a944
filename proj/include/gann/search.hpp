#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gann/dataset.hpp"
#include "gann/graph.hpp"

namespace gann {

struct SeedStrategy {
  enum class Kind { random, centroid, fixed };
  Kind kind = Kind::random;
  Eigen::Index count = 1;
  std::uint64_t seed = 0;
  std::vector<VertexId> fixed_ids;
};

/// Per-query counters. ndc counts each vertex whose distance to the query
/// was computed, exactly once (visited-set dedup). hops counts vertex
/// expansions, i.e. the query path length.
struct SearchTrace {
  std::size_t ndc = 0;
  std::size_t hops = 0;
  std::size_t c = 0;
};

struct SearchResult {
  std::vector<Neighbor> neighbors;  // ascending (distance, id), no duplicates
  SearchTrace trace;

  std::vector<VertexId> ids() const;
};

/// Test instrumentation: called once per distance evaluation against the
/// query, with the vertex id.
struct SearchHooks {
  std::function<void(VertexId)> on_distance_eval;
};

std::vector<VertexId> acquire_seeds(const Graph& g, const VectorSet& base,
                                    const SeedStrategy& strategy);

/// Best first search: bounded candidate pool of capacity c, repeatedly
/// expand the nearest unexpanded candidate, stop when every candidate in
/// the pool has been expanded. Returns the k nearest visited vertices.
SearchResult best_first_search(const Graph& g, const VectorSet& base,
                               Eigen::Ref<const Eigen::RowVectorXf> q,
                               std::size_t c,
                               const std::vector<VertexId>& seeds,
                               std::size_t k,
                               const SearchHooks* hooks = nullptr);

/// Best-first expansion with no pool capacity; a vertex is enqueued only
/// while its distance is below (1+epsilon) times the current k-th best.
SearchResult range_search(const Graph& g, const VectorSet& base,
                          Eigen::Ref<const Eigen::RowVectorXf> q,
                          float epsilon, const std::vector<VertexId>& seeds,
                          std::size_t k, const SearchHooks* hooks = nullptr);

/// Like best_first_search, but each expansion evaluates only the nearest
/// neighbor plus the neighbors lying on the query's side of the expanded
/// vertex along its dominant coordinate.
SearchResult guided_search(const Graph& g, const VectorSet& base,
                           Eigen::Ref<const Eigen::RowVectorXf> q,
                           std::size_t c, const std::vector<VertexId>& seeds,
                           std::size_t k, const SearchHooks* hooks = nullptr,
                           std::size_t max_hops = SIZE_MAX);

/// Best first search, then up to `budget` extra expansions of the best
/// evaluated-but-never-expanded vertices, resuming the main loop after
/// each. budget 0 is bitwise identical to best_first_search.
SearchResult backtrack_search(const Graph& g, const VectorSet& base,
                              Eigen::Ref<const Eigen::RowVectorXf> q,
                              std::size_t c,
                              const std::vector<VertexId>& seeds,
                              std::size_t k, std::size_t budget = 10,
                              const SearchHooks* hooks = nullptr);

/// Guided search for at most stage1_hops expansions, then best first
/// search re-seeded with the guided result set (shared visited set, so ndc
/// still counts unique vertices). stage1_hops 0 degenerates to plain BFS.
SearchResult two_stage_search(const Graph& g, const VectorSet& base,
                              Eigen::Ref<const Eigen::RowVectorXf> q,
                              std::size_t c,
                              const std::vector<VertexId>& seeds,
                              std::size_t k, std::size_t stage1_hops,
                              const SearchHooks* hooks = nullptr);

}  // namespace gann
