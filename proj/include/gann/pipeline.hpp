#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gann/construct.hpp"
#include "gann/dataset.hpp"
#include "gann/graph.hpp"
#include "gann/search.hpp"

namespace gann {

enum class InitKind { random_init, nn_descent, exact_knng, divide_mst };
enum class CandidateKind { none, neighbors, expansion, search };
enum class RoutingKind { bfs, range, guided, backtrack, two_stage };
enum class RootPolicy { centroid, zero };

/// Full description of one algorithm: the C1-C7 component choices plus
/// their parameters. Serializes to a flat key=value text format; see
/// to_kv() for the stable key names.
struct PipelineConfig {
  // C1: initialization
  InitKind c1 = InitKind::nn_descent;
  Eigen::Index c1_k = 20;  // random / exact_knng degree
  NNDescentParams nnd;
  std::size_t divide_repeats = 10;
  std::size_t divide_min_cluster = 500;

  // C2: candidate neighbor acquisition
  CandidateKind c2 = CandidateKind::none;
  std::size_t c2_size = 100;
  std::size_t c2_search_c = 100;

  // C3: neighbor selection (c3_enabled=false keeps the C1 output)
  bool c3_enabled = false;
  SelectionRule c3;
  float c3_second_pass_alpha = 0.0f;  // 0 disables the second rng_alpha pass

  bool apply_path_adjustment = false;
  bool add_reverse_edges = false;

  // C5: connectivity
  bool c5 = false;
  RootPolicy c5_root = RootPolicy::centroid;

  // C4/C6: seed strategy (the per-index seed stream derives from rng_seed)
  SeedStrategy seed_strategy;

  // C7: routing
  RoutingKind c7 = RoutingKind::bfs;
  float c7_epsilon = 0.2f;
  std::size_t c7_backtrack_budget = 10;
  std::size_t c7_stage1_hops = 64;
  // Top up the initial candidate pool to capacity c with index-fixed random
  // vertices, the way the reference KGraph/NSG searches initialize their
  // pools. Range routing ignores this (it has no capacity).
  bool pad_pool_to_c = true;

  bool deterministic = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// A built graph index. Holds a non-owning reference to the base vectors;
/// the caller keeps them alive for the index lifetime.
struct Index {
  Graph graph;
  const VectorSet* base = nullptr;
  PipelineConfig config;
  double build_seconds = 0.0;
  std::vector<VertexId> seeds;      // resolved at build time (C4)
  std::vector<VertexId> pad_pool;   // seeded id permutation for pool padding
  std::size_t repair_edges = 0;     // edges added by the C5 repair
};

/// Named component mappings, including the optimized two-stage algorithm.
/// Valid names: kgraph, dpg, nsg, nssg, vamana, hcnng_lite, oa.
PipelineConfig preset(const std::string& name);

Index build_index(const VectorSet& base, const PipelineConfig& config);

/// Wraps an already-built graph (e.g. loaded from disk) into an Index,
/// resolving seeds the same way build_index does.
Index attach_index(Graph graph, const VectorSet& base, PipelineConfig config);

SearchResult query(const Index& index, Eigen::Ref<const Eigen::RowVectorXf> q,
                   std::size_t k, std::size_t c,
                   const SearchHooks* hooks = nullptr);

std::string to_kv(const PipelineConfig& config);
PipelineConfig config_from_kv(const std::string& text);
void save_config(const std::string& path, const PipelineConfig& config);
PipelineConfig load_config(const std::string& path);

}  // namespace gann
