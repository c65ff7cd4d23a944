#include "gann/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "gann/distance.hpp"
#include "gann/random.hpp"

namespace gann {

std::vector<VertexId> SearchResult::ids() const {
  std::vector<VertexId> out;
  out.reserve(neighbors.size());
  for (const Neighbor& nb : neighbors) out.push_back(nb.id);
  return out;
}

std::vector<VertexId> acquire_seeds(const Graph& g, const VectorSet& base,
                                    const SeedStrategy& strategy) {
  const std::size_t n = g.vertex_count();
  if (n == 0 || n != static_cast<std::size_t>(base.count())) {
    throw std::invalid_argument("acquire_seeds: empty or mismatched graph");
  }
  switch (strategy.kind) {
    case SeedStrategy::Kind::fixed: {
      if (strategy.fixed_ids.empty()) {
        throw std::invalid_argument("acquire_seeds: fixed_ids empty");
      }
      for (VertexId id : strategy.fixed_ids) {
        if (id >= n) throw std::invalid_argument("acquire_seeds: id out of range");
      }
      return strategy.fixed_ids;
    }
    case SeedStrategy::Kind::centroid: {
      Eigen::RowVectorXd mean = base.data.cast<double>().colwise().mean();
      Eigen::RowVectorXf meanf = mean.cast<float>();
      VertexId best = 0;
      float best_d = std::numeric_limits<float>::infinity();
      for (Eigen::Index i = 0; i < base.count(); ++i) {
        float d = euclidean_distance(meanf, base.vec(i));
        if (d < best_d) {
          best_d = d;
          best = static_cast<VertexId>(i);
        }
      }
      return {best};
    }
    case SeedStrategy::Kind::random:
    default: {
      if (strategy.count < 1 ||
          static_cast<std::size_t>(strategy.count) > n) {
        throw std::invalid_argument("acquire_seeds: bad seed count");
      }
      std::vector<VertexId> out;
      std::unordered_set<VertexId> used;
      SplitMix64 rng(strategy.seed);
      while (out.size() < static_cast<std::size_t>(strategy.count)) {
        VertexId id = static_cast<VertexId>(rng.next_below(n));
        if (used.insert(id).second) out.push_back(id);
      }
      return out;
    }
  }
}

namespace {

struct PoolEntry {
  float dist;
  VertexId id;
  bool expanded;
};

inline bool entry_less(const PoolEntry& a, const PoolEntry& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  return a.id < b.id;
}

inline int sign_of(float x) { return (x > 0.0f) - (x < 0.0f); }

/// Shared machinery for the pool-based routing strategies. The pool is a
/// sorted array bounded by the capacity c; entries pushed beyond the bound
/// go to the reserve when backtracking is enabled.
class PoolSearch {
 public:
  PoolSearch(const Graph& g, const VectorSet& base,
             Eigen::Ref<const Eigen::RowVectorXf> q, std::size_t capacity,
             const SearchHooks* hooks, bool keep_reserve)
      : g_(g), base_(base), q_(q), capacity_(capacity), hooks_(hooks),
        keep_reserve_(keep_reserve) {
    trace_.c = capacity;
    pool_.reserve(capacity + 1);
  }

  void seed_with(const std::vector<VertexId>& seeds) {
    for (VertexId s : seeds) {
      if (s >= g_.vertex_count()) {
        throw std::invalid_argument("search: seed id out of range");
      }
      if (!visited_.insert(s).second) continue;
      insert(evaluate(s), s);
    }
  }

  /// Re-inserts already-evaluated entries (two-stage handoff).
  void reseed_known(const std::vector<Neighbor>& entries) {
    pool_.clear();
    scan_from_ = 0;
    for (const Neighbor& nb : entries) insert(nb.dist, nb.id);
  }

  /// Main loop. guided restricts each expansion to the directional subset;
  /// max_hops bounds the number of expansions performed by this call.
  void run(bool guided, std::size_t max_hops = SIZE_MAX) {
    std::size_t hops_done = 0;
    while (hops_done < max_hops) {
      std::size_t i = next_unexpanded();
      if (i == pool_.size()) return;  // every candidate in the pool expanded
      pool_[i].expanded = true;
      ++trace_.hops;
      ++hops_done;
      expand(pool_[i].id, guided);
    }
  }

  /// Pops the nearest evaluated-but-unexpanded vertex off the reserve and
  /// expands it. Returns false when the reserve is exhausted.
  bool backtrack_step() {
    if (reserve_.empty()) return false;
    Neighbor next = reserve_.top();
    reserve_.pop();
    ++trace_.hops;
    expand(next.id, /*guided=*/false);
    return true;
  }

  SearchResult results(std::size_t k) const {
    SearchResult out;
    const std::size_t take = std::min(k, pool_.size());
    out.neighbors.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
      out.neighbors.push_back(Neighbor{pool_[i].id, pool_[i].dist});
    }
    out.trace = trace_;
    return out;
  }

  std::vector<Neighbor> top(std::size_t k) const { return results(k).neighbors; }

  SearchTrace& trace() { return trace_; }

 private:
  float evaluate(VertexId id) {
    ++trace_.ndc;
    if (hooks_ && hooks_->on_distance_eval) hooks_->on_distance_eval(id);
    return euclidean_distance(q_, base_.vec(id));
  }

  void insert(float dist, VertexId id) {
    PoolEntry e{dist, id, false};
    auto pos = std::lower_bound(pool_.begin(), pool_.end(), e, entry_less);
    std::size_t idx = static_cast<std::size_t>(pos - pool_.begin());
    if (idx >= capacity_) {
      if (keep_reserve_) reserve_.push(Neighbor{id, dist});
      return;
    }
    pool_.insert(pos, e);
    if (pool_.size() > capacity_) {
      if (keep_reserve_) {
        reserve_.push(Neighbor{pool_.back().id, pool_.back().dist});
      }
      pool_.pop_back();
    }
    scan_from_ = std::min(scan_from_, idx);
  }

  std::size_t next_unexpanded() {
    while (scan_from_ < pool_.size() && pool_[scan_from_].expanded) {
      ++scan_from_;
    }
    return scan_from_;
  }

  void expand(VertexId v, bool guided) {
    const auto& list = g_.adjacency[v];
    if (list.empty()) return;
    Eigen::Index pivot = 0;
    int wanted = 0;
    if (guided) {
      const auto x = base_.vec(v);
      (q_ - x).cwiseAbs().maxCoeff(&pivot);
      wanted = sign_of(q_(pivot) - x(pivot));
    }
    for (std::size_t e = 0; e < list.size(); ++e) {
      const Neighbor& nb = list[e];
      if (guided && e > 0) {
        float step = base_.data(nb.id, pivot) - base_.data(v, pivot);
        if (sign_of(step) != wanted) continue;
      }
      if (!visited_.insert(nb.id).second) continue;
      insert(evaluate(nb.id), nb.id);
    }
  }

  const Graph& g_;
  const VectorSet& base_;
  Eigen::Ref<const Eigen::RowVectorXf> q_;
  std::size_t capacity_;
  const SearchHooks* hooks_;
  bool keep_reserve_;

  std::vector<PoolEntry> pool_;
  std::size_t scan_from_ = 0;
  std::unordered_set<VertexId> visited_;
  SearchTrace trace_;

  struct ReserveGreater {
    bool operator()(const Neighbor& a, const Neighbor& b) const { return b < a; }
  };
  std::priority_queue<Neighbor, std::vector<Neighbor>, ReserveGreater> reserve_;
};

void check_search_args(std::size_t c, std::size_t k,
                       const std::vector<VertexId>& seeds) {
  if (k < 1 || c < k) throw std::invalid_argument("search: require c >= k >= 1");
  if (seeds.empty()) throw std::invalid_argument("search: seeds empty");
}

}  // namespace

SearchResult best_first_search(const Graph& g, const VectorSet& base,
                               Eigen::Ref<const Eigen::RowVectorXf> q,
                               std::size_t c,
                               const std::vector<VertexId>& seeds,
                               std::size_t k, const SearchHooks* hooks) {
  check_search_args(c, k, seeds);
  PoolSearch search(g, base, q, c, hooks, /*keep_reserve=*/false);
  search.seed_with(seeds);
  search.run(/*guided=*/false);
  return search.results(k);
}

SearchResult guided_search(const Graph& g, const VectorSet& base,
                           Eigen::Ref<const Eigen::RowVectorXf> q,
                           std::size_t c, const std::vector<VertexId>& seeds,
                           std::size_t k, const SearchHooks* hooks,
                           std::size_t max_hops) {
  check_search_args(c, k, seeds);
  PoolSearch search(g, base, q, c, hooks, /*keep_reserve=*/false);
  search.seed_with(seeds);
  search.run(/*guided=*/true, max_hops);
  return search.results(k);
}

SearchResult backtrack_search(const Graph& g, const VectorSet& base,
                              Eigen::Ref<const Eigen::RowVectorXf> q,
                              std::size_t c,
                              const std::vector<VertexId>& seeds,
                              std::size_t k, std::size_t budget,
                              const SearchHooks* hooks) {
  check_search_args(c, k, seeds);
  PoolSearch search(g, base, q, c, hooks, /*keep_reserve=*/budget > 0);
  search.seed_with(seeds);
  search.run(/*guided=*/false);
  for (std::size_t b = 0; b < budget; ++b) {
    if (!search.backtrack_step()) break;
    search.run(/*guided=*/false);
  }
  return search.results(k);
}

SearchResult two_stage_search(const Graph& g, const VectorSet& base,
                              Eigen::Ref<const Eigen::RowVectorXf> q,
                              std::size_t c,
                              const std::vector<VertexId>& seeds,
                              std::size_t k, std::size_t stage1_hops,
                              const SearchHooks* hooks) {
  check_search_args(c, k, seeds);
  if (stage1_hops == 0) return best_first_search(g, base, q, c, seeds, k, hooks);
  PoolSearch search(g, base, q, c, hooks, /*keep_reserve=*/false);
  search.seed_with(seeds);
  search.run(/*guided=*/true, stage1_hops);
  search.reseed_known(search.top(k));
  search.run(/*guided=*/false);
  return search.results(k);
}

SearchResult range_search(const Graph& g, const VectorSet& base,
                          Eigen::Ref<const Eigen::RowVectorXf> q,
                          float epsilon, const std::vector<VertexId>& seeds,
                          std::size_t k, const SearchHooks* hooks) {
  if (epsilon < 0.0f) throw std::invalid_argument("range_search: epsilon < 0");
  if (k < 1) throw std::invalid_argument("range_search: k < 1");
  if (seeds.empty()) throw std::invalid_argument("range_search: seeds empty");

  SearchTrace trace;
  std::unordered_set<VertexId> visited;
  auto evaluate = [&](VertexId id) {
    ++trace.ndc;
    if (hooks && hooks->on_distance_eval) hooks->on_distance_eval(id);
    return euclidean_distance(q, base.vec(id));
  };

  struct Greater {
    bool operator()(const Neighbor& a, const Neighbor& b) const { return b < a; }
  };
  std::priority_queue<Neighbor, std::vector<Neighbor>, Greater> frontier;
  std::vector<Neighbor> best;  // sorted ascending, at most k entries
  const float scale = 1.0f + epsilon;

  auto radius = [&] {
    return best.size() == k ? best.back().dist
                            : std::numeric_limits<float>::infinity();
  };
  auto offer = [&](VertexId id, float d) {
    Neighbor nb{id, d};
    auto pos = std::lower_bound(best.begin(), best.end(), nb);
    if (pos == best.end() && best.size() >= k) return;
    best.insert(pos, nb);
    if (best.size() > k) best.pop_back();
  };

  for (VertexId s : seeds) {
    if (s >= g.vertex_count()) {
      throw std::invalid_argument("range_search: seed id out of range");
    }
    if (!visited.insert(s).second) continue;
    float d = evaluate(s);
    frontier.push(Neighbor{s, d});
    offer(s, d);
  }

  while (!frontier.empty()) {
    Neighbor cur = frontier.top();
    if (cur.dist > scale * radius()) break;
    frontier.pop();
    ++trace.hops;
    for (const Neighbor& edge : g.adjacency[cur.id]) {
      if (!visited.insert(edge.id).second) continue;
      float d = evaluate(edge.id);
      offer(edge.id, d);
      if (d < scale * radius()) frontier.push(Neighbor{edge.id, d});
    }
  }

  SearchResult out;
  out.neighbors = std::move(best);
  out.trace = trace;
  return out;
}

}  // namespace gann
