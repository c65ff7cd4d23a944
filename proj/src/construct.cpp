#include "gann/construct.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "gann/distance.hpp"
#include "gann/parallel.hpp"
#include "gann/random.hpp"
#include "gann/search.hpp"

namespace gann {

void NNDescentParams::validate() const {
  if (k < 1 || l < k) throw std::invalid_argument("NNDescentParams: need l >= k >= 1");
  if (iterations < 0) throw std::invalid_argument("NNDescentParams: iterations < 0");
  if (sample < 1) throw std::invalid_argument("NNDescentParams: sample < 1");
  if (reverse < 0) throw std::invalid_argument("NNDescentParams: reverse < 0");
}

void SelectionRule::validate() const {
  if (max_degree < 1) throw std::invalid_argument("SelectionRule: max_degree < 1");
  if (alpha < 1.0f) throw std::invalid_argument("SelectionRule: alpha < 1");
  if (!(theta > 0.0 && theta < 3.141592653589793)) {
    throw std::invalid_argument("SelectionRule: theta out of (0, pi)");
  }
  if (kind == Kind::dpg_anglesum && kappa < 1) {
    throw std::invalid_argument("SelectionRule: kappa < 1");
  }
}

double angle_at(const VectorSet& base, VertexId p, VertexId x, VertexId y) {
  Eigen::RowVectorXd ux =
      (base.vec(x).cast<double>() - base.vec(p).cast<double>());
  Eigen::RowVectorXd uy =
      (base.vec(y).cast<double>() - base.vec(p).cast<double>());
  double nx = ux.norm();
  double ny = uy.norm();
  if (nx == 0.0 || ny == 0.0) return 3.141592653589793;
  double c = ux.dot(uy) / (nx * ny);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

namespace {

/// k distinct values from [0, n) \ {self}, deterministic per stream.
std::vector<VertexId> sample_distinct(SplitMix64& rng, std::size_t n,
                                      VertexId self, std::size_t k) {
  std::vector<VertexId> out;
  out.reserve(k);
  if (k * 3 >= n) {
    std::vector<VertexId> ids;
    ids.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != self) ids.push_back(static_cast<VertexId>(i));
    }
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + rng.next_below(ids.size() - i);
      std::swap(ids[i], ids[j]);
      out.push_back(ids[i]);
    }
    return out;
  }
  std::unordered_set<VertexId> used{self};
  while (out.size() < k) {
    VertexId id = static_cast<VertexId>(rng.next_below(n));
    if (used.insert(id).second) out.push_back(id);
  }
  return out;
}

}  // namespace

Graph init_random(const VectorSet& base, Eigen::Index k, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(base.count());
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw std::invalid_argument("init_random: require 1 <= k < count");
  }
  Graph g(n);
  parallel_for(0, n, [&](std::size_t v) {
    SplitMix64 rng(derive_seed(seed, v));
    auto ids = sample_distinct(rng, n, static_cast<VertexId>(v),
                               static_cast<std::size_t>(k));
    auto& list = g.adjacency[v];
    list.reserve(ids.size());
    const auto x = base.vec(static_cast<Eigen::Index>(v));
    for (VertexId id : ids) {
      list.push_back(Neighbor{id, euclidean_distance(x, base.vec(id))});
    }
    std::sort(list.begin(), list.end());
  });
  return g;
}

// ---------------------------------------------------------------------------
// NN-Descent
// ---------------------------------------------------------------------------

namespace {

struct PoolEntry {
  VertexId id;
  float dist;
  bool fresh;  // not yet sampled into a local join
};

inline bool pool_less(const PoolEntry& a, const PoolEntry& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  return a.id < b.id;
}

/// Bounded sorted pool. Content after any sequence of inserts depends only
/// on the set of proposals, never their order, so the locked parallel join
/// stays deterministic.
struct VertexPool {
  std::vector<PoolEntry> entries;  // ascending (dist, id)
  std::size_t capacity = 0;

  void insert(VertexId id, float dist) {
    PoolEntry e{id, dist, true};
    auto pos = std::lower_bound(entries.begin(), entries.end(), e, pool_less);
    if (pos != entries.end() && pos->id == id) return;  // same id, same dist
    if (static_cast<std::size_t>(pos - entries.begin()) >= capacity) return;
    entries.insert(pos, e);
    if (entries.size() > capacity) entries.pop_back();
  }
};

Graph pools_to_graph(const std::vector<VertexPool>& pools, std::size_t k) {
  Graph g(pools.size());
  for (std::size_t v = 0; v < pools.size(); ++v) {
    const auto& entries = pools[v].entries;
    std::size_t take = std::min(k, entries.size());
    auto& list = g.adjacency[v];
    list.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
      list.push_back(Neighbor{entries[i].id, entries[i].dist});
    }
  }
  return g;
}

}  // namespace

Graph init_nn_descent(
    const VectorSet& base, const NNDescentParams& params,
    const std::function<void(int, const Graph&)>& on_iteration) {
  params.validate();
  const std::size_t n = static_cast<std::size_t>(base.count());
  if (static_cast<std::size_t>(params.k) >= n) {
    throw std::invalid_argument("init_nn_descent: require k < count");
  }
  const std::size_t k = static_cast<std::size_t>(params.k);
  const std::size_t cap = static_cast<std::size_t>(params.l);

  std::vector<VertexPool> pools(n);
  {
    Graph start = init_random(base, params.k, params.seed);
    for (std::size_t v = 0; v < n; ++v) {
      pools[v].capacity = cap;
      pools[v].entries.reserve(cap + 1);
      for (const Neighbor& nb : start.adjacency[v]) {
        pools[v].entries.push_back(PoolEntry{nb.id, nb.dist, true});
      }
    }
  }
  if (on_iteration) on_iteration(0, pools_to_graph(pools, k));

  std::unique_ptr<std::mutex[]> locks(new std::mutex[n]);
  std::vector<std::vector<VertexId>> fwd_new(n), fwd_old(n);
  std::vector<std::vector<VertexId>> rev_new(n), rev_old(n);

  for (int it = 0; it < params.iterations; ++it) {
    const std::uint64_t iter_salt = 0x17e4a110ULL + static_cast<std::uint64_t>(it);

    // Sample fresh entries into this iteration's join set; the rest of the
    // pool joins as the old side.
    parallel_for(0, n, [&](std::size_t v) {
      auto& pool = pools[v].entries;
      fwd_new[v].clear();
      fwd_old[v].clear();
      std::vector<std::size_t> fresh_idx;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].fresh) {
          fresh_idx.push_back(i);
        } else {
          fwd_old[v].push_back(pool[i].id);
        }
      }
      SplitMix64 rng(derive_seed(params.seed, iter_salt * n + v));
      std::size_t take =
          std::min(fresh_idx.size(), static_cast<std::size_t>(params.sample));
      for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + rng.next_below(fresh_idx.size() - i);
        std::swap(fresh_idx[i], fresh_idx[j]);
        pool[fresh_idx[i]].fresh = false;
        fwd_new[v].push_back(pool[fresh_idx[i]].id);
      }
    });

    // Reverse lists, built by an ascending scan so they are reproducible.
    for (std::size_t u = 0; u < n; ++u) {
      rev_new[u].clear();
      rev_old[u].clear();
    }
    for (std::size_t v = 0; v < n; ++v) {
      for (VertexId u : fwd_new[v]) rev_new[u].push_back(static_cast<VertexId>(v));
      for (VertexId u : fwd_old[v]) rev_old[u].push_back(static_cast<VertexId>(v));
    }

    parallel_for(0, n, [&](std::size_t u) {
      SplitMix64 rng(derive_seed(params.seed, (iter_salt ^ 0x9c0ffeeULL) * n + u));
      auto sample_into = [&](std::vector<VertexId>& list,
                             std::vector<VertexId>& dst) {
        std::size_t take =
            std::min(list.size(), static_cast<std::size_t>(params.reverse));
        for (std::size_t i = 0; i < take; ++i) {
          std::size_t j = i + rng.next_below(list.size() - i);
          std::swap(list[i], list[j]);
          dst.push_back(list[i]);
        }
      };
      sample_into(rev_new[u], fwd_new[u]);
      sample_into(rev_old[u], fwd_old[u]);
      // Dedup join sets; old entries already present as new drop out.
      auto dedup = [](std::vector<VertexId>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      };
      dedup(fwd_new[u]);
      dedup(fwd_old[u]);
      std::erase_if(fwd_old[u], [&](VertexId id) {
        return std::binary_search(fwd_new[u].begin(), fwd_new[u].end(), id);
      });
    });

    // Local join: propose each pair to both endpoints' pools.
    parallel_for(0, n, [&](std::size_t v) {
      auto propose = [&](VertexId a, VertexId b) {
        if (a == b) return;
        float d = euclidean_distance(base.vec(a), base.vec(b));
        {
          std::lock_guard<std::mutex> guard(locks[a]);
          pools[a].insert(b, d);
        }
        {
          std::lock_guard<std::mutex> guard(locks[b]);
          pools[b].insert(a, d);
        }
      };
      const auto& nn = fwd_new[v];
      const auto& on = fwd_old[v];
      for (std::size_t i = 0; i < nn.size(); ++i) {
        for (std::size_t j = i + 1; j < nn.size(); ++j) propose(nn[i], nn[j]);
        for (VertexId b : on) propose(nn[i], b);
      }
    });

    if (on_iteration) on_iteration(it + 1, pools_to_graph(pools, k));
  }

  return pools_to_graph(pools, k);
}

// ---------------------------------------------------------------------------
// Dataset division
// ---------------------------------------------------------------------------

namespace {

void divide_recursive(const VectorSet& base, std::vector<VertexId>& ids,
                      std::size_t min_cluster, SplitMix64& rng,
                      std::vector<std::vector<VertexId>>& leaves) {
  if (ids.size() <= min_cluster) {
    leaves.push_back(std::move(ids));
    return;
  }
  std::vector<VertexId> left, right;
  for (int attempt = 0; attempt < 3 && (left.empty() || right.empty()); ++attempt) {
    std::size_t i = rng.next_below(ids.size());
    std::size_t j = rng.next_below(ids.size() - 1);
    if (j >= i) ++j;
    const auto pa = base.vec(ids[i]);
    const auto pb = base.vec(ids[j]);
    left.clear();
    right.clear();
    for (VertexId id : ids) {
      float da = euclidean_distance(base.vec(id), pa);
      float db = euclidean_distance(base.vec(id), pb);
      (da <= db ? left : right).push_back(id);  // tie goes to the first pivot
    }
  }
  if (left.empty() || right.empty()) {
    // Degenerate geometry (e.g. all duplicates): split by order.
    std::size_t half = ids.size() / 2;
    left.assign(ids.begin(), ids.begin() + half);
    right.assign(ids.begin() + half, ids.end());
  }
  ids.clear();
  ids.shrink_to_fit();
  divide_recursive(base, left, min_cluster, rng, leaves);
  divide_recursive(base, right, min_cluster, rng, leaves);
}

}  // namespace

std::vector<std::vector<VertexId>> divide_dataset(const VectorSet& base,
                                                  std::size_t min_cluster,
                                                  std::uint64_t seed) {
  if (min_cluster < 2) {
    throw std::invalid_argument("divide_dataset: min_cluster < 2");
  }
  std::vector<VertexId> all(static_cast<std::size_t>(base.count()));
  std::iota(all.begin(), all.end(), VertexId{0});
  std::vector<std::vector<VertexId>> leaves;
  SplitMix64 rng(seed);
  divide_recursive(base, all, min_cluster, rng, leaves);
  return leaves;
}

// ---------------------------------------------------------------------------
// Candidate acquisition and neighbor selection
// ---------------------------------------------------------------------------

std::vector<Neighbor> acquire_candidates(const Graph& g, const VectorSet& base,
                                         VertexId p, CandidateStrategy strategy,
                                         std::size_t size,
                                         std::size_t search_c) {
  if (p >= g.vertex_count()) {
    throw std::invalid_argument("acquire_candidates: vertex out of range");
  }
  if (size < 1) throw std::invalid_argument("acquire_candidates: size < 1");

  switch (strategy) {
    case CandidateStrategy::neighbors: {
      std::vector<Neighbor> out = g.adjacency[p];
      if (out.size() > size) out.resize(size);
      return out;
    }
    case CandidateStrategy::expansion: {
      const auto pv = base.vec(p);
      std::vector<Neighbor> out;
      std::unordered_set<VertexId> seen{p};
      for (const Neighbor& nb : g.adjacency[p]) {
        if (seen.insert(nb.id).second) out.push_back(nb);
      }
      for (const Neighbor& nb : g.adjacency[p]) {
        for (const Neighbor& nb2 : g.adjacency[nb.id]) {
          if (!seen.insert(nb2.id).second) continue;
          out.push_back(
              Neighbor{nb2.id, euclidean_distance(pv, base.vec(nb2.id))});
        }
      }
      std::sort(out.begin(), out.end());
      if (out.size() > size) out.resize(size);
      return out;
    }
    case CandidateStrategy::search:
    default: {
      VertexId seed;
      if (!g.adjacency[p].empty()) {
        seed = g.adjacency[p].front().id;
      } else {
        seed = static_cast<VertexId>(derive_seed(0x5eedULL, p) %
                                     g.vertex_count());
        if (seed == p) seed = (seed + 1) % static_cast<VertexId>(g.vertex_count());
      }
      std::size_t want = std::min(size + 1, search_c);
      SearchResult res = best_first_search(g, base, base.vec(p), search_c,
                                           {seed}, want);
      std::vector<Neighbor> out;
      out.reserve(res.neighbors.size());
      for (const Neighbor& nb : res.neighbors) {
        if (nb.id != p) out.push_back(nb);
      }
      if (out.size() > size) out.resize(size);
      return out;
    }
  }
}

std::vector<Neighbor> select_neighbors(VertexId p,
                                       const std::vector<Neighbor>& candidates,
                                       const SelectionRule& rule,
                                       const VectorSet& base) {
  rule.validate();
  std::vector<Neighbor> out;
  if (candidates.empty()) return out;

  switch (rule.kind) {
    case SelectionRule::Kind::distance_topk: {
      out.assign(candidates.begin(),
                 candidates.begin() +
                     std::min(candidates.size(), rule.max_degree));
      return out;
    }
    case SelectionRule::Kind::rng_alpha: {
      for (const Neighbor& cand : candidates) {
        if (out.size() >= rule.max_degree) break;
        bool keep = true;
        for (const Neighbor& sel : out) {
          float between = euclidean_distance(base.vec(cand.id), base.vec(sel.id));
          if (!(rule.alpha * between > cand.dist)) {
            keep = false;
            break;
          }
        }
        if (keep) out.push_back(cand);
      }
      return out;
    }
    case SelectionRule::Kind::angle_threshold: {
      for (const Neighbor& cand : candidates) {
        if (out.size() >= rule.max_degree) break;
        bool keep = true;
        for (const Neighbor& sel : out) {
          if (angle_at(base, p, cand.id, sel.id) < rule.theta) {
            keep = false;
            break;
          }
        }
        if (keep) out.push_back(cand);
      }
      return out;
    }
    case SelectionRule::Kind::dpg_anglesum: {
      std::vector<Neighbor> remaining = candidates;
      out.push_back(remaining.front());
      remaining.erase(remaining.begin());
      while (out.size() < rule.kappa && !remaining.empty()) {
        std::size_t best = 0;
        double best_gain = -1.0;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
          double gain = 0.0;
          for (const Neighbor& sel : out) {
            gain += angle_at(base, p, remaining[i].id, sel.id);
          }
          if (gain > best_gain) {  // ties keep the nearest candidate
            best_gain = gain;
            best = i;
          }
        }
        out.push_back(remaining[best]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
      }
      std::sort(out.begin(), out.end());
      return out;
    }
    case SelectionRule::Kind::mst:
    default: {
      std::vector<VertexId> points;
      points.reserve(candidates.size() + 1);
      points.push_back(p);
      for (const Neighbor& cand : candidates) points.push_back(cand.id);
      for (const MstEdge& e : build_mst(points, base)) {
        if (e.u == p) out.push_back(Neighbor{e.v, e.weight});
        if (e.v == p) out.push_back(Neighbor{e.u, e.weight});
      }
      std::sort(out.begin(), out.end());
      if (out.size() > rule.max_degree) out.resize(rule.max_degree);
      return out;
    }
  }
}

std::vector<MstEdge> build_mst(const std::vector<VertexId>& points,
                               const VectorSet& base) {
  if (points.empty()) throw std::invalid_argument("build_mst: no points");
  const std::size_t m = points.size();
  std::vector<MstEdge> edges;
  edges.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      VertexId u = std::min(points[i], points[j]);
      VertexId v = std::max(points[i], points[j]);
      edges.push_back(
          MstEdge{u, v, euclidean_distance(base.vec(u), base.vec(v))});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });

  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  // Map original ids back to positions for union-find.
  std::unordered_map<VertexId, std::size_t> pos;
  pos.reserve(m);
  for (std::size_t i = 0; i < m; ++i) pos[points[i]] = i;

  std::vector<MstEdge> tree;
  tree.reserve(m - 1);
  for (const MstEdge& e : edges) {
    std::size_t a = find(pos[e.u]);
    std::size_t b = find(pos[e.v]);
    if (a == b) continue;
    parent[b] = a;
    tree.push_back(e);
    if (tree.size() == m - 1) break;
  }
  return tree;
}

Graph path_adjustment(const Graph& g, const VectorSet& base) {
  Graph out = g;
  const std::size_t n = out.vertex_count();
  std::vector<std::unordered_set<VertexId>> ids(n);
  for (std::size_t v = 0; v < n; ++v) {
    ids[v].reserve(out.adjacency[v].size());
    for (const Neighbor& nb : out.adjacency[v]) ids[v].insert(nb.id);
  }
  for (std::size_t p = 0; p < n; ++p) {
    const std::vector<Neighbor> snapshot = out.adjacency[p];
    for (const Neighbor& nb : snapshot) {  // ascending (distance, id)
      bool cut = false;
      for (const Neighbor& via : out.adjacency[p]) {
        if (via.id == nb.id) continue;
        if (!(via.dist < nb.dist)) break;  // sorted; no nearer hop remains
        if (!ids[via.id].count(nb.id)) continue;
        float leg = euclidean_distance(base.vec(via.id), base.vec(nb.id));
        if (std::max(via.dist, leg) < nb.dist) {
          cut = true;
          break;
        }
      }
      if (cut) {
        auto& list = out.adjacency[p];
        list.erase(std::find_if(list.begin(), list.end(), [&](const Neighbor& e) {
          return e.id == nb.id;
        }));
        ids[p].erase(nb.id);
      }
    }
  }
  return out;
}

Graph ensure_connectivity_dfs(const Graph& g, const VectorSet& base,
                              VertexId root, std::size_t search_c) {
  (void)search_c;
  const std::size_t n = g.vertex_count();
  if (root >= n) throw std::invalid_argument("ensure_connectivity_dfs: bad root");
  Graph out = g;

  std::vector<bool> reached(n, false);
  std::vector<VertexId> stack;
  auto dfs_from = [&](VertexId start) {
    if (reached[start]) return;
    stack.push_back(start);
    reached[start] = true;
    while (!stack.empty()) {
      VertexId v = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : out.adjacency[v]) {
        if (!reached[nb.id]) {
          reached[nb.id] = true;
          stack.push_back(nb.id);
        }
      }
    }
  };

  dfs_from(root);
  for (std::size_t u = 0; u < n; ++u) {
    if (reached[u]) continue;
    // Nearest reached vertex to u, exact scan, ties by smaller id.
    const auto uv = base.vec(static_cast<Eigen::Index>(u));
    VertexId nearest = root;
    float best = std::numeric_limits<float>::infinity();
    for (std::size_t r = 0; r < n; ++r) {
      if (!reached[r]) continue;
      float d = euclidean_distance(uv, base.vec(static_cast<Eigen::Index>(r)));
      if (d < best) {
        best = d;
        nearest = static_cast<VertexId>(r);
      }
    }
    Neighbor bridge{static_cast<VertexId>(u), best};
    auto& list = out.adjacency[nearest];
    list.insert(std::lower_bound(list.begin(), list.end(), bridge), bridge);
    dfs_from(static_cast<VertexId>(u));
  }
  return out;
}

}  // namespace gann
