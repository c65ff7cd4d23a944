#include "gann/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "gann/io.hpp"
#include "gann/parallel.hpp"
#include "gann/random.hpp"

namespace gann {

namespace {

constexpr std::uint64_t kSaltInit = 0xc1;
constexpr std::uint64_t kSaltDivide = 0xd1f;
constexpr std::uint64_t kSaltSeeds = 0xc6;
constexpr std::uint64_t kSaltPad = 0xadd;

std::vector<VertexId> make_pad_pool(std::size_t n, std::uint64_t rng_seed) {
  std::vector<VertexId> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<VertexId>(i);
  SplitMix64 rng(derive_seed(rng_seed, kSaltPad));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + rng.next_below(n - i);
    std::swap(pool[i], pool[j]);
  }
  return pool;
}

}  // namespace

void PipelineConfig::validate() const {
  if (c1 == InitKind::random_init || c1 == InitKind::exact_knng) {
    if (c1_k < 1) throw std::invalid_argument("config: c1.k < 1");
  }
  if (c1 == InitKind::nn_descent) nnd.validate();
  if (c1 == InitKind::divide_mst) {
    if (divide_repeats < 1) throw std::invalid_argument("config: divide.repeats < 1");
    if (divide_min_cluster < 2) {
      throw std::invalid_argument("config: divide.min_cluster < 2");
    }
  }
  if (c3_enabled) {
    if (c2 == CandidateKind::none) {
      throw std::invalid_argument("config: c3 needs a c2 strategy");
    }
    c3.validate();
    if (c3_second_pass_alpha != 0.0f) {
      if (c3.kind != SelectionRule::Kind::rng_alpha) {
        throw std::invalid_argument("config: second pass is rng_alpha only");
      }
      if (c3_second_pass_alpha < 1.0f) {
        throw std::invalid_argument("config: second pass alpha < 1");
      }
    }
  }
  if (c2 != CandidateKind::none) {
    if (c2_size < 1) throw std::invalid_argument("config: c2.size < 1");
    if (c2 == CandidateKind::search && c2_search_c < 1) {
      throw std::invalid_argument("config: c2.search_c < 1");
    }
  }
  if (seed_strategy.count < 1) throw std::invalid_argument("config: seeds.count < 1");
  if (seed_strategy.kind == SeedStrategy::Kind::fixed &&
      seed_strategy.fixed_ids.empty()) {
    throw std::invalid_argument("config: fixed seeds empty");
  }
  if (c7 == RoutingKind::range && c7_epsilon < 0.0f) {
    throw std::invalid_argument("config: epsilon < 0");
  }
}

PipelineConfig preset(const std::string& name) {
  PipelineConfig cfg;
  cfg.nnd = NNDescentParams{};  // K=20, L=40, iter=8, S=10, R=10
  cfg.seed_strategy.kind = SeedStrategy::Kind::random;
  cfg.seed_strategy.count = 10;

  if (name == "kgraph") {
    cfg.c1 = InitKind::nn_descent;
    cfg.nnd.k = 40;  // unpruned baseline, fat fixed degree
    cfg.nnd.l = 70;
    cfg.c2 = CandidateKind::none;
    cfg.c3_enabled = false;
    cfg.c7 = RoutingKind::bfs;
  } else if (name == "dpg") {
    cfg.c1 = InitKind::nn_descent;
    cfg.c2 = CandidateKind::neighbors;
    cfg.c2_size = static_cast<std::size_t>(cfg.nnd.k);
    cfg.c3_enabled = true;
    cfg.c3.kind = SelectionRule::Kind::dpg_anglesum;
    cfg.c3.kappa = static_cast<std::size_t>(cfg.nnd.k) / 2;
    cfg.add_reverse_edges = true;
    cfg.c7 = RoutingKind::bfs;
  } else if (name == "nsg") {
    cfg.c1 = InitKind::nn_descent;
    cfg.c2 = CandidateKind::search;
    cfg.c2_size = 100;
    cfg.c2_search_c = 100;
    cfg.c3_enabled = true;
    cfg.c3.kind = SelectionRule::Kind::rng_alpha;
    cfg.c3.alpha = 1.0f;
    cfg.c3.max_degree = 25;
    cfg.c5 = true;
    cfg.c5_root = RootPolicy::centroid;
    cfg.seed_strategy.kind = SeedStrategy::Kind::centroid;
    cfg.seed_strategy.count = 1;
    cfg.c7 = RoutingKind::bfs;
  } else if (name == "nssg") {
    cfg.c1 = InitKind::nn_descent;
    cfg.c2 = CandidateKind::expansion;
    cfg.c2_size = 100;
    cfg.c3_enabled = true;
    cfg.c3.kind = SelectionRule::Kind::angle_threshold;
    cfg.c3.theta = 1.0471975511965976;  // 60 degrees
    cfg.c3.max_degree = 25;
    cfg.c5 = true;
    cfg.c7 = RoutingKind::bfs;
  } else if (name == "vamana") {
    cfg.c1 = InitKind::random_init;
    cfg.c1_k = 25;
    cfg.c2 = CandidateKind::search;
    cfg.c2_size = 100;
    cfg.c2_search_c = 100;
    cfg.c3_enabled = true;
    cfg.c3.kind = SelectionRule::Kind::rng_alpha;
    cfg.c3.alpha = 1.0f;
    cfg.c3_second_pass_alpha = 2.0f;
    cfg.c3.max_degree = 25;
    cfg.seed_strategy.kind = SeedStrategy::Kind::centroid;
    cfg.seed_strategy.count = 1;
    cfg.c7 = RoutingKind::bfs;
  } else if (name == "hcnng_lite") {
    cfg.c1 = InitKind::divide_mst;
    cfg.divide_repeats = 10;
    cfg.divide_min_cluster = 500;
    cfg.c2 = CandidateKind::none;
    cfg.c3_enabled = false;
    cfg.c7 = RoutingKind::guided;
  } else if (name == "oa") {
    cfg.c1 = InitKind::nn_descent;
    cfg.c2 = CandidateKind::expansion;
    cfg.c2_size = 100;
    cfg.c3_enabled = true;
    cfg.c3.kind = SelectionRule::Kind::rng_alpha;
    cfg.c3.alpha = 1.0f;
    cfg.c3.max_degree = 25;
    cfg.c5 = true;
    cfg.c7 = RoutingKind::two_stage;
    cfg.c7_stage1_hops = 64;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return cfg;
}

namespace {

Graph build_divide_mst(const VectorSet& base, const PipelineConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(base.count());
  std::vector<std::vector<Neighbor>> adj(n);
  for (std::size_t rep = 0; rep < cfg.divide_repeats; ++rep) {
    auto leaves = divide_dataset(base, cfg.divide_min_cluster,
                                 derive_seed(cfg.rng_seed, kSaltDivide + rep));
    for (const auto& leaf : leaves) {
      if (leaf.size() < 2) continue;
      for (const MstEdge& e : build_mst(leaf, base)) {
        adj[e.u].push_back(Neighbor{e.v, e.weight});
        adj[e.v].push_back(Neighbor{e.u, e.weight});
      }
    }
  }
  Graph g(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto& list = adj[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    g.adjacency[v] = std::move(list);
  }
  return g;
}

Graph add_reverse_edges(const Graph& g) {
  Graph out = g;
  std::vector<std::unordered_set<VertexId>> present(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    present[v].reserve(g.adjacency[v].size());
    for (const Neighbor& nb : g.adjacency[v]) present[v].insert(nb.id);
  }
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    for (const Neighbor& nb : g.adjacency[v]) {
      if (present[nb.id].insert(static_cast<VertexId>(v)).second) {
        Neighbor back{static_cast<VertexId>(v), nb.dist};
        auto& list = out.adjacency[nb.id];
        list.insert(std::lower_bound(list.begin(), list.end(), back), back);
      }
    }
  }
  return out;
}

Graph refine_pass(const Graph& g, const VectorSet& base,
                  const PipelineConfig& cfg, const SelectionRule& rule) {
  Graph out(g.vertex_count());
  CandidateStrategy strategy;
  switch (cfg.c2) {
    case CandidateKind::neighbors: strategy = CandidateStrategy::neighbors; break;
    case CandidateKind::expansion: strategy = CandidateStrategy::expansion; break;
    default: strategy = CandidateStrategy::search; break;
  }
  parallel_for(0, g.vertex_count(), [&](std::size_t v) {
    auto candidates = acquire_candidates(g, base, static_cast<VertexId>(v),
                                         strategy, cfg.c2_size, cfg.c2_search_c);
    out.adjacency[v] =
        select_neighbors(static_cast<VertexId>(v), candidates, rule, base);
  });
  return out;
}

SeedStrategy effective_seed_strategy(const PipelineConfig& cfg) {
  SeedStrategy s = cfg.seed_strategy;
  s.seed = derive_seed(cfg.rng_seed, kSaltSeeds ^ s.seed);
  return s;
}

VertexId centroid_vertex(const Graph& g, const VectorSet& base) {
  SeedStrategy s;
  s.kind = SeedStrategy::Kind::centroid;
  return acquire_seeds(g, base, s).front();
}

}  // namespace

Index build_index(const VectorSet& base, const PipelineConfig& config) {
  config.validate();
  base.validate();
  const auto start = std::chrono::steady_clock::now();

  Graph g;
  switch (config.c1) {
    case InitKind::random_init:
      g = init_random(base, config.c1_k, derive_seed(config.rng_seed, kSaltInit));
      break;
    case InitKind::exact_knng:
      g = build_exact_knng(base, config.c1_k);
      break;
    case InitKind::divide_mst:
      g = build_divide_mst(base, config);
      break;
    case InitKind::nn_descent:
    default: {
      NNDescentParams p = config.nnd;
      p.seed = derive_seed(config.rng_seed, kSaltInit);
      g = init_nn_descent(base, p);
      break;
    }
  }

  if (config.c3_enabled) {
    g = refine_pass(g, base, config, config.c3);
    if (config.c3_second_pass_alpha != 0.0f) {
      SelectionRule second = config.c3;
      second.alpha = config.c3_second_pass_alpha;
      g = refine_pass(g, base, config, second);
    }
  }

  if (config.apply_path_adjustment) g = path_adjustment(g, base);
  if (config.add_reverse_edges) g = add_reverse_edges(g);

  std::size_t repairs = 0;
  if (config.c5) {
    VertexId root = config.c5_root == RootPolicy::centroid
                        ? centroid_vertex(g, base)
                        : VertexId{0};
    std::size_t before = g.edge_count();
    g = ensure_connectivity_dfs(g, base, root, config.c2_search_c);
    repairs = g.edge_count() - before;
  }

  Index index;
  index.graph = std::move(g);
  index.base = &base;
  index.config = config;
  index.seeds = acquire_seeds(index.graph, base, effective_seed_strategy(config));
  index.pad_pool = make_pad_pool(index.graph.vertex_count(), config.rng_seed);
  index.repair_edges = repairs;
  index.build_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return index;
}

Index attach_index(Graph graph, const VectorSet& base, PipelineConfig config) {
  config.validate();
  Index index;
  index.graph = std::move(graph);
  index.base = &base;
  index.config = std::move(config);
  index.seeds =
      acquire_seeds(index.graph, base, effective_seed_strategy(index.config));
  index.pad_pool =
      make_pad_pool(index.graph.vertex_count(), index.config.rng_seed);
  return index;
}

SearchResult query(const Index& index, Eigen::Ref<const Eigen::RowVectorXf> q,
                   std::size_t k, std::size_t c, const SearchHooks* hooks) {
  if (index.graph.vertex_count() == 0) {
    throw std::invalid_argument("query: empty index");
  }
  if (k < 1 || k > c) throw std::invalid_argument("query: require k <= c");
  const VectorSet& base = *index.base;
  const PipelineConfig& cfg = index.config;
  if (cfg.c7 == RoutingKind::range) {
    return range_search(index.graph, base, q, cfg.c7_epsilon, index.seeds, k,
                        hooks);
  }
  std::vector<VertexId> seeds = index.seeds;
  if (cfg.pad_pool_to_c && seeds.size() < c) {
    std::unordered_set<VertexId> present(seeds.begin(), seeds.end());
    for (VertexId id : index.pad_pool) {
      if (seeds.size() >= c) break;
      if (present.insert(id).second) seeds.push_back(id);
    }
  }
  switch (cfg.c7) {
    case RoutingKind::guided:
      return guided_search(index.graph, base, q, c, seeds, k, hooks);
    case RoutingKind::backtrack:
      return backtrack_search(index.graph, base, q, c, seeds, k,
                              cfg.c7_backtrack_budget, hooks);
    case RoutingKind::two_stage:
      return two_stage_search(index.graph, base, q, c, seeds, k,
                              cfg.c7_stage1_hops, hooks);
    case RoutingKind::bfs:
    default:
      return best_first_search(index.graph, base, q, c, seeds, k, hooks);
  }
}

// ---------------------------------------------------------------------------
// key=value serialization
// ---------------------------------------------------------------------------

namespace {

const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::random_init: return "random";
    case InitKind::exact_knng: return "exact_knng";
    case InitKind::divide_mst: return "divide_mst";
    default: return "nn_descent";
  }
}

const char* candidate_name(CandidateKind k) {
  switch (k) {
    case CandidateKind::neighbors: return "neighbors";
    case CandidateKind::expansion: return "expansion";
    case CandidateKind::search: return "search";
    default: return "none";
  }
}

const char* rule_name(SelectionRule::Kind k) {
  switch (k) {
    case SelectionRule::Kind::rng_alpha: return "rng_alpha";
    case SelectionRule::Kind::angle_threshold: return "angle_threshold";
    case SelectionRule::Kind::dpg_anglesum: return "dpg_anglesum";
    case SelectionRule::Kind::mst: return "mst";
    default: return "distance_topk";
  }
}

const char* routing_name(RoutingKind k) {
  switch (k) {
    case RoutingKind::range: return "range";
    case RoutingKind::guided: return "guided";
    case RoutingKind::backtrack: return "backtrack";
    case RoutingKind::two_stage: return "two_stage";
    default: return "bfs";
  }
}

const char* seeds_name(SeedStrategy::Kind k) {
  switch (k) {
    case SeedStrategy::Kind::centroid: return "centroid";
    case SeedStrategy::Kind::fixed: return "fixed";
    default: return "random";
  }
}

}  // namespace

std::string to_kv(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "c1 = " << init_name(cfg.c1) << "\n";
  out << "c1.k = " << cfg.c1_k << "\n";
  out << "nnd.k = " << cfg.nnd.k << "\n";
  out << "nnd.l = " << cfg.nnd.l << "\n";
  out << "nnd.iter = " << cfg.nnd.iterations << "\n";
  out << "nnd.sample = " << cfg.nnd.sample << "\n";
  out << "nnd.reverse = " << cfg.nnd.reverse << "\n";
  out << "divide.repeats = " << cfg.divide_repeats << "\n";
  out << "divide.min_cluster = " << cfg.divide_min_cluster << "\n";
  out << "c2 = " << candidate_name(cfg.c2) << "\n";
  out << "c2.size = " << cfg.c2_size << "\n";
  out << "c2.search_c = " << cfg.c2_search_c << "\n";
  out << "c3 = " << (cfg.c3_enabled ? rule_name(cfg.c3.kind) : "none") << "\n";
  out << "c3.max_degree = " << cfg.c3.max_degree << "\n";
  out << "c3.alpha = " << cfg.c3.alpha << "\n";
  out << "c3.alpha_pass2 = " << cfg.c3_second_pass_alpha << "\n";
  out << "c3.theta_deg = " << cfg.c3.theta * 180.0 / 3.141592653589793 << "\n";
  out << "c3.kappa = " << cfg.c3.kappa << "\n";
  out << "path_adjustment = " << (cfg.apply_path_adjustment ? 1 : 0) << "\n";
  out << "reverse_edges = " << (cfg.add_reverse_edges ? 1 : 0) << "\n";
  out << "c5 = " << (cfg.c5 ? 1 : 0) << "\n";
  out << "c5.root = " << (cfg.c5_root == RootPolicy::zero ? "zero" : "centroid")
      << "\n";
  out << "seeds = " << seeds_name(cfg.seed_strategy.kind) << "\n";
  out << "seeds.count = " << cfg.seed_strategy.count << "\n";
  if (cfg.seed_strategy.kind == SeedStrategy::Kind::fixed) {
    out << "seeds.ids = ";
    for (std::size_t i = 0; i < cfg.seed_strategy.fixed_ids.size(); ++i) {
      if (i) out << ",";
      out << cfg.seed_strategy.fixed_ids[i];
    }
    out << "\n";
  }
  out << "c7 = " << routing_name(cfg.c7) << "\n";
  out << "c7.epsilon = " << cfg.c7_epsilon << "\n";
  out << "c7.backtrack_budget = " << cfg.c7_backtrack_budget << "\n";
  out << "c7.stage1_hops = " << cfg.c7_stage1_hops << "\n";
  out << "c7.pad_pool = " << (cfg.pad_pool_to_c ? 1 : 0) << "\n";
  out << "deterministic = " << (cfg.deterministic ? 1 : 0) << "\n";
  out << "rng_seed = " << cfg.rng_seed << "\n";
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

PipelineConfig config_from_kv(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: bad line: " + line);
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto as_ll = [&] { return std::stoll(value); };
    auto as_u64 = [&] { return std::stoull(value); };
    auto as_f = [&] { return std::stof(value); };
    auto as_bool = [&] { return value == "1" || value == "true"; };

    if (key == "c1") {
      if (value == "random") cfg.c1 = InitKind::random_init;
      else if (value == "nn_descent") cfg.c1 = InitKind::nn_descent;
      else if (value == "exact_knng") cfg.c1 = InitKind::exact_knng;
      else if (value == "divide_mst") cfg.c1 = InitKind::divide_mst;
      else throw std::invalid_argument("config: unknown c1: " + value);
    } else if (key == "c1.k") cfg.c1_k = as_ll();
    else if (key == "nnd.k") cfg.nnd.k = as_ll();
    else if (key == "nnd.l") cfg.nnd.l = as_ll();
    else if (key == "nnd.iter") cfg.nnd.iterations = static_cast<int>(as_ll());
    else if (key == "nnd.sample") cfg.nnd.sample = static_cast<int>(as_ll());
    else if (key == "nnd.reverse") cfg.nnd.reverse = static_cast<int>(as_ll());
    else if (key == "divide.repeats") cfg.divide_repeats = as_u64();
    else if (key == "divide.min_cluster") cfg.divide_min_cluster = as_u64();
    else if (key == "c2") {
      if (value == "none") cfg.c2 = CandidateKind::none;
      else if (value == "neighbors") cfg.c2 = CandidateKind::neighbors;
      else if (value == "expansion") cfg.c2 = CandidateKind::expansion;
      else if (value == "search") cfg.c2 = CandidateKind::search;
      else throw std::invalid_argument("config: unknown c2: " + value);
    } else if (key == "c2.size") cfg.c2_size = as_u64();
    else if (key == "c2.search_c") cfg.c2_search_c = as_u64();
    else if (key == "c3") {
      if (value == "none") cfg.c3_enabled = false;
      else {
        cfg.c3_enabled = true;
        if (value == "distance_topk") cfg.c3.kind = SelectionRule::Kind::distance_topk;
        else if (value == "rng_alpha") cfg.c3.kind = SelectionRule::Kind::rng_alpha;
        else if (value == "angle_threshold") cfg.c3.kind = SelectionRule::Kind::angle_threshold;
        else if (value == "dpg_anglesum") cfg.c3.kind = SelectionRule::Kind::dpg_anglesum;
        else if (value == "mst") cfg.c3.kind = SelectionRule::Kind::mst;
        else throw std::invalid_argument("config: unknown c3: " + value);
      }
    } else if (key == "c3.max_degree") cfg.c3.max_degree = as_u64();
    else if (key == "c3.alpha") cfg.c3.alpha = as_f();
    else if (key == "c3.alpha_pass2") cfg.c3_second_pass_alpha = as_f();
    else if (key == "c3.theta_deg") cfg.c3.theta = as_f() * 3.141592653589793 / 180.0;
    else if (key == "c3.kappa") cfg.c3.kappa = as_u64();
    else if (key == "path_adjustment") cfg.apply_path_adjustment = as_bool();
    else if (key == "reverse_edges") cfg.add_reverse_edges = as_bool();
    else if (key == "c5") cfg.c5 = as_bool();
    else if (key == "c5.root") {
      cfg.c5_root = value == "zero" ? RootPolicy::zero : RootPolicy::centroid;
    } else if (key == "seeds") {
      if (value == "random") cfg.seed_strategy.kind = SeedStrategy::Kind::random;
      else if (value == "centroid") cfg.seed_strategy.kind = SeedStrategy::Kind::centroid;
      else if (value == "fixed") cfg.seed_strategy.kind = SeedStrategy::Kind::fixed;
      else throw std::invalid_argument("config: unknown seeds: " + value);
    } else if (key == "seeds.count") cfg.seed_strategy.count = as_ll();
    else if (key == "seeds.ids") {
      cfg.seed_strategy.fixed_ids.clear();
      std::istringstream ids(value);
      std::string tok;
      while (std::getline(ids, tok, ',')) {
        if (!trim(tok).empty()) {
          cfg.seed_strategy.fixed_ids.push_back(
              static_cast<VertexId>(std::stoul(trim(tok))));
        }
      }
    } else if (key == "c7") {
      if (value == "bfs") cfg.c7 = RoutingKind::bfs;
      else if (value == "range") cfg.c7 = RoutingKind::range;
      else if (value == "guided") cfg.c7 = RoutingKind::guided;
      else if (value == "backtrack") cfg.c7 = RoutingKind::backtrack;
      else if (value == "two_stage") cfg.c7 = RoutingKind::two_stage;
      else throw std::invalid_argument("config: unknown c7: " + value);
    } else if (key == "c7.epsilon") cfg.c7_epsilon = as_f();
    else if (key == "c7.backtrack_budget") cfg.c7_backtrack_budget = as_u64();
    else if (key == "c7.stage1_hops") cfg.c7_stage1_hops = as_u64();
    else if (key == "c7.pad_pool") cfg.pad_pool_to_c = as_bool();
    else if (key == "deterministic") cfg.deterministic = as_bool();
    else if (key == "rng_seed") cfg.rng_seed = as_u64();
    else throw std::invalid_argument("config: unknown key: " + key);
  }
  return cfg;
}

void save_config(const std::string& path, const PipelineConfig& config) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write config: " + path);
  out << to_kv(config);
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_kv(buf.str());
}

}  // namespace gann
