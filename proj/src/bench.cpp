#include "gann/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace gann {

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string MetricsReport::csv_header() {
  return "preset,dataset,c,recall,qps,speedup,mean_ndc,mean_pl,gq,ad,d_max,"
         "d_min,cc,build_seconds";
}

std::string MetricsReport::to_csv() const {
  std::string out = csv_header() + "\n";
  for (const BenchRow& r : rows) {
    out += r.preset + "," + r.dataset + "," + std::to_string(r.c) + "," +
           fmt(r.recall) + "," + fmt(r.qps, "%.3f") + "," + fmt(r.speedup) +
           "," + fmt(r.mean_ndc) + "," + fmt(r.mean_pl) + "," + fmt(r.gq) +
           "," + fmt(r.ad) + "," + std::to_string(r.d_max) + "," +
           std::to_string(r.d_min) + "," + std::to_string(r.cc) + "," +
           fmt(r.build_seconds, "%.3f") + "\n";
  }
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const BenchRow& r : rows) {
    arr.push_back({{"preset", r.preset},
                   {"dataset", r.dataset},
                   {"c", r.c},
                   {"recall", r.recall},
                   {"qps", r.qps},
                   {"speedup", r.speedup},
                   {"mean_ndc", r.mean_ndc},
                   {"mean_pl", r.mean_pl},
                   {"gq", r.gq},
                   {"ad", r.ad},
                   {"d_max", r.d_max},
                   {"d_min", r.d_min},
                   {"cc", r.cc},
                   {"build_seconds", r.build_seconds}});
  }
  return arr.dump(2);
}

double evaluate_recall(const std::vector<std::vector<VertexId>>& results,
                       const GroundTruth& gt, Eigen::Index k) {
  if (static_cast<Eigen::Index>(results.size()) != gt.query_count()) {
    throw std::invalid_argument("evaluate_recall: query count mismatch");
  }
  if (k < 1 || gt.k() < k) {
    throw std::invalid_argument("evaluate_recall: gt has fewer than k columns");
  }
  double total = 0.0;
  for (Eigen::Index q = 0; q < gt.query_count(); ++q) {
    const auto& res = results[static_cast<std::size_t>(q)];
    if (static_cast<Eigen::Index>(res.size()) > k) {
      throw std::invalid_argument("evaluate_recall: result larger than k");
    }
    std::unordered_set<VertexId> truth;
    truth.reserve(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      truth.insert(static_cast<VertexId>(gt.ids(q, j)));
    }
    std::size_t hit = 0;
    for (VertexId id : res) hit += truth.count(id);
    total += static_cast<double>(hit) / static_cast<double>(k);
  }
  return total / static_cast<double>(gt.query_count());
}

namespace {

Eigen::Index default_gq_k(const PipelineConfig& cfg) {
  switch (cfg.c1) {
    case InitKind::random_init:
    case InitKind::exact_knng:
      return cfg.c1_k;
    case InitKind::nn_descent:
      return cfg.nnd.k;
    case InitKind::divide_mst:
    default:
      return 10;  // heterogeneous degree, no natural K
  }
}

struct QueryRun {
  std::vector<std::vector<VertexId>> results;
  double recall = 0.0;
  double mean_ndc = 0.0;
  double mean_pl = 0.0;
  double seconds = 0.0;
};

QueryRun run_queries(const Index& index, const VectorSet& queries,
                     const GroundTruth& gt, Eigen::Index k, std::size_t c) {
  QueryRun run;
  run.results.resize(static_cast<std::size_t>(queries.count()));
  std::size_t total_ndc = 0;
  std::size_t total_pl = 0;
  // Single-threaded query loop; the timer brackets only this loop.
  const auto start = std::chrono::steady_clock::now();
  for (Eigen::Index q = 0; q < queries.count(); ++q) {
    SearchResult res = query(index, queries.vec(q),
                             static_cast<std::size_t>(k), c);
    total_ndc += res.trace.ndc;
    total_pl += res.trace.hops;
    run.results[static_cast<std::size_t>(q)] = res.ids();
  }
  run.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  run.recall = evaluate_recall(run.results, gt, k);
  run.mean_ndc = static_cast<double>(total_ndc) /
                 static_cast<double>(queries.count());
  run.mean_pl =
      static_cast<double>(total_pl) / static_cast<double>(queries.count());
  return run;
}

}  // namespace

MetricsReport run_benchmark(const Index& index, const VectorSet& queries,
                            const GroundTruth& gt, const BenchOptions& options,
                            ResultDump* dumps) {
  if (options.c_sweep.empty()) {
    throw std::invalid_argument("run_benchmark: empty c sweep");
  }
  for (std::size_t c : options.c_sweep) {
    if (c < static_cast<std::size_t>(options.k)) {
      throw std::invalid_argument("run_benchmark: sweep value below k");
    }
  }
  const VectorSet& base = *index.base;

  Eigen::Index gq_k = options.gq_k > 0 ? options.gq_k
                                       : default_gq_k(index.config);
  Graph exact = build_exact_knng(base, gq_k);
  const double gq = graph_quality(index.graph, exact);
  const DegreeStats deg = degree_stats(index.graph);
  const std::size_t cc = connected_components(index.graph);

  MetricsReport report;
  for (std::size_t c : options.c_sweep) {
    QueryRun run = run_queries(index, queries, gt, options.k, c);
    BenchRow row;
    row.preset = options.preset_label;
    row.dataset = options.dataset_label;
    row.c = c;
    row.recall = run.recall;
    row.qps = static_cast<double>(queries.count()) / run.seconds;
    row.mean_ndc = run.mean_ndc;
    row.speedup = static_cast<double>(base.count()) / run.mean_ndc;
    row.mean_pl = run.mean_pl;
    row.gq = gq;
    row.ad = deg.ad;
    row.d_max = deg.d_max;
    row.d_min = deg.d_min;
    row.cc = cc;
    row.build_seconds = index.build_seconds;
    report.rows.push_back(row);
    if (dumps) dumps->push_back(std::move(run.results));
  }
  return report;
}

std::vector<SweepRow> cardinality_sweep(const SyntheticSpec& spec_template,
                                        const std::vector<Eigen::Index>& sizes,
                                        const PipelineConfig& config,
                                        double recall_target, Eigen::Index k) {
  if (!(recall_target < 1.0)) {
    throw std::invalid_argument("cardinality_sweep: target must be < 1");
  }
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw std::invalid_argument("cardinality_sweep: sizes must ascend");
  }

  std::vector<SweepRow> rows;
  for (Eigen::Index n : sizes) {
    SyntheticSpec spec = spec_template;
    spec.cardinality = n;
    auto [base, queries] = generate_synthetic(spec);
    GroundTruth gt = brute_force_knn(base, queries, k);
    Index index = build_index(base, config);

    auto probe = [&](std::size_t c) {
      return run_queries(index, queries, gt, k, c);
    };

    const std::size_t cap = static_cast<std::size_t>(n);
    std::size_t c = static_cast<std::size_t>(k);
    QueryRun run = probe(c);
    if (run.recall < recall_target) {
      // Double until the target is met or the capacity is the whole set.
      std::size_t lo = c;  // highest failing c
      while (run.recall < recall_target && c < cap) {
        lo = c;
        c = std::min(cap, c * 2);
        run = probe(c);
      }
      if (run.recall < recall_target) {
        rows.push_back(SweepRow{n, c, run.recall, run.mean_ndc, false});
        continue;
      }
      // Bisect (lo, c]; run holds the stats for c.
      while (c - lo > 1) {
        std::size_t mid = lo + (c - lo) / 2;
        QueryRun mid_run = probe(mid);
        if (mid_run.recall >= recall_target) {
          c = mid;
          run = std::move(mid_run);
        } else {
          lo = mid;
        }
      }
    }
    rows.push_back(SweepRow{n, c, run.recall, run.mean_ndc, true});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "n,c,recall,mean_ndc,reachable\n";
  for (const SweepRow& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.c) + "," +
           fmt(r.recall) + "," + fmt(r.mean_ndc) + "," +
           (r.reachable ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace gann
