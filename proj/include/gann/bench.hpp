#pragma once

#include <string>
#include <vector>

#include "gann/dataset.hpp"
#include "gann/pipeline.hpp"

namespace gann {

struct BenchRow {
  std::string preset;
  std::string dataset;
  std::size_t c = 0;
  double recall = 0.0;
  double qps = 0.0;        // wall-clock; excluded from determinism checks
  double speedup = 0.0;    // |S| / mean_ndc
  double mean_ndc = 0.0;
  double mean_pl = 0.0;
  double gq = 0.0;
  double ad = 0.0;
  std::size_t d_max = 0;
  std::size_t d_min = 0;
  std::size_t cc = 0;
  double build_seconds = 0.0;
};

struct MetricsReport {
  std::vector<BenchRow> rows;

  static std::string csv_header();
  std::string to_csv() const;   // header + one line per row
  std::string to_json() const;  // same field names, array of objects
};

/// Mean over queries of |result ∩ gt top-k| / k.
double evaluate_recall(const std::vector<std::vector<VertexId>>& results,
                       const GroundTruth& gt, Eigen::Index k);

struct BenchOptions {
  Eigen::Index k = 10;
  std::vector<std::size_t> c_sweep;
  Eigen::Index gq_k = 0;  // 0: index's configured degree, or 10 when heterogeneous
  std::string preset_label = "custom";
  std::string dataset_label = "dataset";
};

/// Per-query result dumps, one entry per sweep value, for recall recounts.
using ResultDump = std::vector<std::vector<std::vector<VertexId>>>;

/// Runs the full query set once per sweep value on a single thread and
/// aggregates the search metrics; index-side stats are attached to every
/// row.
MetricsReport run_benchmark(const Index& index, const VectorSet& queries,
                            const GroundTruth& gt, const BenchOptions& options,
                            ResultDump* dumps = nullptr);

struct SweepRow {
  Eigen::Index n = 0;
  std::size_t c = 0;
  double recall = 0.0;
  double mean_ndc = 0.0;
  bool reachable = true;
};

/// For each cardinality: generate the dataset, build the index, then find
/// by doubling and bisection the smallest candidate capacity whose recall
/// meets the target, and record the mean NDC there. Rows where the target
/// cannot be met at c = n are flagged unreachable.
std::vector<SweepRow> cardinality_sweep(const SyntheticSpec& spec_template,
                                        const std::vector<Eigen::Index>& sizes,
                                        const PipelineConfig& config,
                                        double recall_target, Eigen::Index k);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace gann
