// Command-line front end: synthetic data generation, ground truth,
// index construction, search, and the benchmark harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gann/bench.hpp"
#include "gann/dataset.hpp"
#include "gann/io.hpp"
#include "gann/parallel.hpp"
#include "gann/pipeline.hpp"

namespace {

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoull(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

struct ConfigArgs {
  std::string preset_name;
  std::string config_path;
  std::uint64_t seed = 1;
  bool deterministic = true;

  gann::PipelineConfig resolve() const {
    gann::PipelineConfig cfg;
    if (!config_path.empty()) {
      cfg = gann::load_config(config_path);
    } else if (!preset_name.empty()) {
      cfg = gann::preset(preset_name);
    } else {
      throw std::invalid_argument("need --preset or --config");
    }
    cfg.rng_seed = seed;
    cfg.deterministic = deterministic;
    return cfg;
  }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--preset", args.preset_name,
                  "named pipeline: kgraph|dpg|nsg|nssg|vamana|hcnng_lite|oa");
  cmd->add_option("--config", args.config_path, "pipeline config file (key=value)");
  cmd->add_option("--seed", args.seed, "master random seed");
  cmd->add_flag("--deterministic,!--no-deterministic", args.deterministic,
                "reproducible builds (default on)");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw gann::FormatError("cannot write: " + path);
  out << text;
}

int run(int argc, char** argv) {
  CLI::App app{"graph-based approximate nearest neighbor search toolkit"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads for construction")
      ->default_val(0);

  // gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a synthetic fvecs dataset pair");
  gann::SyntheticSpec spec;
  std::string gen_out, gen_spec_path;
  gen->add_option("--spec", gen_spec_path, "key=value spec file (flags override)");
  auto* gen_dim = gen->add_option("--dim", spec.dim)->default_val(32);
  auto* gen_n = gen->add_option("--n", spec.cardinality)->default_val(10000);
  auto* gen_clusters = gen->add_option("--clusters", spec.clusters)->default_val(10);
  auto* gen_sd = gen->add_option("--sd", spec.sd)->default_val(5.0f);
  auto* gen_queries = gen->add_option("--queries", spec.query_count)->default_val(1000);
  auto* gen_seed = gen->add_option("--seed", spec.seed)->default_val(1);
  gen->add_option("--out", gen_out, "output prefix")->required();

  // gt -----------------------------------------------------------------
  auto* gt_cmd = app.add_subcommand("gt", "exact ground truth by linear scan");
  std::string gt_base, gt_query, gt_out;
  Eigen::Index gt_k = 100;
  gt_cmd->add_option("--base", gt_base)->required();
  gt_cmd->add_option("--query", gt_query)->required();
  gt_cmd->add_option("--k", gt_k)->default_val(100);
  gt_cmd->add_option("--out", gt_out, "output ivecs path")->required();

  // build ----------------------------------------------------------------
  auto* build = app.add_subcommand("build", "build a graph index");
  ConfigArgs build_cfg;
  std::string build_base, build_out, build_ivecs;
  add_config_options(build, build_cfg);
  build->add_option("--base", build_base)->required();
  build->add_option("--out", build_out, "output prefix (.graph + .conf)")->required();
  build->add_option("--export-ivecs", build_ivecs, "also export adjacency ids");

  // search ---------------------------------------------------------------
  auto* search = app.add_subcommand("search", "query a built index");
  std::string search_index, search_base, search_query, search_out;
  Eigen::Index search_k = 10;
  std::size_t search_c = 100;
  search->add_option("--index", search_index, "index prefix from build")->required();
  search->add_option("--base", search_base)->required();
  search->add_option("--query", search_query)->required();
  search->add_option("--k", search_k)->default_val(10);
  search->add_option("--c", search_c)->default_val(100);
  search->add_option("--out", search_out, "result ids as ivecs")->required();

  // bench ----------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "build, query, and emit metrics CSV");
  ConfigArgs bench_cfg;
  std::string bench_base, bench_query, bench_gt, bench_out, bench_json;
  std::string bench_sweep = "20,50,100,200";
  std::string bench_dataset = "dataset";
  Eigen::Index bench_k = 10, bench_gqk = 0;
  add_config_options(bench, bench_cfg);
  bench->add_option("--base", bench_base)->required();
  bench->add_option("--query", bench_query)->required();
  bench->add_option("--gt", bench_gt)->required();
  bench->add_option("--k", bench_k)->default_val(10);
  bench->add_option("--c", bench_sweep, "comma-separated candidate capacities");
  bench->add_option("--gq-k", bench_gqk, "exact-KNNG oracle degree for GQ");
  bench->add_option("--dataset-label", bench_dataset);
  bench->add_option("--out", bench_out, "CSV path (default stdout)");
  bench->add_option("--json", bench_json, "also write a JSON mirror");

  // sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "NDC vs cardinality at a recall target");
  ConfigArgs sweep_cfg;
  gann::SyntheticSpec sweep_spec;
  std::string sweep_sizes = "10000";
  std::string sweep_out;
  double sweep_target = 0.9;
  Eigen::Index sweep_k = 10;
  add_config_options(sweep, sweep_cfg);
  sweep->add_option("--dim", sweep_spec.dim)->default_val(32);
  sweep->add_option("--clusters", sweep_spec.clusters)->default_val(10);
  sweep->add_option("--sd", sweep_spec.sd)->default_val(5.0f);
  sweep->add_option("--queries", sweep_spec.query_count)->default_val(1000);
  sweep->add_option("--data-seed", sweep_spec.seed)->default_val(1);
  sweep->add_option("--sizes", sweep_sizes, "comma-separated cardinalities");
  sweep->add_option("--target", sweep_target)->default_val(0.9);
  sweep->add_option("--k", sweep_k)->default_val(10);
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints help or the parse diagnostic
    return e.get_exit_code() == 0 ? 0 : 1;
  }
  if (threads > 0) gann::set_thread_count(threads);

  if (*gen) {
    if (!gen_spec_path.empty()) {
      std::ifstream in(gen_spec_path);
      if (!in) throw gann::FormatError("cannot read spec: " + gen_spec_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      gann::SyntheticSpec from_file = gann::synthetic_spec_from_kv(buf.str());
      if (!*gen_dim) spec.dim = from_file.dim;
      if (!*gen_n) spec.cardinality = from_file.cardinality;
      if (!*gen_clusters) spec.clusters = from_file.clusters;
      if (!*gen_sd) spec.sd = from_file.sd;
      if (!*gen_queries) spec.query_count = from_file.query_count;
      if (!*gen_seed) spec.seed = from_file.seed;
    }
    auto [base, queries] = gann::generate_synthetic(spec);
    gann::save_fvecs(gen_out + "_base.fvecs", base);
    gann::save_fvecs(gen_out + "_query.fvecs", queries);
    std::cerr << "wrote " << gen_out << "_base.fvecs (" << base.count() << "x"
              << base.dim() << ") and " << gen_out << "_query.fvecs ("
              << queries.count() << "x" << queries.dim() << ")\n";
  } else if (*gt_cmd) {
    gann::VectorSet base = gann::load_fvecs(gt_base);
    gann::VectorSet queries = gann::load_fvecs(gt_query, gann::SetRole::query);
    gann::GroundTruth gt = gann::brute_force_knn(base, queries, gt_k);
    gann::save_ivecs(gt_out, gt);
    std::cerr << "wrote " << gt_out << " (" << gt.query_count() << "x"
              << gt.k() << ")\n";
  } else if (*build) {
    gann::PipelineConfig cfg = build_cfg.resolve();
    gann::VectorSet base = gann::load_fvecs(build_base);
    gann::Index index = gann::build_index(base, cfg);
    gann::save_graph(build_out + ".graph", index.graph);
    gann::save_config(build_out + ".conf", cfg);
    if (!build_ivecs.empty()) gann::export_adjacency_ivecs(build_ivecs, index.graph);
    gann::DegreeStats deg = gann::degree_stats(index.graph);
    std::cerr << "built " << build_out << ".graph in " << index.build_seconds
              << "s: n=" << index.graph.vertex_count() << " ad=" << deg.ad
              << " d_max=" << deg.d_max << " d_min=" << deg.d_min
              << " cc=" << gann::connected_components(index.graph)
              << " repairs=" << index.repair_edges << "\n";
  } else if (*search) {
    gann::VectorSet base = gann::load_fvecs(search_base);
    gann::VectorSet queries = gann::load_fvecs(search_query, gann::SetRole::query);
    gann::Graph graph = gann::load_graph(search_index + ".graph");
    gann::PipelineConfig cfg = gann::load_config(search_index + ".conf");
    gann::Index index = gann::attach_index(std::move(graph), base, cfg);
    gann::GroundTruth results;
    results.ids.resize(queries.count(), search_k);
    results.ids.setConstant(-1);
    std::size_t total_ndc = 0;
    for (Eigen::Index q = 0; q < queries.count(); ++q) {
      auto res = gann::query(index, queries.vec(q),
                             static_cast<std::size_t>(search_k), search_c);
      total_ndc += res.trace.ndc;
      for (std::size_t j = 0; j < res.neighbors.size(); ++j) {
        results.ids(q, static_cast<Eigen::Index>(j)) =
            static_cast<std::int32_t>(res.neighbors[j].id);
      }
    }
    gann::save_ivecs(search_out, results);
    std::cerr << "wrote " << search_out << "; mean ndc = "
              << static_cast<double>(total_ndc) /
                     static_cast<double>(queries.count())
              << "\n";
  } else if (*bench) {
    gann::PipelineConfig cfg = bench_cfg.resolve();
    gann::VectorSet base = gann::load_fvecs(bench_base);
    gann::VectorSet queries = gann::load_fvecs(bench_query, gann::SetRole::query);
    gann::GroundTruth gt = gann::load_ivecs(bench_gt);
    gann::Index index = gann::build_index(base, cfg);
    gann::BenchOptions opt;
    opt.k = bench_k;
    opt.c_sweep = parse_size_list(bench_sweep);
    opt.gq_k = bench_gqk;
    opt.preset_label =
        bench_cfg.preset_name.empty() ? "custom" : bench_cfg.preset_name;
    opt.dataset_label = bench_dataset;
    gann::MetricsReport report = gann::run_benchmark(index, queries, gt, opt);
    write_text(bench_out, report.to_csv());
    if (!bench_json.empty()) write_text(bench_json, report.to_json());
  } else if (*sweep) {
    gann::PipelineConfig cfg = sweep_cfg.resolve();
    std::vector<Eigen::Index> sizes;
    for (std::size_t s : parse_size_list(sweep_sizes)) {
      sizes.push_back(static_cast<Eigen::Index>(s));
    }
    auto rows = gann::cardinality_sweep(sweep_spec, sizes, cfg, sweep_target,
                                        sweep_k);
    write_text(sweep_out, gann::sweep_to_csv(rows));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
