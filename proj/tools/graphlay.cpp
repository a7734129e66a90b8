#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "graphlay/bench.hpp"
#include "graphlay/dnn2.hpp"
#include "graphlay/graph.hpp"
#include "graphlay/layouts.hpp"
#include "graphlay/metrics.hpp"
#include "graphlay/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

void configure_threads(int flag_threads) {
#ifdef _OPENMP
  int threads = 0;
  if (const char* env = std::getenv("GRAPHLAY_THREADS")) threads = std::atoi(env);
  if (flag_threads > 0) threads = flag_threads;
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)flag_threads;
#endif
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw graphlay::InputError("cannot write file: " + path);
  f << content;
}

std::vector<std::pair<std::string, std::string>> list_graph_files(
    const std::string& dir) {
  std::vector<std::pair<std::string, std::string>> out;  // (id, path)
  if (!fs::is_directory(dir))
    throw graphlay::InputError("not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".txt" || ext == ".edgelist" || ext == ".edges" ||
        ext == ".graphml" || ext == ".xml")
      out.emplace_back(entry.path().stem().string(), entry.path().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw graphlay::InputError("no graph files found in " + dir);
  return out;
}

std::vector<int> parse_sizes(const std::string& spec) {
  std::vector<int> sizes;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const size_t dots = part.find("..");
    if (dots != std::string::npos) {
      const int lo = std::stoi(part.substr(0, dots));
      const int hi = std::stoi(part.substr(dots + 2));
      if (lo < 2 || hi < lo) throw graphlay::InputError("bad size range: " + part);
      for (int n = lo; n <= hi; ++n) sizes.push_back(n);
    } else {
      const int n = std::stoi(part);
      if (n < 2) throw graphlay::InputError("bad size: " + part);
      sizes.push_back(n);
    }
  }
  if (sizes.empty()) throw graphlay::InputError("empty --sizes");
  return sizes;
}

int cmd_layout(const std::string& graph_file, const std::string& method,
               std::uint64_t seed, const std::string& out) {
  const graphlay::Graph g = graphlay::load_graph_file(graph_file);
  const auto methods = graphlay::builtin_methods();
  const graphlay::MethodSpec* spec = graphlay::find_method(methods, method);
  if (!spec) throw CLI::ValidationError("--method", "unknown method " + method);
  const graphlay::Layout x = spec->run(g, seed);
  graphlay::write_layout_csv(g, x, out);
  return 0;
}

int cmd_metrics(const std::string& graph_file, const std::string& layout_file,
                const graphlay::MetricOptions& opts) {
  const graphlay::Graph g = graphlay::load_graph_file(graph_file);
  const graphlay::Layout x = graphlay::read_layout_csv_file(g, layout_file);
  const graphlay::DistanceMatrix d = graphlay::all_pairs_bfs(g);
  const graphlay::MetricReport r = graphlay::evaluate_all(x, g, d, 0.0, opts);
  std::cout << graphlay::metric_csv_header() << "\n"
            << graphlay::metric_csv_row(fs::path(graph_file).stem().string(),
                                        "file", r, "ok")
            << "\n";
  return 0;
}

int cmd_bench(const std::string& data_dir, const std::string& methods_csv,
              int limit, std::uint64_t seed, const std::string& out_dir,
              bool wall_timing) {
  auto files = list_graph_files(data_dir);
  if (limit > 0 && limit < static_cast<int>(files.size())) {
    // Seeded sample, then stable order by id.
    graphlay::Rng rng(graphlay::stable_seed(seed, "bench_sample"));
    rng.shuffle(files);
    files.resize(limit);
    std::sort(files.begin(), files.end());
  }
  std::vector<graphlay::Graph> graphs;
  std::vector<std::string> ids;
  for (const auto& [id, path] : files) {
    graphs.push_back(graphlay::load_graph_file(path));
    ids.push_back(id);
  }

  const auto all_methods = graphlay::builtin_methods();
  std::vector<graphlay::MethodSpec> chosen;
  std::stringstream ss(methods_csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const graphlay::MethodSpec* spec = graphlay::find_method(all_methods, name);
    if (!spec) throw CLI::ValidationError("--methods", "unknown method " + name);
    chosen.push_back(*spec);
  }
  if (chosen.empty()) throw CLI::ValidationError("--methods", "no methods given");

  graphlay::BenchmarkOptions opts;
  opts.seed = seed;
  opts.wall_timing = wall_timing;
  const graphlay::BenchmarkReport report =
      graphlay::run_benchmark(chosen, graphs, ids, opts);

  fs::create_directories(out_dir);
  write_file(out_dir + "/raw.csv", graphlay::benchmark_raw_csv(report));
  for (size_t metric = 0; metric < graphlay::metric_names().size(); ++metric) {
    const std::string csv =
        graphlay::benchmark_pmatrix_csv(report, static_cast<int>(metric));
    if (!csv.empty())
      write_file(out_dir + "/p_" + graphlay::metric_names()[metric] + ".csv", csv);
  }
  write_file(out_dir + "/summary.md", graphlay::benchmark_markdown(report));
  return 0;
}

int cmd_gen_data(const std::string& sizes_spec, int per_size, int rome_count,
                 std::uint64_t seed, const std::string& out_dir,
                 const std::string& model) {
  fs::create_directories(out_dir);
  char name[64];
  if (model == "er") {
    const std::vector<int> sizes = parse_sizes(sizes_spec);
    for (const int n : sizes)
      for (int k = 0; k < per_size; ++k) {
        const graphlay::Graph g = graphlay::generate_random_connected(
            n, graphlay::stable_seed(seed, "gen_data", k));
        std::snprintf(name, sizeof(name), "er_n%03d_%03d.txt", n, k);
        write_file(out_dir + "/" + name, graphlay::to_edge_list(g));
      }
  } else if (model == "rome-like") {
    for (int k = 0; k < rome_count; ++k) {
      const graphlay::Graph g =
          graphlay::generate_rome_like(graphlay::stable_seed(seed, "gen_rome", k));
      std::snprintf(name, sizeof(name), "rome_like_%04d.txt", k);
      write_file(out_dir + "/" + name, graphlay::to_edge_list(g));
    }
  } else {
    throw CLI::ValidationError("--model", "unknown model " + model);
  }
  return 0;
}

graphlay::dnn2::ModelConfig config_from_json(const json& j) {
  graphlay::dnn2::ModelConfig cfg;
  cfg.n_max = j.value("n_max", 32);
  cfg.num_residual_blocks = j.value("num_residual_blocks", 4);
  cfg.features_per_layer = j.value("features_per_layer", 32);
  cfg.cheb_order_main = j.value("cheb_order_main", 4);
  cfg.cheb_order_tail = j.value("cheb_order_tail", 2);
  cfg.tail_layer_count = j.value("tail_layer_count", 9);
  const std::string variant = j.value("variant", "plain");
  if (variant == "star")
    cfg.variant = graphlay::dnn2::Variant::star;
  else if (variant == "plain")
    cfg.variant = graphlay::dnn2::Variant::plain;
  else
    throw graphlay::InputError("config: unknown variant " + variant);
  if (j.contains("dense_head_widths")) {
    const auto widths = j.at("dense_head_widths").get<std::vector<int>>();
    if (widths.size() != 3 || widths[2] != 2)
      throw graphlay::InputError("config: dense_head_widths must be 3 values ending in 2");
    cfg.dense_head_widths = {widths[0], widths[1], widths[2]};
  }
  return cfg;
}

int cmd_train(const std::string& config_file, const std::string& data_dir,
              std::uint64_t seed, const std::string& out) {
  json j = json::object();
  if (!config_file.empty()) {
    std::ifstream f(config_file);
    if (!f) throw graphlay::InputError("cannot open config: " + config_file);
    try {
      f >> j;
    } catch (const json::parse_error& e) {
      throw graphlay::InputError(std::string("config: ") + e.what());
    }
  }
  const graphlay::dnn2::ModelConfig cfg = config_from_json(j);
  graphlay::dnn2::TrainOptions opts;
  opts.stage1_epochs = j.value("stage1_epochs", 50);
  opts.stage2_epochs = j.value("stage2_epochs", 20);
  opts.batch_size = j.value("batch_size", 32);
  opts.learning_rate = j.value("learning_rate", 1e-3);
  opts.patience = j.value("patience", 20);
  const double val_fraction = j.value("val_fraction", 0.2);

  auto files = list_graph_files(data_dir);
  std::vector<graphlay::Graph> graphs;
  std::vector<std::string> ids;
  for (const auto& [id, path] : files) {
    graphs.push_back(graphlay::load_graph_file(path));
    ids.push_back(id);
  }
  const graphlay::Dataset ds = graphlay::split_dataset(
      std::move(graphs), std::move(ids), {1.0 - val_fraction, val_fraction, 0.0},
      graphlay::stable_seed(seed, "train_split"));
  std::vector<graphlay::Graph> train_graphs, val_graphs;
  for (int i : ds.indices_of(graphlay::SplitKind::train))
    train_graphs.push_back(ds.graphs[i]);
  for (int i : ds.indices_of(graphlay::SplitKind::validation))
    val_graphs.push_back(ds.graphs[i]);

  const graphlay::dnn2::TrainResult result =
      graphlay::dnn2::train(cfg, train_graphs, val_graphs, seed, opts);
  graphlay::dnn2::save_checkpoint(result.params, out);
  write_file(out + ".history.csv", graphlay::dnn2::history_to_csv(result.history));
  std::cout << "stage1 val loss: " << result.stage1_initial_val_loss << " -> "
            << result.stage1_best_val_loss << "\n";
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& graph_file,
                std::uint64_t seed, const std::string& out) {
  const graphlay::dnn2::ModelParams params = graphlay::dnn2::load_checkpoint(checkpoint);
  const graphlay::Graph g = graphlay::load_graph_file(graph_file);
  const graphlay::Layout x = graphlay::dnn2::predict(g, params, seed);
  graphlay::write_layout_csv(g, x, out);
  return 0;
}

int cmd_render(const std::string& graph_file, const std::string& layout_file,
               const std::string& out) {
  const graphlay::Graph g = graphlay::load_graph_file(graph_file);
  const graphlay::Layout x = graphlay::read_layout_csv_file(g, layout_file);
  write_file(out, graphlay::render_svg(g, x));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphlay: graph layout engines, drawing metrics, and benchmarks"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker pool size (overrides GRAPHLAY_THREADS)");

  // layout
  auto* layout = app.add_subcommand("layout", "compute a layout for one graph");
  std::string graph_file, method = "pivotmds", out_file = "layout.csv";
  std::uint64_t seed = kDefaultSeed;
  layout->add_option("graph", graph_file, "edge-list or GraphML file")->required();
  layout->add_option("--method", method, "tsnet | tsnet-star | pivotmds | sgd | random");
  layout->add_option("--seed", seed, "random seed");
  layout->add_option("-o,--out", out_file, "output layout CSV")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "evaluate a layout");
  std::string m_graph, m_layout;
  graphlay::MetricOptions mopts;
  std::string stress_scale = "optimal";
  metrics->add_option("graph", m_graph)->required();
  metrics->add_option("layout", m_layout)->required();
  metrics->add_option("--k", mopts.neighborhood_k, "neighborhood hops");
  metrics->add_option("--r", mopts.overlap_radius, "cluster-overlap radius");
  metrics->add_option("--rotations", mopts.aspect_rotations,
                      "aspect-ratio rotation grid (0 = per node)");
  metrics->add_option("--stress-scale", stress_scale, "optimal | raw");

  // bench
  auto* bench = app.add_subcommand("bench", "benchmark methods over a dataset");
  std::string b_dir, b_methods = "pivotmds,sgd", b_out = "report";
  int b_limit = 0;
  std::uint64_t b_seed = kDefaultSeed;
  std::string b_timing = "off";
  bench->add_option("dataset", b_dir, "directory of graph files")->required();
  bench->add_option("--methods", b_methods, "comma-separated method names");
  bench->add_option("--limit", b_limit, "random subset size (0 = all)");
  bench->add_option("--seed", b_seed, "random seed");
  bench->add_option("-o,--out", b_out, "report directory");
  bench->add_option("--timing", b_timing,
                    "off = deterministic zeros, wall = wall-clock ms");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate random connected graphs");
  std::string g_sizes = "2..32", g_out = "data", g_model = "er";
  int g_per_size = 5, g_count = 100;
  std::uint64_t g_seed = kDefaultSeed;
  gen->add_option("--sizes", g_sizes, "sizes, e.g. 2..32 or 10,20,30");
  gen->add_option("--per-size", g_per_size, "graphs per size");
  gen->add_option("--count", g_count, "graph count for --model rome-like");
  gen->add_option("--seed", g_seed, "random seed");
  gen->add_option("-o,--out", g_out, "output directory")->required();
  gen->add_option("--model", g_model, "er | rome-like");

  // train
  auto* train = app.add_subcommand("train", "train the graph-convolution model");
  std::string t_config, t_data, t_out = "model.ckpt";
  std::uint64_t t_seed = kDefaultSeed;
  train->add_option("--config", t_config, "JSON config file");
  train->add_option("--data", t_data, "directory of graph files")->required();
  train->add_option("--seed", t_seed, "random seed");
  train->add_option("-o,--out", t_out, "checkpoint path")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "lay a graph out with a checkpoint");
  std::string p_ckpt, p_graph, p_out = "layout.csv";
  std::uint64_t p_seed = kDefaultSeed;
  predict->add_option("--checkpoint", p_ckpt, "checkpoint path")->required();
  predict->add_option("graph", p_graph)->required();
  predict->add_option("--seed", p_seed, "random seed");
  predict->add_option("-o,--out", p_out, "output layout CSV")->required();

  // render
  auto* render = app.add_subcommand("render", "render a layout to SVG");
  std::string r_graph, r_layout, r_out = "drawing.svg";
  render->add_option("graph", r_graph)->required();
  render->add_option("layout", r_layout)->required();
  render->add_option("-o,--out", r_out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems exit 2
  }

  configure_threads(threads);
  try {
    if (app.got_subcommand(layout)) return cmd_layout(graph_file, method, seed, out_file);
    if (app.got_subcommand(metrics)) {
      if (stress_scale == "raw")
        mopts.stress_scale = graphlay::StressScale::raw;
      else if (stress_scale != "optimal")
        throw graphlay::InputError("--stress-scale must be optimal or raw");
      return cmd_metrics(m_graph, m_layout, mopts);
    }
    if (app.got_subcommand(bench)) {
      if (b_timing != "off" && b_timing != "wall")
        throw graphlay::InputError("--timing must be off or wall");
      return cmd_bench(b_dir, b_methods, b_limit, b_seed, b_out, b_timing == "wall");
    }
    if (app.got_subcommand(gen)) {
      return cmd_gen_data(g_sizes, g_per_size, g_count, g_seed, g_out, g_model);
    }
    if (app.got_subcommand(train)) return cmd_train(t_config, t_data, t_seed, t_out);
    if (app.got_subcommand(predict)) return cmd_predict(p_ckpt, p_graph, p_seed, p_out);
    if (app.got_subcommand(render)) return cmd_render(r_graph, r_layout, r_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const graphlay::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
