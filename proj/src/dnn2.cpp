#include "graphlay/dnn2.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace graphlay::dnn2 {

FeatureScaling FeatureScaling::theoretical(const ModelConfig& cfg) {
  FeatureScaling s;
  const int f = cfg.feature_width();
  s.col_min.assign(f, 0.0);
  s.col_max.assign(f, 1.0);
  s.col_max[0] = static_cast<double>(cfg.n_max - 1);  // node-index column
  return s;
}

Matrix FeatureScaling::apply(const Matrix& raw) const {
  if (raw.cols() != static_cast<int>(col_min.size()))
    throw std::invalid_argument("feature scaling width mismatch");
  Matrix out = raw;
  for (int j = 0; j < out.cols(); ++j) {
    const double range = col_max[j] - col_min[j];
    for (int i = 0; i < out.rows(); ++i)
      out(i, j) = range > 0.0 ? (out(i, j) - col_min[j]) / range : 0.0;
  }
  return out;
}

Matrix raw_features(const Graph& g, Variant variant, std::uint64_t seed) {
  const int n = g.num_nodes();
  const int f = variant == Variant::star ? 4 : 2;
  Matrix feats(n, f);
  Rng rng(stable_seed(seed, "feature_random"));
  for (int i = 0; i < n; ++i) {
    feats(i, 0) = static_cast<double>(i);
    feats(i, 1) = rng.uniform();
  }
  if (variant == Variant::star) {
    const Layout mds = pivot_mds(g, std::min(50, n), stable_seed(seed, "feature_pivot"));
    for (int i = 0; i < n; ++i) {
      feats(i, 2) = mds(i, 0);
      feats(i, 3) = mds(i, 1);
    }
  }
  return feats;
}

Matrix build_features(const Graph& g, Variant variant, std::uint64_t seed,
                      const FeatureScaling& scale) {
  return scale.apply(raw_features(g, variant, seed));
}

PaddedInput pad_and_permute(const Graph& g, const Matrix& features,
                            const ModelConfig& cfg, std::uint64_t seed) {
  const int n = g.num_nodes();
  if (n > cfg.n_max)
    throw InputError("graph with " + std::to_string(n) +
                     " nodes exceeds model capacity n_max=" +
                     std::to_string(cfg.n_max));
  if (features.rows() != n) throw std::invalid_argument("feature row mismatch");

  Rng rng(stable_seed(seed, "pad_permute"));
  const std::vector<int> perm = rng.permutation(cfg.n_max);

  PaddedInput out;
  out.real_count = n;
  out.slot_of_real.assign(perm.begin(), perm.begin() + n);
  out.mask.assign(cfg.n_max, 0.0);
  out.features = Matrix(cfg.n_max, features.cols());
  for (int r = 0; r < n; ++r) {
    out.mask[out.slot_of_real[r]] = 1.0;
    for (int j = 0; j < features.cols(); ++j)
      out.features(out.slot_of_real[r], j) = features(r, j);
  }

  std::vector<std::pair<int, int>> padded_edges;
  padded_edges.reserve(g.edges().size());
  for (auto [u, v] : g.edges())
    padded_edges.emplace_back(out.slot_of_real[u], out.slot_of_real[v]);

  // Fictive slots are isolated: their Laplacian rows are zero, so no filter
  // couples real and fictive positions.
  const SparseMatrix lap = normalized_laplacian(cfg.n_max, padded_edges);
  const double lam = lambda_max(lap).value;
  const SparseMatrix lt = rescaled_laplacian(lap, lam > 0.0 ? lam : 2.0);
  out.filters = chebyshev_filters(lt, std::max(cfg.cheb_order_main, cfg.cheb_order_tail));
  return out;
}

namespace {

Matrix glorot(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double limit = std::sqrt(6.0 / (rows + cols));
  for (size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.uniform(-limit, limit);
  return m;
}

// Visits every parameter tensor in a fixed order (blocks, then head).
template <class Params, class Fn>
void for_each_param(Params& p, Fn&& fn) {
  for (auto& block : p.blocks) {
    for (auto& conv : block.conv) fn(conv.theta);
    if (block.projection) fn(block.projection->theta);
  }
  for (auto& w : p.head_w) fn(w);
  for (auto& b : p.head_b) fn(b);
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(stable_seed(seed, "model_init"));
  ModelParams p;
  p.cfg = cfg;
  p.feature_scale = FeatureScaling::theoretical(cfg);
  const int fpl = cfg.features_per_layer;
  int conv_idx = 0;
  int in_width = cfg.feature_width();
  for (int b = 0; b < cfg.num_residual_blocks; ++b) {
    BlockParams block;
    int w = in_width;
    for (int c = 0; c < 3; ++c) {
      const int order = cfg.conv_order(conv_idx++);
      block.conv[c].order = order;
      block.conv[c].theta = glorot(w * (order + 1), fpl, rng);
      w = fpl;
    }
    if (in_width != fpl) {
      ConvParams proj;
      proj.order = 0;
      proj.theta = glorot(in_width, fpl, rng);
      block.projection = std::move(proj);
    }
    p.blocks.push_back(std::move(block));
    in_width = fpl;
  }
  int hw = fpl;
  for (int h = 0; h < 3; ++h) {
    const int out_w = cfg.dense_head_widths[h];
    p.head_w[h] = glorot(hw, out_w, rng);
    p.head_b[h] = Matrix(1, out_w);
    hw = out_w;
  }
  return p;
}

bool ModelParams::operator==(const ModelParams& o) const {
  if (cfg.n_max != o.cfg.n_max || cfg.num_residual_blocks != o.cfg.num_residual_blocks ||
      cfg.features_per_layer != o.cfg.features_per_layer ||
      cfg.cheb_order_main != o.cfg.cheb_order_main ||
      cfg.cheb_order_tail != o.cfg.cheb_order_tail ||
      cfg.tail_layer_count != o.cfg.tail_layer_count || cfg.variant != o.cfg.variant ||
      cfg.dense_head_widths != o.cfg.dense_head_widths)
    return false;
  if (feature_scale.col_min != o.feature_scale.col_min ||
      feature_scale.col_max != o.feature_scale.col_max)
    return false;
  if (blocks.size() != o.blocks.size()) return false;
  for (size_t b = 0; b < blocks.size(); ++b) {
    for (int c = 0; c < 3; ++c)
      if (!(blocks[b].conv[c].theta == o.blocks[b].conv[c].theta) ||
          blocks[b].conv[c].order != o.blocks[b].conv[c].order)
        return false;
    if (blocks[b].projection.has_value() != o.blocks[b].projection.has_value())
      return false;
    if (blocks[b].projection &&
        !(blocks[b].projection->theta == o.blocks[b].projection->theta))
      return false;
  }
  for (int h = 0; h < 3; ++h)
    if (!(head_w[h] == o.head_w[h]) || !(head_b[h] == o.head_b[h])) return false;
  return true;
}

ad::Var graph_convolution(ad::Tape& tape, ad::Var x, const ChebyshevFilters& filters,
                          ad::Var theta, int order) {
  if (order > filters.order)
    throw std::invalid_argument("convolution order exceeds available filters");
  std::vector<ad::Var> parts;
  parts.reserve(order + 1);
  for (int k = 0; k <= order; ++k)
    parts.push_back(tape.sparse_matmul(filters.filters[k], x));
  return tape.matmul(tape.concat_cols(parts), theta);
}

TapeParams TapeParams::load(ad::Tape& tape, const ModelParams& p, bool requires_grad) {
  TapeParams tp;
  for (const auto& block : p.blocks) {
    std::array<ad::Var, 3> convs;
    for (int c = 0; c < 3; ++c) convs[c] = tape.leaf(block.conv[c].theta, requires_grad);
    tp.conv_theta.push_back(convs);
    if (block.projection)
      tp.projection.push_back(tape.leaf(block.projection->theta, requires_grad));
    else
      tp.projection.push_back(std::nullopt);
  }
  // Creation order matches for_each_param so leaf ids map back to params.
  for (int h = 0; h < 3; ++h) tp.head_w[h] = tape.leaf(p.head_w[h], requires_grad);
  for (int h = 0; h < 3; ++h) tp.head_b[h] = tape.leaf(p.head_b[h], requires_grad);
  return tp;
}

ad::Var model_forward(ad::Tape& tape, const PaddedInput& input,
                      const TapeParams& params, const ModelConfig& cfg) {
  ad::Var x = tape.constant(input.features);
  int conv_idx = 0;
  for (int b = 0; b < cfg.num_residual_blocks; ++b) {
    const ad::Var block_in = x;
    for (int c = 0; c < 3; ++c) {
      ad::Var z = graph_convolution(tape, x, input.filters,
                                    params.conv_theta[b][c], cfg.conv_order(conv_idx));
      ++conv_idx;
      z = tape.row_l2_normalize(z);
      z = tape.mask_rows(z, input.mask);
      if (c < 2) z = tape.relu(z);
      x = z;
    }
    const ad::Var shortcut =
        params.projection[b]
            ? graph_convolution(tape, block_in, input.filters, *params.projection[b], 0)
            : block_in;
    x = tape.relu(tape.add(x, shortcut));
    x = tape.mask_rows(x, input.mask);
  }
  for (int h = 0; h < 3; ++h) {
    x = tape.add(tape.matmul(x, params.head_w[h]), params.head_b[h]);
    if (h < 2) x = tape.relu(x);
  }
  return tape.mask_rows(x, input.mask);
}

Layout predict(const Graph& g, const ModelParams& params, std::uint64_t seed) {
  const ModelConfig& cfg = params.cfg;
  const Matrix feats = build_features(g, cfg.variant, stable_seed(seed, "features"),
                                      params.feature_scale);
  const PaddedInput input = pad_and_permute(g, feats, cfg, stable_seed(seed, "pad"));
  ad::Tape tape;
  const TapeParams tp = TapeParams::load(tape, params, false);
  const ad::Var out = model_forward(tape, input, tp, cfg);
  const Matrix& padded = tape.value(out);
  Layout x(g.num_nodes(), 2);
  for (int r = 0; r < g.num_nodes(); ++r) {
    x(r, 0) = padded(input.slot_of_real[r], 0);
    x(r, 1) = padded(input.slot_of_real[r], 1);
  }
  return x;
}

namespace {

struct GraphData {
  const Graph* g = nullptr;
  JointP p;
  Matrix scaled_features;
};

// Value-only mean loss over a set of graphs with fixed permutations.
double evaluate_loss(const ModelConfig& cfg, const ModelParams& params,
                     const std::vector<GraphData>& data,
                     const std::vector<PaddedInput>& padded, const LossWeights& w) {
  double total = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    ad::Tape tape;
    const TapeParams tp = TapeParams::load(tape, params, false);
    const ad::Var out = model_forward(tape, padded[i], tp, cfg);
    std::vector<int> rows = padded[i].slot_of_real;
    const ad::Var real = tape.gather_rows(out, std::move(rows));
    total += full_loss(tape.value(real), data[i].p, w);
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

TrainResult train(const ModelConfig& cfg, const std::vector<Graph>& train_set,
                  const std::vector<Graph>& val_set, std::uint64_t seed,
                  const TrainOptions& opts) {
  if (train_set.empty() || val_set.empty())
    throw InputError("training requires non-empty train and validation sets");
  for (const Graph& g : train_set)
    if (g.num_nodes() > cfg.n_max)
      throw InputError("train graph exceeds n_max");
  for (const Graph& g : val_set)
    if (g.num_nodes() > cfg.n_max)
      throw InputError("validation graph exceeds n_max");

  const Schedule sched = cfg.variant == Variant::star ? Schedule::tsnet_star()
                                                      : Schedule::tsnet();

  // Per-graph preprocessing: p distributions and raw features, computed
  // once (graphs are independent; rows filled in parallel).
  auto preprocess = [&](const std::vector<Graph>& graphs, const char* tag) {
    std::vector<GraphData> data(graphs.size());
    std::vector<Matrix> raw(graphs.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(graphs.size()); ++i) {
      const Graph& g = graphs[i];
      data[i].g = &g;
      const DistanceMatrix d = serial::all_pairs_bfs(g);
      data[i].p = joint_p(d, default_perplexity(g.num_nodes(), opts.n_max_for_perplexity));
      raw[i] = raw_features(g, cfg.variant, stable_seed(seed, tag, i));
    }
    return std::make_pair(std::move(data), std::move(raw));
  };
  auto [train_data, train_raw] = preprocess(train_set, "train_features");
  auto [val_data, val_raw] = preprocess(val_set, "val_features");

  // Feature scaling: index and random-metric columns are theoretical;
  // PivotMDS columns use train-corpus min/max.
  FeatureScaling scale = FeatureScaling::theoretical(cfg);
  if (cfg.variant == Variant::star) {
    for (int j = 2; j < 4; ++j) {
      double lo = 1e308, hi = -1e308;
      for (const Matrix& m : train_raw)
        for (int i = 0; i < m.rows(); ++i) {
          lo = std::min(lo, m(i, j));
          hi = std::max(hi, m(i, j));
        }
      scale.col_min[j] = lo;
      scale.col_max[j] = hi;
    }
  }
  for (size_t i = 0; i < train_raw.size(); ++i)
    train_data[i].scaled_features = scale.apply(train_raw[i]);
  for (size_t i = 0; i < val_raw.size(); ++i)
    val_data[i].scaled_features = scale.apply(val_raw[i]);

  ModelParams params = ModelParams::init(cfg, seed);
  params.feature_scale = scale;

  // Validation permutations are fixed so every evaluation sees the same
  // padded graphs.
  std::vector<PaddedInput> val_padded(val_data.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(val_data.size()); ++i)
    val_padded[i] = pad_and_permute(*val_data[i].g, val_data[i].scaled_features, cfg,
                                    stable_seed(opts.test_perm_seed, "val_perm", i));

  TrainResult result;
  result.stage1_initial_val_loss =
      evaluate_loss(cfg, params, val_data, val_padded, sched.stage1);

  std::vector<int> order(train_data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  int global_epoch = 0;
  for (int stage = 1; stage <= 2; ++stage) {
    const LossWeights& w = stage == 1 ? sched.stage1 : sched.stage2;
    const int max_epochs = stage == 1 ? opts.stage1_epochs : opts.stage2_epochs;
    if (max_epochs <= 0) continue;

    // Optimizer reset between stages.
    std::vector<ad::AdamState> adam;
    for_each_param(params, [&](Matrix&) { adam.emplace_back(); });
    ad::AdamConfig adam_cfg;
    adam_cfg.lr = opts.learning_rate;

    ModelParams best = params;
    double best_val = evaluate_loss(cfg, params, val_data, val_padded, w);
    if (stage == 1) result.stage1_best_val_loss = best_val;
    int since_best = 0;

    for (int epoch = 0; epoch < max_epochs; ++epoch) {
      Rng shuffle_rng(stable_seed(seed, "epoch_order",
                                   static_cast<std::uint64_t>(stage) * 1000000 + epoch));
      shuffle_rng.shuffle(order);

      double train_loss_sum = 0.0;
      for (size_t start = 0; start < order.size(); start += opts.batch_size) {
        const size_t end = std::min(order.size(), start + opts.batch_size);
        ad::Tape tape;
        const TapeParams tp = TapeParams::load(tape, params, true);
        std::vector<PaddedInput> batch_padded;
        batch_padded.reserve(end - start);
        std::vector<ad::Var> losses;
        for (size_t k = start; k < end; ++k) {
          const int gi = order[k];
          batch_padded.push_back(pad_and_permute(
              *train_data[gi].g, train_data[gi].scaled_features, cfg,
              stable_seed(stable_seed(seed, "train_perm", gi), "epoch",
                          static_cast<std::uint64_t>(stage) * 1000000 + epoch)));
          const PaddedInput& pin = batch_padded.back();
          const ad::Var out = model_forward(tape, pin, tp, cfg);
          std::vector<int> rows = pin.slot_of_real;
          const ad::Var real = tape.gather_rows(out, std::move(rows));
          losses.push_back(tape.tsnet_loss(real, train_data[gi].p, w));
        }
        ad::Var batch_loss = losses[0];
        for (size_t k = 1; k < losses.size(); ++k)
          batch_loss = tape.add(batch_loss, losses[k]);
        batch_loss = tape.scale(batch_loss, 1.0 / static_cast<double>(losses.size()));
        tape.backward(batch_loss);

        for (const ad::Var l : losses) train_loss_sum += tape.value(l)(0, 0);

        // Leaves were created first and in for_each_param order.
        int leaf_idx = 0;
        for_each_param(params, [&](Matrix& m) {
          adam_step(m, tape.grad(ad::Var{leaf_idx}), adam[leaf_idx], adam_cfg);
          ++leaf_idx;
        });
      }

      const double val_loss = evaluate_loss(cfg, params, val_data, val_padded, w);
      HistoryRow row;
      row.epoch = global_epoch++;
      row.stage = stage;
      row.train_loss = train_loss_sum / static_cast<double>(order.size());
      row.val_loss = val_loss;
      result.history.push_back(row);

      if (val_loss < best_val) {
        best_val = val_loss;
        best = params;
        since_best = 0;
      } else if (++since_best >= opts.patience) {
        break;
      }
    }
    params = best;
    if (stage == 1) result.stage1_best_val_loss = best_val;
  }

  result.params = std::move(params);
  return result;
}

std::string history_to_csv(const std::vector<HistoryRow>& history) {
  std::string out = "epoch,stage,train_loss,val_loss\n";
  for (const HistoryRow& r : history) {
    out += std::to_string(r.epoch);
    out += ',';
    out += std::to_string(r.stage);
    out += ',';
    out += format_double(r.train_loss);
    out += ',';
    out += format_double(r.val_loss);
    out += '\n';
  }
  return out;
}

namespace {

void write_tensor(std::ostream& os, const std::string& name, const Matrix& m) {
  os << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace

std::string checkpoint_to_string(const ModelParams& p) {
  std::ostringstream os;
  const ModelConfig& c = p.cfg;
  os << "graphlay-checkpoint v1\n";
  os << "variant " << (c.variant == Variant::star ? "star" : "plain") << '\n';
  os << "n_max " << c.n_max << '\n';
  os << "num_residual_blocks " << c.num_residual_blocks << '\n';
  os << "features_per_layer " << c.features_per_layer << '\n';
  os << "cheb_order_main " << c.cheb_order_main << '\n';
  os << "cheb_order_tail " << c.cheb_order_tail << '\n';
  os << "tail_layer_count " << c.tail_layer_count << '\n';
  os << "dense_head_widths " << c.dense_head_widths[0] << ' '
     << c.dense_head_widths[1] << ' ' << c.dense_head_widths[2] << '\n';
  os << "feature_scale " << p.feature_scale.col_min.size() << '\n';
  for (size_t j = 0; j < p.feature_scale.col_min.size(); ++j)
    os << format_double(p.feature_scale.col_min[j]) << ' '
       << format_double(p.feature_scale.col_max[j]) << '\n';
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    for (int cidx = 0; cidx < 3; ++cidx)
      write_tensor(os, "block" + std::to_string(b) + ".conv" + std::to_string(cidx) +
                           ".theta",
                   p.blocks[b].conv[cidx].theta);
    if (p.blocks[b].projection)
      write_tensor(os, "block" + std::to_string(b) + ".projection.theta",
                   p.blocks[b].projection->theta);
  }
  for (int h = 0; h < 3; ++h) {
    write_tensor(os, "head.w" + std::to_string(h), p.head_w[h]);
    write_tensor(os, "head.b" + std::to_string(h), p.head_b[h]);
  }
  os << "end\n";
  return os.str();
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write checkpoint: " + path);
  f << checkpoint_to_string(params);
}

namespace {

double parse_double_token(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str()) throw InputError("checkpoint: malformed number \"" + tok + "\"");
  return v;
}

}  // namespace

ModelParams checkpoint_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "graphlay-checkpoint v1")
    throw InputError("checkpoint version mismatch (expected graphlay-checkpoint v1)");

  ModelConfig cfg;
  FeatureScaling scale;
  std::map<std::string, Matrix> tensors;
  bool saw_end = false;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end") {
      saw_end = true;
      break;
    } else if (key == "variant") {
      std::string v;
      ls >> v;
      if (v == "star")
        cfg.variant = Variant::star;
      else if (v == "plain")
        cfg.variant = Variant::plain;
      else
        throw InputError("checkpoint: unknown variant " + v);
    } else if (key == "n_max") {
      ls >> cfg.n_max;
    } else if (key == "num_residual_blocks") {
      ls >> cfg.num_residual_blocks;
    } else if (key == "features_per_layer") {
      ls >> cfg.features_per_layer;
    } else if (key == "cheb_order_main") {
      ls >> cfg.cheb_order_main;
    } else if (key == "cheb_order_tail") {
      ls >> cfg.cheb_order_tail;
    } else if (key == "tail_layer_count") {
      ls >> cfg.tail_layer_count;
    } else if (key == "dense_head_widths") {
      ls >> cfg.dense_head_widths[0] >> cfg.dense_head_widths[1] >>
          cfg.dense_head_widths[2];
    } else if (key == "feature_scale") {
      size_t f = 0;
      ls >> f;
      scale.col_min.resize(f);
      scale.col_max.resize(f);
      for (size_t j = 0; j < f; ++j) {
        if (!std::getline(in, line)) throw InputError("checkpoint: truncated scaling");
        std::istringstream ss(line);
        std::string a, b;
        ss >> a >> b;
        scale.col_min[j] = parse_double_token(a);
        scale.col_max[j] = parse_double_token(b);
      }
    } else if (key == "tensor") {
      std::string name;
      int rows = 0, cols = 0;
      ls >> name >> rows >> cols;
      if (rows <= 0 || cols <= 0) throw InputError("checkpoint: bad tensor header");
      Matrix m(rows, cols);
      for (int i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw InputError("checkpoint: truncated tensor");
        std::istringstream ss(line);
        std::string tok;
        for (int j = 0; j < cols; ++j) {
          if (!(ss >> tok)) throw InputError("checkpoint: short tensor row");
          m(i, j) = parse_double_token(tok);
        }
      }
      tensors.emplace(name, std::move(m));
    } else {
      throw InputError("checkpoint: unknown field " + key);
    }
  }
  if (!saw_end) throw InputError("checkpoint: missing end marker");

  ModelParams p;
  p.cfg = cfg;
  p.feature_scale = std::move(scale);
  auto take = [&](const std::string& name) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw InputError("checkpoint: missing tensor " + name);
    Matrix m = std::move(it->second);
    tensors.erase(it);
    return m;
  };
  int conv_idx = 0;
  int in_width = cfg.feature_width();
  for (int b = 0; b < cfg.num_residual_blocks; ++b) {
    BlockParams block;
    for (int c = 0; c < 3; ++c) {
      block.conv[c].order = cfg.conv_order(conv_idx++);
      block.conv[c].theta =
          take("block" + std::to_string(b) + ".conv" + std::to_string(c) + ".theta");
    }
    const std::string proj_name = "block" + std::to_string(b) + ".projection.theta";
    if (tensors.count(proj_name)) {
      ConvParams proj;
      proj.order = 0;
      proj.theta = take(proj_name);
      block.projection = std::move(proj);
    } else if (in_width != cfg.features_per_layer) {
      throw InputError("checkpoint: missing tensor " + proj_name);
    }
    p.blocks.push_back(std::move(block));
    in_width = cfg.features_per_layer;
  }
  for (int h = 0; h < 3; ++h) {
    p.head_w[h] = take("head.w" + std::to_string(h));
    p.head_b[h] = take("head.b" + std::to_string(h));
  }
  if (!tensors.empty())
    throw InputError("checkpoint: unexpected tensor " + tensors.begin()->first);
  return p;
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace graphlay::dnn2
