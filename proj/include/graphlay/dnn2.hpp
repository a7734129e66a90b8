#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphlay/autodiff.hpp"
#include "graphlay/core.hpp"
#include "graphlay/graph.hpp"
#include "graphlay/layouts.hpp"
#include "graphlay/sparse.hpp"
#include "graphlay/tsne.hpp"

namespace graphlay::dnn2 {

enum class Variant { plain, star };

struct ModelConfig {
  int n_max = 32;
  int num_residual_blocks = 4;
  int features_per_layer = 32;
  int cheb_order_main = 4;
  int cheb_order_tail = 2;
  int tail_layer_count = 9;
  Variant variant = Variant::plain;
  std::array<int, 3> dense_head_widths{64, 32, 2};

  int feature_width() const { return variant == Variant::star ? 4 : 2; }
  int num_convolutions() const { return num_residual_blocks * 3; }
  /// Chebyshev order of the conv at forward position `idx` (projection
  /// shortcuts are always order 0 and not counted here).
  int conv_order(int idx) const {
    return idx >= num_convolutions() - tail_layer_count ? cheb_order_tail
                                                        : cheb_order_main;
  }

  static ModelConfig desk() { return ModelConfig{}; }
  /// The full-scale configuration (not an acceptance target).
  static ModelConfig full_paper() {
    ModelConfig c;
    c.n_max = 128;
    c.num_residual_blocks = 16;
    c.features_per_layer = 64;
    return c;
  }
};

/// Min-max rescaling of feature columns to [0,1]. The node-index column is
/// fixed to [0, n_max-1] and the random-metric column to its theoretical
/// [0,1]; PivotMDS columns use train-corpus statistics.
struct FeatureScaling {
  std::vector<double> col_min;
  std::vector<double> col_max;

  static FeatureScaling theoretical(const ModelConfig& cfg);
  Matrix apply(const Matrix& raw) const;
};

/// Unscaled feature columns: node index, seeded uniform random metric,
/// and for the star variant the PivotMDS coordinates.
Matrix raw_features(const Graph& g, Variant variant, std::uint64_t seed);

/// raw_features with scaling applied.
Matrix build_features(const Graph& g, Variant variant, std::uint64_t seed,
                      const FeatureScaling& scale);

struct PaddedInput {
  Matrix features;             // n_max x F, fictive rows zero
  std::vector<double> mask;    // n_max, 1 at real slots
  ChebyshevFilters filters;    // built on the padded (permuted) graph
  std::vector<int> slot_of_real;  // real node r sits at slot slot_of_real[r]
  int real_count = 0;
};

/// Scatters real nodes into seeded-random slots among n_max, with fictive
/// slots isolated, and carries the Chebyshev filters of the padded graph.
/// Throws InputError when the graph exceeds n_max.
PaddedInput pad_and_permute(const Graph& g, const Matrix& features,
                            const ModelConfig& cfg, std::uint64_t seed);

struct ConvParams {
  Matrix theta;  // (F * (K+1)) x F'
  int order = 0;
};

struct BlockParams {
  std::array<ConvParams, 3> conv;
  std::optional<ConvParams> projection;  // present when widths differ
};

struct ModelParams {
  ModelConfig cfg;
  std::vector<BlockParams> blocks;
  std::array<Matrix, 3> head_w;
  std::array<Matrix, 3> head_b;  // 1 x width row vectors
  FeatureScaling feature_scale;

  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);
  bool operator==(const ModelParams& o) const;
};

/// Z = concat_k(T_k(L~) X) Theta recorded on the tape.
ad::Var graph_convolution(ad::Tape& tape, ad::Var x, const ChebyshevFilters& filters,
                          ad::Var theta, int order);

/// Mirror of ModelParams with tape handles, so one forward definition
/// serves both training (leaves with gradients) and prediction (constants).
struct TapeParams {
  std::vector<std::array<ad::Var, 3>> conv_theta;
  std::vector<std::optional<ad::Var>> projection;
  std::array<ad::Var, 3> head_w;
  std::array<ad::Var, 3> head_b;

  static TapeParams load(ad::Tape& tape, const ModelParams& p, bool requires_grad);
};

/// Full model forward pass: residual blocks then the shared-weight dense
/// head; output is n_max x 2 with fictive rows zero.
ad::Var model_forward(ad::Tape& tape, const PaddedInput& input,
                      const TapeParams& params, const ModelConfig& cfg);

/// Convenience: forward + extraction of real-node rows in original order.
Layout predict(const Graph& g, const ModelParams& params, std::uint64_t seed);

struct TrainOptions {
  int stage1_epochs = 200;
  int stage2_epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
  int patience = 20;
  int n_max_for_perplexity = 128;
  std::uint64_t test_perm_seed = 0x7e57c0de;  // fixed so every model sees the
                                              // same permuted validation graphs
};

struct HistoryRow {
  int epoch = 0;
  int stage = 1;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<HistoryRow> history;
  double stage1_initial_val_loss = 0.0;
  double stage1_best_val_loss = 0.0;
};

/// Two-stage training with Adam (reset between stages) and early stopping;
/// returns the best-validation-loss parameters. The loss schedule follows
/// cfg.variant (tsnet weights for plain, tsnet_star weights for star).
TrainResult train(const ModelConfig& cfg, const std::vector<Graph>& train_set,
                  const std::vector<Graph>& val_set, std::uint64_t seed,
                  const TrainOptions& opts = {});

std::string history_to_csv(const std::vector<HistoryRow>& history);

/// Versioned self-describing text checkpoint; round-trips bit-exactly.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);
std::string checkpoint_to_string(const ModelParams& params);
ModelParams checkpoint_from_string(const std::string& text);

}  // namespace graphlay::dnn2
