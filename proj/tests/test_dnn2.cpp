#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "graphlay/bench.hpp"
#include "graphlay/dnn2.hpp"
#include "graphlay/graph.hpp"

using namespace graphlay;
using namespace graphlay::dnn2;

namespace {

Graph p2() { return parse_edge_list_text("0 1\n"); }

ModelConfig tiny_config(Variant variant = Variant::plain) {
  ModelConfig cfg;
  cfg.n_max = 8;
  cfg.num_residual_blocks = 1;
  cfg.features_per_layer = 6;
  cfg.dense_head_widths = {5, 4, 2};
  cfg.variant = variant;
  return cfg;
}

}  // namespace

TEST_CASE("build features") {
  SUBCASE("plain P2 index column") {
    const ModelConfig cfg = tiny_config();
    const FeatureScaling scale = FeatureScaling::theoretical(cfg);
    const Matrix f = build_features(p2(), Variant::plain, 5, scale);
    CHECK(f.cols() == 2);
    CHECK(f(0, 0) == doctest::Approx(0.0));
    CHECK(f(1, 0) == doctest::Approx(1.0 / (cfg.n_max - 1)));
    CHECK(f(0, 1) >= 0.0);
    CHECK(f(0, 1) <= 1.0);
  }
  SUBCASE("star variant has width four") {
    const Graph g = generate_random_connected(6, 3);
    const Matrix f = raw_features(g, Variant::star, 5);
    CHECK(f.cols() == 4);
  }
  SUBCASE("deterministic per seed") {
    const Graph g = generate_random_connected(6, 3);
    CHECK(raw_features(g, Variant::star, 9) == raw_features(g, Variant::star, 9));
    CHECK_FALSE(raw_features(g, Variant::plain, 9) ==
                raw_features(g, Variant::plain, 10));
  }
}

TEST_CASE("pad and permute") {
  const ModelConfig cfg = tiny_config();
  const FeatureScaling scale = FeatureScaling::theoretical(cfg);

  SUBCASE("mask counts real slots") {
    const Graph g = p2();
    const PaddedInput in = pad_and_permute(g, build_features(g, cfg.variant, 1, scale),
                                           cfg, 7);
    double ones = 0.0;
    for (double m : in.mask) ones += m;
    CHECK(ones == 2.0);
    CHECK(in.real_count == 2);
  }
  SUBCASE("full capacity is permutation only") {
    const Graph g = generate_random_connected(8, 2);
    const PaddedInput in = pad_and_permute(g, build_features(g, cfg.variant, 1, scale),
                                           cfg, 7);
    for (double m : in.mask) CHECK(m == 1.0);
  }
  SUBCASE("capacity error") {
    const Graph g = generate_random_connected(9, 2);
    CHECK_THROWS_AS(pad_and_permute(g, build_features(g, cfg.variant, 1,
                                                      FeatureScaling::theoretical(cfg)),
                                    cfg, 7),
                    InputError);
  }
  SUBCASE("feature multiset preserved across permutations") {
    const Graph g = generate_random_connected(5, 4);
    const Matrix feats = build_features(g, cfg.variant, 1, scale);
    const PaddedInput a = pad_and_permute(g, feats, cfg, 100);
    const PaddedInput b = pad_and_permute(g, feats, cfg, 200);
    std::multiset<double> ma, mb;
    for (int r = 0; r < g.num_nodes(); ++r) {
      ma.insert(a.features(a.slot_of_real[r], 1));
      mb.insert(b.features(b.slot_of_real[r], 1));
    }
    CHECK(ma == mb);
    // And inverse permutation recovers identical per-node rows.
    for (int r = 0; r < g.num_nodes(); ++r)
      for (int j = 0; j < feats.cols(); ++j)
        CHECK(a.features(a.slot_of_real[r], j) == b.features(b.slot_of_real[r], j));
  }
  SUBCASE("fictive slots are isolated in every filter") {
    const Graph g = generate_random_connected(5, 4);
    const PaddedInput in = pad_and_permute(g, build_features(g, cfg.variant, 1, scale),
                                           cfg, 31);
    std::vector<char> real(cfg.n_max, 0);
    for (int slot : in.slot_of_real) real[slot] = 1;
    for (const SparseMatrix& f : in.filters.filters) {
      const Matrix d = f.to_dense();
      for (int i = 0; i < cfg.n_max; ++i)
        for (int j = 0; j < cfg.n_max; ++j)
          if (real[i] != real[j]) CHECK(d(i, j) == 0.0);
    }
  }
}

TEST_CASE("graph convolution") {
  const Graph g = generate_random_connected(6, 8);
  const SparseMatrix lap = normalized_laplacian(g);
  const SparseMatrix lt = rescaled_laplacian(lap, lambda_max(lap).value);
  const ChebyshevFilters filters = chebyshev_filters(lt, 3);
  Rng rng(9);
  Matrix x0(6, 3);
  for (size_t i = 0; i < x0.size(); ++i) x0.data()[i] = rng.uniform() - 0.5;

  SUBCASE("order zero with identity kernel is a no-op") {
    ad::Tape t;
    Matrix eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
    const ad::Var z =
        graph_convolution(t, t.constant(x0), filters, t.constant(eye), 0);
    CHECK(t.value(z) == x0);
  }
  SUBCASE("zero kernel gives zero") {
    ad::Tape t;
    const ad::Var z = graph_convolution(t, t.constant(x0), filters,
                                        t.constant(Matrix(12, 4)), 3);
    for (size_t i = 0; i < t.value(z).size(); ++i) CHECK(t.value(z).data()[i] == 0.0);
  }
  SUBCASE("matches loop-over-k oracle and row-partitioned formulation") {
    ad::Tape t;
    Rng rng2(10);
    Matrix theta(3 * 4, 5);
    for (size_t i = 0; i < theta.size(); ++i) theta.data()[i] = rng2.uniform() - 0.5;
    const ad::Var z =
        graph_convolution(t, t.constant(x0), filters, t.constant(theta), 3);

    // Oracle: sum_k T_k X Theta_k with Theta row-partitioned by k.
    Matrix expect(6, 5);
    for (int k = 0; k <= 3; ++k) {
      const Matrix tx = filters.filters[k].to_dense();
      Matrix txx(6, 3);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) {
          double acc = 0.0;
          for (int m = 0; m < 6; ++m) acc += tx(i, m) * x0(m, j);
          txx(i, j) = acc;
        }
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 5; ++c) {
          double acc = 0.0;
          for (int j = 0; j < 3; ++j) acc += txx(i, j) * theta(k * 3 + j, c);
          expect(i, c) += acc;
        }
    }
    for (int i = 0; i < 6; ++i)
      for (int c = 0; c < 5; ++c)
        CHECK(std::abs(t.value(z)(i, c) - expect(i, c)) < 1e-10);
  }
}

TEST_CASE("residual block behavior through the model") {
  const ModelConfig cfg = tiny_config();
  const Graph g = generate_random_connected(5, 12);
  ModelParams params = ModelParams::init(cfg, 3);
  const Matrix feats = build_features(g, cfg.variant, 2, params.feature_scale);
  const PaddedInput input = pad_and_permute(g, feats, cfg, 6);

  SUBCASE("fictive output rows are exactly zero") {
    ad::Tape tape;
    const TapeParams tp = TapeParams::load(tape, params, false);
    const ad::Var out = model_forward(tape, input, tp, cfg);
    std::vector<char> real(cfg.n_max, 0);
    for (int slot : input.slot_of_real) real[slot] = 1;
    for (int i = 0; i < cfg.n_max; ++i)
      if (!real[i]) {
        CHECK(tape.value(out)(i, 0) == 0.0);
        CHECK(tape.value(out)(i, 1) == 0.0);
      }
  }
  SUBCASE("deterministic forward") {
    ad::Tape t1, t2;
    const ad::Var a = model_forward(t1, input, TapeParams::load(t1, params, false), cfg);
    const ad::Var b = model_forward(t2, input, TapeParams::load(t2, params, false), cfg);
    CHECK(t1.value(a) == t2.value(b));
  }
  SUBCASE("end-to-end gradient matches finite differences") {
    const JointP p = joint_p(all_pairs_bfs(g), default_perplexity(g.num_nodes(), 128));
    const LossWeights w{1.0, 0.1, 0.0};

    auto loss_with = [&](const ModelParams& ps) {
      ad::Tape tape;
      const TapeParams tp = TapeParams::load(tape, ps, false);
      const ad::Var out = model_forward(tape, input, tp, cfg);
      const ad::Var real = tape.gather_rows(out, input.slot_of_real);
      return full_loss(tape.value(real), p, w);
    };

    ad::Tape tape;
    const TapeParams tp = TapeParams::load(tape, params, true);
    const ad::Var out = model_forward(tape, input, tp, cfg);
    const ad::Var real = tape.gather_rows(out, input.slot_of_real);
    const ad::Var loss = tape.tsnet_loss(real, p, w);
    tape.backward(loss);

    // Check a sample of parameter coordinates in the first conv kernel and
    // the head.
    const Matrix& g0 = tape.grad(tp.conv_theta[0][0]);
    constexpr double h = 1e-5;
    int checked = 0;
    for (int i = 0; i < g0.rows() && checked < 8; i += 3)
      for (int j = 0; j < g0.cols() && checked < 8; j += 2, ++checked) {
        ModelParams pp = params;
        ModelParams pm = params;
        pp.blocks[0].conv[0].theta(i, j) += h;
        pm.blocks[0].conv[0].theta(i, j) -= h;
        const double fd = (loss_with(pp) - loss_with(pm)) / (2 * h);
        const double scale = std::max({1.0, std::abs(fd), std::abs(g0(i, j))});
        CHECK(std::abs(g0(i, j) - fd) / scale < 1e-4);
      }
    const Matrix& gw = tape.grad(tp.head_w[2]);
    for (int i = 0; i < gw.rows(); i += 2)
      for (int j = 0; j < gw.cols(); ++j) {
        ModelParams pp = params;
        ModelParams pm = params;
        pp.head_w[2](i, j) += h;
        pm.head_w[2](i, j) -= h;
        const double fd = (loss_with(pp) - loss_with(pm)) / (2 * h);
        const double scale = std::max({1.0, std::abs(fd), std::abs(gw(i, j))});
        CHECK(std::abs(gw(i, j) - fd) / scale < 1e-4);
      }
  }
  SUBCASE("gradients into fictive feature rows are zero") {
    ad::Tape tape;
    const ad::Var feats_var = tape.leaf(input.features, true);
    // Rebuild the forward manually from the feature leaf.
    const TapeParams tp = TapeParams::load(tape, params, false);
    ad::Var x = feats_var;
    int conv_idx = 0;
    for (int b = 0; b < cfg.num_residual_blocks; ++b) {
      const ad::Var in = x;
      for (int c = 0; c < 3; ++c) {
        ad::Var z = graph_convolution(tape, x, input.filters, tp.conv_theta[b][c],
                                      cfg.conv_order(conv_idx++));
        z = tape.row_l2_normalize(z);
        z = tape.mask_rows(z, input.mask);
        if (c < 2) z = tape.relu(z);
        x = z;
      }
      const ad::Var shortcut =
          tp.projection[b]
              ? graph_convolution(tape, in, input.filters, *tp.projection[b], 0)
              : in;
      x = tape.mask_rows(tape.relu(tape.add(x, shortcut)), input.mask);
    }
    for (int h = 0; h < 3; ++h) {
      x = tape.add(tape.matmul(x, tp.head_w[h]), tp.head_b[h]);
      if (h < 2) x = tape.relu(x);
    }
    x = tape.mask_rows(x, input.mask);
    const ad::Var real = tape.gather_rows(x, input.slot_of_real);
    const JointP p = joint_p(all_pairs_bfs(g), 3.0);
    tape.backward(tape.tsnet_loss(real, p, {1.0, 0.1, 0.0}));
    std::vector<char> real_slot(cfg.n_max, 0);
    for (int slot : input.slot_of_real) real_slot[slot] = 1;
    for (int i = 0; i < cfg.n_max; ++i)
      if (!real_slot[i])
        for (int j = 0; j < input.features.cols(); ++j)
          CHECK(tape.grad(feats_var)(i, j) == 0.0);
  }
}

TEST_CASE("predict and checkpoints") {
  const ModelConfig cfg = tiny_config(Variant::star);
  const Graph g = generate_random_connected(6, 21);
  ModelParams params = ModelParams::init(cfg, 77);

  SUBCASE("predict deterministic") {
    CHECK(predict(g, params, 5) == predict(g, params, 5));
  }
  SUBCASE("checkpoint round trip is exact") {
    const std::string path = "/tmp/graphlay_test_ckpt.txt";
    save_checkpoint(params, path);
    const ModelParams loaded = load_checkpoint(path);
    CHECK(loaded == params);
    CHECK(predict(g, loaded, 5) == predict(g, params, 5));
    std::remove(path.c_str());
  }
  SUBCASE("version mismatch rejected") {
    CHECK_THROWS_AS(checkpoint_from_string("graphlay-checkpoint v999\nend\n"),
                    InputError);
  }
  SUBCASE("truncated checkpoint rejected") {
    const std::string text = checkpoint_to_string(params);
    CHECK_THROWS_AS(checkpoint_from_string(text.substr(0, text.size() / 2)),
                    InputError);
  }
}

TEST_CASE("training") {
  ModelConfig cfg = tiny_config();
  cfg.n_max = 12;
  std::vector<Graph> train_graphs, val_graphs;
  for (int i = 0; i < 24; ++i)
    train_graphs.push_back(generate_random_connected(4 + i % 9, 1000 + i));
  for (int i = 0; i < 6; ++i)
    val_graphs.push_back(generate_random_connected(5 + i, 2000 + i));

  TrainOptions opts;
  opts.stage1_epochs = 4;
  opts.stage2_epochs = 2;
  opts.batch_size = 8;

  SUBCASE("loss decreases and history is well formed") {
    const TrainResult r = train(cfg, train_graphs, val_graphs, 3, opts);
    CHECK(r.history.size() >= 2);
    CHECK(r.stage1_best_val_loss <= r.stage1_initial_val_loss);
    for (const HistoryRow& row : r.history) {
      CHECK(std::isfinite(row.train_loss));
      CHECK(std::isfinite(row.val_loss));
    }
  }
  SUBCASE("bit-deterministic training") {
    TrainOptions small = opts;
    small.stage1_epochs = 2;
    small.stage2_epochs = 1;
    const TrainResult a = train(cfg, train_graphs, val_graphs, 9, small);
    const TrainResult b = train(cfg, train_graphs, val_graphs, 9, small);
    CHECK(a.params == b.params);
    REQUIRE(a.history.size() == b.history.size());
    for (size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].train_loss == b.history[i].train_loss);
      CHECK(a.history[i].val_loss == b.history[i].val_loss);
    }
  }
  SUBCASE("batch loss equals the mean of per-graph losses") {
    // One batch of 4 graphs: record the tape loss and compare to the mean
    // of independent per-graph losses under identical permutation seeds.
    ModelParams params = ModelParams::init(cfg, 5);
    const LossWeights w{1.0, 1.2, 0.0};
    ad::Tape tape;
    const TapeParams tp = TapeParams::load(tape, params, true);
    std::vector<PaddedInput> padded;
    std::vector<double> independent;
    std::vector<ad::Var> losses;
    for (int i = 0; i < 4; ++i) {
      const Graph& g = train_graphs[i];
      const JointP p = joint_p(all_pairs_bfs(g), default_perplexity(g.num_nodes(), 128));
      const Matrix feats =
          build_features(g, cfg.variant, 11 + i, FeatureScaling::theoretical(cfg));
      padded.push_back(pad_and_permute(g, feats, cfg, 50 + i));
      const PaddedInput& pin = padded.back();
      const ad::Var out = model_forward(tape, pin, tp, cfg);
      const ad::Var real = tape.gather_rows(out, pin.slot_of_real);
      losses.push_back(tape.tsnet_loss(real, p, w));

      ad::Tape solo;
      const TapeParams stp = TapeParams::load(solo, params, false);
      const ad::Var sout = model_forward(solo, pin, stp, cfg);
      const ad::Var sreal = solo.gather_rows(sout, pin.slot_of_real);
      independent.push_back(full_loss(solo.value(sreal), p, w));
    }
    ad::Var batch = losses[0];
    for (int i = 1; i < 4; ++i) batch = tape.add(batch, losses[i]);
    batch = tape.scale(batch, 0.25);
    double mean = 0.0;
    for (double v : independent) mean += v;
    mean /= 4.0;
    CHECK(tape.value(batch)(0, 0) == doctest::Approx(mean).epsilon(1e-9));
    // The per-graph tape values are bit-identical to full_loss.
    for (int i = 0; i < 4; ++i) CHECK(tape.value(losses[i])(0, 0) == independent[i]);
  }
}
