#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "graphlay/bench.hpp"
#include "graphlay/graph.hpp"
#include "graphlay/sparse.hpp"

using namespace graphlay;

namespace {

Graph p2() { return parse_edge_list_text("0 1\n"); }
Graph k3() { return parse_edge_list_text("0 1\n1 2\n0 2\n"); }

// Dense Chebyshev recurrence, the oracle for the sparse implementation.
std::vector<Matrix> dense_chebyshev(const Matrix& lt, int order) {
  const int n = lt.rows();
  std::vector<Matrix> t;
  Matrix eye(n, n);
  for (int i = 0; i < n; ++i) eye(i, i) = 1.0;
  t.push_back(eye);
  if (order >= 1) t.push_back(lt);
  for (int k = 2; k <= order; ++k) {
    Matrix next(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int m = 0; m < n; ++m) acc += lt(i, m) * t[k - 1](m, j);
        next(i, j) = 2.0 * acc - t[k - 2](i, j);
      }
    t.push_back(std::move(next));
  }
  return t;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

// Spectral radius estimate for symmetric matrices: power iteration on M^2
// avoids sign oscillation between extreme eigenvalues.
double spectral_radius(const SparseMatrix& m) {
  const int n = m.n();
  std::vector<double> v(n), w(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(1.0 + i);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  for (double& x : v) x /= std::sqrt(norm);
  double lambda2 = 0.0;
  for (int it = 0; it < 500; ++it) {
    m.multiply(v.data(), w.data());
    m.multiply(w.data(), v.data());  // v <- M^2 v
    double nn = 0.0;
    for (double x : v) nn += x * x;
    nn = std::sqrt(nn);
    if (nn == 0.0) return 0.0;
    for (double& x : v) x /= nn;
    lambda2 = nn;
  }
  return std::sqrt(lambda2);
}

}  // namespace

TEST_CASE("normalized laplacian") {
  SUBCASE("P2 by hand") {
    const SparseMatrix l = normalized_laplacian(p2());
    const Matrix d = l.to_dense();
    CHECK(d(0, 0) == doctest::Approx(1.0));
    CHECK(d(1, 1) == doctest::Approx(1.0));
    CHECK(d(0, 1) == doctest::Approx(-1.0));
    CHECK(d(1, 0) == doctest::Approx(-1.0));
  }
  SUBCASE("K3 by hand") {
    const Matrix d = normalized_laplacian(k3()).to_dense();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(d(i, j) == doctest::Approx(i == j ? 1.0 : -0.5));
  }
  SUBCASE("eigenvalues within [0, 2]") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Graph g = generate_random_connected(10 + 3 * static_cast<int>(seed), seed);
      const double lam = lambda_max(normalized_laplacian(g)).value;
      CHECK(lam >= 0.0);
      CHECK(lam <= 2.0);
    }
  }
}

TEST_CASE("lambda max") {
  CHECK(lambda_max(normalized_laplacian(p2())).value == doctest::Approx(2.0));
  CHECK(lambda_max(normalized_laplacian(k3())).value == doctest::Approx(1.5));

  SUBCASE("scaled identity") {
    std::vector<SparseMatrix::Entry> e;
    for (int i = 0; i < 5; ++i) e.push_back({i, i, 1.7});
    CHECK(lambda_max(SparseMatrix::from_entries(5, e)).value == doctest::Approx(1.7));
  }
  SUBCASE("within [1,2] for connected graphs, 2 iff bipartite") {
    // Even cycle (bipartite) vs triangle.
    const Graph c4 = parse_edge_list_text("0 1\n1 2\n2 3\n3 0\n");
    CHECK(lambda_max(normalized_laplacian(c4)).value == doctest::Approx(2.0));
    CHECK(lambda_max(normalized_laplacian(k3())).value < 2.0 - 1e-6);
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
      const Graph g = generate_random_connected(12, seed);
      const double lam = lambda_max(normalized_laplacian(g)).value;
      CHECK(lam >= 1.0 - 1e-9);
      CHECK(lam <= 2.0);
    }
  }
}

TEST_CASE("rescaled laplacian") {
  SUBCASE("P2 at lam 2") {
    const Matrix d = rescaled_laplacian(normalized_laplacian(p2()), 2.0).to_dense();
    CHECK(d(0, 0) == doctest::Approx(0.0));
    CHECK(d(0, 1) == doctest::Approx(-1.0));
  }
  SUBCASE("identity maps to zero") {
    const Matrix d = rescaled_laplacian(SparseMatrix::identity(4), 2.0).to_dense();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(d(i, j) == 0.0);
  }
  SUBCASE("invalid lambda") {
    CHECK_THROWS(rescaled_laplacian(SparseMatrix::identity(2), 0.0));
    CHECK_THROWS(rescaled_laplacian(SparseMatrix::identity(2), -1.0));
  }
  SUBCASE("spectral radius at most 1 on random graphs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Graph g = generate_random_connected(8 + static_cast<int>(seed % 5) * 3, seed);
      const SparseMatrix l = normalized_laplacian(g);
      const SparseMatrix lt = rescaled_laplacian(l, lambda_max(l).value);
      CHECK(spectral_radius(lt) <= 1.0 + 1e-6);
    }
  }
}

TEST_CASE("chebyshev filters") {
  SUBCASE("order zero is the identity") {
    const ChebyshevFilters f =
        chebyshev_filters(rescaled_laplacian(normalized_laplacian(k3()), 1.5), 0);
    REQUIRE(f.filters.size() == 1);
    const Matrix d = f.filters[0].to_dense();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(d(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  }
  SUBCASE("P2: T2 of the rescaled laplacian is the identity") {
    const SparseMatrix lt = rescaled_laplacian(normalized_laplacian(p2()), 2.0);
    const ChebyshevFilters f = chebyshev_filters(lt, 2);
    const Matrix t2 = f.filters[2].to_dense();
    CHECK(t2(0, 0) == doctest::Approx(1.0));
    CHECK(t2(0, 1) == doctest::Approx(0.0));
    CHECK(t2(1, 1) == doctest::Approx(1.0));
  }
  SUBCASE("matches dense recurrence oracle on random 8-node graphs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Graph g = generate_random_connected(8, seed);
      const SparseMatrix l = normalized_laplacian(g);
      const SparseMatrix lt = rescaled_laplacian(l, lambda_max(l).value);
      const ChebyshevFilters f = chebyshev_filters(lt, 5);
      const std::vector<Matrix> oracle = dense_chebyshev(lt.to_dense(), 5);
      for (int k = 0; k <= 5; ++k)
        CHECK(max_abs_diff(f.filters[k].to_dense(), oracle[k]) < 1e-9);
    }
  }
  SUBCASE("recurrence invariant holds entrywise") {
    const Graph g = generate_random_connected(15, 3);
    const SparseMatrix l = normalized_laplacian(g);
    const SparseMatrix lt = rescaled_laplacian(l, lambda_max(l).value);
    const ChebyshevFilters f = chebyshev_filters(lt, 4);
    for (int k = 2; k <= 4; ++k) {
      const Matrix lhs = f.filters[k].to_dense();
      Matrix rhs = lt.multiply(f.filters[k - 1], 0.0).to_dense();
      const Matrix prev = f.filters[k - 2].to_dense();
      for (int i = 0; i < rhs.rows(); ++i)
        for (int j = 0; j < rhs.cols(); ++j)
          CHECK(std::abs(2.0 * rhs(i, j) - prev(i, j) - lhs(i, j)) < 1e-9);
    }
  }
  SUBCASE("permutation similarity") {
    const Graph g = generate_random_connected(9, 11);
    Rng rng(17);
    const std::vector<int> perm = rng.permutation(g.num_nodes());
    std::vector<std::pair<int, int>> relabeled;
    for (auto [u, v] : g.edges()) relabeled.emplace_back(perm[u], perm[v]);
    const Graph h = Graph::from_edges(g.num_nodes(), relabeled);

    const SparseMatrix lg = normalized_laplacian(g);
    const SparseMatrix lh = normalized_laplacian(h);
    // Use the same lambda on both sides; the matrices are similar so the
    // true value is identical and the comparison stays exact.
    const double lam = lambda_max(lg).value;
    const ChebyshevFilters fg = chebyshev_filters(rescaled_laplacian(lg, lam), 3);
    const ChebyshevFilters fh = chebyshev_filters(rescaled_laplacian(lh, lam), 3);
    for (int k = 0; k <= 3; ++k) {
      const Matrix permuted = permute_sparse(fg.filters[k], perm, g.num_nodes()).to_dense();
      CHECK(max_abs_diff(permuted, fh.filters[k].to_dense()) < 1e-9);
    }
  }
}

TEST_CASE("apply filter") {
  const Graph g = generate_random_connected(10, 21);
  const SparseMatrix l = normalized_laplacian(g);
  Rng rng(4);
  Matrix x(10, 3);
  for (size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform() - 0.5;

  SUBCASE("identity filter is a no-op") {
    const Matrix y = apply_filter(SparseMatrix::identity(10), x);
    CHECK(max_abs_diff(y, x) == 0.0);
  }
  SUBCASE("zero filter gives zero") {
    const Matrix y = apply_filter(SparseMatrix::from_entries(10, {}), x);
    for (size_t i = 0; i < y.size(); ++i) CHECK(y.data()[i] == 0.0);
  }
  SUBCASE("matches dense oracle and serial path bitwise") {
    const Matrix ld = l.to_dense();
    Matrix want(10, 3);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int m = 0; m < 10; ++m) acc += ld(i, m) * x(m, j);
        want(i, j) = acc;
      }
    const Matrix got = apply_filter(l, x);
    CHECK(max_abs_diff(got, want) < 1e-10);
    const Matrix ser = serial::apply_filter(l, x);
    CHECK(got == ser);
  }
  SUBCASE("shape mismatch throws") {
    CHECK_THROWS(apply_filter(SparseMatrix::identity(4), x));
  }
}
