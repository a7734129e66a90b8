#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures/stats_fixtures.hpp"
#include "graphlay/core.hpp"
#include "graphlay/stats.hpp"

using namespace graphlay;

TEST_CASE("tail probability fixtures") {
  for (const auto& pt : stats_fixtures::chi2_sf_points()) {
    CAPTURE(pt.x);
    CAPTURE(pt.df);
    CHECK(std::abs(chi2_sf(pt.x, pt.df) - pt.sf) < 1e-10);
  }
  for (const auto& pt : stats_fixtures::t_two_sided_points()) {
    CAPTURE(pt.x);
    CAPTURE(pt.df);
    CHECK(std::abs(student_t_sf_two_sided(pt.x, pt.df) - pt.sf) < 1e-10);
  }
}

TEST_CASE("kruskal-wallis") {
  SUBCASE("hand ranks: (1,2,3) vs (4,5,6)") {
    const KruskalWallisResult r = kruskal_wallis({{1, 2, 3}, {4, 5, 6}});
    CHECK(r.h == doctest::Approx(3.857142857142857).epsilon(1e-12));
  }
  SUBCASE("identical groups give H=0, p=1") {
    const KruskalWallisResult r = kruskal_wallis({{2, 2, 2}, {2, 2}, {2}});
    CHECK(r.h == 0.0);
    CHECK(r.p == 1.0);
  }
  SUBCASE("oracle fixtures") {
    for (const auto& c : stats_fixtures::cases()) {
      CAPTURE(c.name);
      const KruskalWallisResult r = kruskal_wallis(c.groups);
      CHECK(std::abs(r.h - c.h) < 1e-6);
      CHECK(std::abs(r.p - c.p) < 1e-6);
    }
  }
  SUBCASE("invariant under strictly monotone transforms") {
    const std::vector<std::vector<double>> groups = {
        {0.3, 1.7, 2.9, 0.1}, {2.2, 3.8, 0.9}, {4.4, 1.1, 3.3, 2.6, 0.5}};
    const KruskalWallisResult base = kruskal_wallis(groups);
    auto transformed = groups;
    for (auto& g : transformed)
      for (double& v : g) v = std::exp(3.0 * v + 1.0);
    const KruskalWallisResult t = kruskal_wallis(transformed);
    CHECK(t.h == doctest::Approx(base.h).epsilon(1e-12));
    CHECK(t.p == doctest::Approx(base.p).epsilon(1e-12));
  }
  SUBCASE("argument validation") {
    CHECK_THROWS(kruskal_wallis({{1.0, 2.0}}));
    CHECK_THROWS(kruskal_wallis({{1.0}, {}}));
  }
}

TEST_CASE("conover posthoc") {
  SUBCASE("oracle fixtures") {
    for (const auto& c : stats_fixtures::cases()) {
      CAPTURE(c.name);
      const ConoverResult r = conover_posthoc(c.groups);
      const int k = static_cast<int>(c.groups.size());
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
          if (a == b) continue;
          CHECK(std::abs(r.t(a, b) - c.conover_t[a][b]) < 1e-6);
          CHECK(std::abs(r.p(a, b) - c.conover_p[a][b]) < 1e-6);
        }
    }
  }
  SUBCASE("identical groups give all p = 1") {
    const ConoverResult r = conover_posthoc({{3, 3, 3}, {3, 3}});
    CHECK(r.p(0, 1) == 1.0);
  }
  SUBCASE("matrix symmetric with unit diagonal") {
    const ConoverResult r =
        conover_posthoc({{1, 5, 2}, {8, 9, 7}, {4, 3, 6}});
    for (int a = 0; a < 3; ++a) {
      CHECK(r.p(a, a) == 1.0);
      for (int b = 0; b < 3; ++b) CHECK(r.p(a, b) == r.p(b, a));
    }
  }
  SUBCASE("p decreases as separation grows") {
    // Shifted-uniform groups; larger shift, smaller pairwise p.
    double prev_p = 1.0;
    for (const double shift : {0.5, 2.0, 8.0}) {
      std::vector<double> a, b;
      Rng rng(7);
      for (int i = 0; i < 12; ++i) {
        a.push_back(rng.uniform());
        b.push_back(rng.uniform() + shift);
      }
      const ConoverResult r = conover_posthoc({a, b});
      CHECK(r.p(0, 1) <= prev_p + 1e-15);
      prev_p = r.p(0, 1);
    }
  }
}
