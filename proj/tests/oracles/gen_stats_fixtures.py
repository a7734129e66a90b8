#!/usr/bin/env python3
"""Generates tests/fixtures/stats_fixtures.hpp.

Reference values for the Kruskal-Wallis and Conover-Iman tests plus
chi-square / Student-t tail probabilities, computed with scipy. The C++
statistics code is validated against these frozen values; regenerate only
if the fixture cases change.
"""
import numpy as np
from scipy import stats

CASES = [
    ("two_groups_no_ties", [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]),
    ("three_groups_ties", [
        [2.1, 2.1, 3.5, 4.2],
        [1.0, 2.1, 5.5],
        [3.5, 3.5, 6.0, 7.1, 2.1],
    ]),
    ("instructor_scores", [
        [83.0, 91.0, 94.0, 89.0, 89.0, 96.0, 91.0, 92.0, 90.0],
        [91.0, 90.0, 81.0, 83.0, 84.0, 83.0, 88.0, 91.0, 89.0, 84.0],
        [101.0, 100.0, 91.0, 93.0, 96.0, 95.0, 94.0, 81.0, 78.0],
    ]),
    ("four_groups_mixed", [
        [12.0, 15.0, 11.0, 14.0, 13.0],
        [15.0, 18.0, 16.0, 17.0],
        [10.0, 10.0, 12.0, 11.0, 9.0, 13.0],
        [19.0, 21.0, 18.0, 17.0, 20.0],
    ]),
]


def kruskal_wallis(groups):
    pooled = np.concatenate(groups)
    n = len(pooled)
    ranks = stats.rankdata(pooled)  # mid-ranks
    h_stat, p_scipy = stats.kruskal(*groups)
    # Recompute H by the direct formula as a sanity check on scipy.
    idx = 0
    h = 0.0
    for g in groups:
        r = ranks[idx:idx + len(g)]
        idx += len(g)
        h += len(g) * (r.mean() - (n + 1) / 2.0) ** 2
    h *= 12.0 / (n * (n + 1))
    _, counts = np.unique(pooled, return_counts=True)
    tie = 1.0 - (counts ** 3 - counts).sum() / float(n ** 3 - n)
    h /= tie
    assert abs(h - h_stat) < 1e-10, (h, h_stat)
    return h_stat, p_scipy, ranks


def conover(groups):
    """Conover-Iman pairwise t statistics and two-sided p-values.

    T = (Rbar_a - Rbar_b) / sqrt(S^2 * ((n-1-H)/(n-k)) * (1/n_a + 1/n_b))
    with S^2 = (sum R_i^2 - n (n+1)^2 / 4) / (n - 1), H tie-corrected.
    """
    h, _, ranks = kruskal_wallis(groups)
    n = len(ranks)
    k = len(groups)
    s2 = (np.sum(ranks ** 2) - n * (n + 1) ** 2 / 4.0) / (n - 1.0)
    means, sizes = [], []
    idx = 0
    for g in groups:
        r = ranks[idx:idx + len(g)]
        idx += len(g)
        means.append(r.mean())
        sizes.append(len(g))
    tmat = np.zeros((k, k))
    pmat = np.ones((k, k))
    for a in range(k):
        for b in range(k):
            if a == b:
                continue
            denom = np.sqrt(s2 * ((n - 1.0 - h) / (n - k)) *
                            (1.0 / sizes[a] + 1.0 / sizes[b]))
            t = (means[a] - means[b]) / denom
            tmat[a, b] = t
            pmat[a, b] = 2.0 * stats.t.sf(abs(t), n - k)
    return tmat, pmat


def fmt(x):
    return repr(float(x))


def main():
    lines = []
    lines.append("// Generated by tests/oracles/gen_stats_fixtures.py -- do not edit.")
    lines.append("#pragma once")
    lines.append("#include <vector>")
    lines.append("")
    lines.append("namespace stats_fixtures {")
    lines.append("")
    lines.append("struct KwCase {")
    lines.append("  const char* name;")
    lines.append("  std::vector<std::vector<double>> groups;")
    lines.append("  double h;")
    lines.append("  double p;")
    lines.append("  std::vector<std::vector<double>> conover_t;  // row-major k x k")
    lines.append("  std::vector<std::vector<double>> conover_p;")
    lines.append("};")
    lines.append("")
    lines.append("inline const std::vector<KwCase>& cases() {")
    lines.append("  static const std::vector<KwCase> c = {")
    for name, groups in CASES:
        h, p, _ = kruskal_wallis(groups)
        tmat, pmat = conover(groups)
        g_str = ", ".join(
            "{" + ", ".join(fmt(v) for v in g) + "}" for g in groups)
        t_str = ", ".join(
            "{" + ", ".join(fmt(v) for v in row) + "}" for row in tmat)
        p_str = ", ".join(
            "{" + ", ".join(fmt(v) for v in row) + "}" for row in pmat)
        lines.append("    {\"%s\"," % name)
        lines.append("     {%s}," % g_str)
        lines.append("     %s, %s," % (fmt(h), fmt(p)))
        lines.append("     {%s}," % t_str)
        lines.append("     {%s}}," % p_str)
    lines.append("  };")
    lines.append("  return c;")
    lines.append("}")
    lines.append("")

    # Tail-probability fixtures for the in-repo special functions.
    chi2_pts = [(0.5, 1), (1.0, 1), (3.857142857142857, 1), (2.0, 2),
                (5.0, 2), (0.1, 3), (7.81, 3), (13.5, 5), (25.0, 10),
                (1e-8, 1), (80.0, 4)]
    t_pts = [(0.5, 4), (1.0, 4), (2.0, 4), (2.776445105, 4), (0.1, 1),
             (3.0, 1), (1.5, 9), (4.0, 9), (2.0, 25), (6.5, 2),
             (0.0, 7), (12.0, 30)]
    lines.append("struct TailPoint { double x; double df; double sf; };")
    lines.append("")
    lines.append("inline const std::vector<TailPoint>& chi2_sf_points() {")
    lines.append("  static const std::vector<TailPoint> p = {")
    for x, k in chi2_pts:
        lines.append("    {%s, %s, %s}," % (fmt(x), fmt(k),
                                            fmt(stats.chi2.sf(x, k))))
    lines.append("  };")
    lines.append("  return p;")
    lines.append("}")
    lines.append("")
    lines.append("// sf here is the two-sided tail: 2 * P(T > |x|).")
    lines.append("inline const std::vector<TailPoint>& t_two_sided_points() {")
    lines.append("  static const std::vector<TailPoint> p = {")
    for x, v in t_pts:
        lines.append("    {%s, %s, %s}," % (fmt(x), fmt(v),
                                            fmt(2.0 * stats.t.sf(abs(x), v))))
    lines.append("  };")
    lines.append("  return p;")
    lines.append("}")
    lines.append("")
    lines.append("}  // namespace stats_fixtures")
    out = "\n".join(lines) + "\n"
    import os
    here = os.path.dirname(os.path.abspath(__file__))
    dest = os.path.join(here, "..", "fixtures", "stats_fixtures.hpp")
    os.makedirs(os.path.dirname(dest), exist_ok=True)
    with open(dest, "w") as f:
        f.write(out)
    print("wrote", os.path.normpath(dest))


if __name__ == "__main__":
    main()
