#pragma once

#include <string>
#include <vector>

#include "graphlay/core.hpp"

namespace graphlay {

/// Upper-tail probability of the chi-square distribution (regularized
/// incomplete gamma, series/continued-fraction evaluation).
double chi2_sf(double x, double df);

/// Two-sided Student-t tail probability 2 P(T > |t|) via the regularized
/// incomplete beta function.
double student_t_sf_two_sided(double t, double df);

/// Regularized incomplete gamma P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

struct KruskalWallisResult {
  double h = 0.0;
  double p = 1.0;
};

/// Kruskal-Wallis omnibus test with mid-ranks and tie correction;
/// p from the chi-square approximation with k-1 degrees of freedom.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct ConoverResult {
  Matrix t;  // pairwise statistics, zero diagonal
  Matrix p;  // two-sided p-values, unit diagonal
};

/// Conover-Iman post-hoc pairwise comparisons (raw p-values, no
/// multiplicity correction).
ConoverResult conover_posthoc(const std::vector<std::vector<double>>& groups);

struct StatResult {
  std::string metric;
  std::vector<std::string> group_names;
  double h = 0.0;
  double p_omnibus = 1.0;
  Matrix pairwise_p;
  double alpha = 0.05;
};

}  // namespace graphlay
