#include "graphlay/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphlay {

namespace {

// Lanczos log-gamma (g=7, n=9), |error| < 1e-13 on the positive axis.
double log_gamma(double x) {
  static const double coeff[9] = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection formula.
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = coeff[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coeff[i] / (x + i);
  return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Series expansion for P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

// Lentz continued fraction for the incomplete beta.
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p domain error");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain error");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double beta_inc(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("beta_inc domain error");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(df / 2.0, x / 2.0);
}

double student_t_sf_two_sided(double t, double df) {
  if (df <= 0.0) throw std::invalid_argument("t distribution needs df > 0");
  if (t == 0.0) return 1.0;
  const double x = df / (df + t * t);
  return beta_inc(df / 2.0, 0.5, x);
}

namespace {

struct RankedGroups {
  std::vector<std::vector<double>> ranks;  // per-group mid-ranks
  double tie_sum = 0.0;                    // sum of (t^3 - t) over tie groups
  int n = 0;
};

RankedGroups rank_groups(const std::vector<std::vector<double>>& groups) {
  RankedGroups out;
  struct Tagged {
    double value;
    int group;
    int pos;
  };
  std::vector<Tagged> pooled;
  for (size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw std::invalid_argument("empty sample group");
    for (size_t i = 0; i < groups[g].size(); ++i)
      pooled.push_back({groups[g][i], static_cast<int>(g), static_cast<int>(i)});
  }
  out.n = static_cast<int>(pooled.size());
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Tagged& a, const Tagged& b) { return a.value < b.value; });
  out.ranks.resize(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) out.ranks[g].resize(groups[g].size());
  size_t i = 0;
  while (i < pooled.size()) {
    size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    const double t = static_cast<double>(j - i);
    if (t > 1.0) out.tie_sum += t * t * t - t;
    for (size_t k = i; k < j; ++k)
      out.ranks[pooled[k].group][pooled[k].pos] = mid;
    i = j;
  }
  return out;
}

}  // namespace

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw std::invalid_argument("need at least two groups");
  const RankedGroups rg = rank_groups(groups);
  const double n = static_cast<double>(rg.n);
  const double tie_divisor = 1.0 - rg.tie_sum / (n * n * n - n);

  KruskalWallisResult res;
  if (tie_divisor <= 0.0) return res;  // every value identical: H = 0, p = 1

  double h = 0.0;
  for (size_t g = 0; g < groups.size(); ++g) {
    double mean = 0.0;
    for (double r : rg.ranks[g]) mean += r;
    mean /= static_cast<double>(rg.ranks[g].size());
    const double dev = mean - (n + 1.0) / 2.0;
    h += static_cast<double>(rg.ranks[g].size()) * dev * dev;
  }
  h *= 12.0 / (n * (n + 1.0));
  h /= tie_divisor;
  res.h = h;
  res.p = chi2_sf(h, static_cast<double>(groups.size() - 1));
  return res;
}

ConoverResult conover_posthoc(const std::vector<std::vector<double>>& groups) {
  const int k = static_cast<int>(groups.size());
  if (k < 2) throw std::invalid_argument("need at least two groups");
  const RankedGroups rg = rank_groups(groups);
  const double n = static_cast<double>(rg.n);
  const KruskalWallisResult kw = kruskal_wallis(groups);

  ConoverResult res;
  res.t = Matrix(k, k);
  res.p = Matrix(k, k, 1.0);

  // Tie-corrected rank variance S^2 = (sum R^2 - n (n+1)^2 / 4) / (n - 1).
  double sum_r2 = 0.0;
  std::vector<double> mean(k), size(k);
  for (int g = 0; g < k; ++g) {
    double m = 0.0;
    for (double r : rg.ranks[g]) {
      sum_r2 += r * r;
      m += r;
    }
    size[g] = static_cast<double>(rg.ranks[g].size());
    mean[g] = m / size[g];
  }
  const double s2 = (sum_r2 - n * (n + 1.0) * (n + 1.0) / 4.0) / (n - 1.0);
  const double df = n - k;
  const double factor = df > 0.0 ? (n - 1.0 - kw.h) / df : 0.0;
  if (s2 <= 0.0 || df <= 0.0 || factor <= 0.0) return res;  // degenerate: all p = 1

  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      const double denom = std::sqrt(s2 * factor * (1.0 / size[a] + 1.0 / size[b]));
      const double t = (mean[a] - mean[b]) / denom;
      res.t(a, b) = t;
      res.t(b, a) = -t;
      const double p = student_t_sf_two_sided(t, df);
      res.p(a, b) = p;
      res.p(b, a) = p;
    }
  return res;
}

}  // namespace graphlay
