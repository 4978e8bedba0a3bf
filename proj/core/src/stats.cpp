#include "rltest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "rltest/metrics.hpp"

namespace rltest {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Standard normal density and CDF.
double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }
double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to machine precision for all practical arguments
}

// 32-point Gauss-Legendre rule on [-1, 1]; nodes are symmetric, positive
// half stored.
struct GlPoint {
  double x, w;
};
constexpr GlPoint kGl32[16] = {
    {0.04830766568773831, 0.096540088514727812},
    {0.14447196158279649, 0.095638720079274833},
    {0.23928736225213706, 0.093844399080804566},
    {0.33186860228212767, 0.091173878695763863},
    {0.42135127613063533, 0.087652093004403908},
    {0.50689990893222936, 0.083311924226946846},
    {0.5877157572407623, 0.078193895787070311},
    {0.66304426693021523, 0.072345794108848449},
    {0.73218211874028971, 0.065822222776361752},
    {0.79448379596794239, 0.058684093478535704},
    {0.84936761373256997, 0.050998059262376244},
    {0.8963211557660522, 0.042835898022226426},
    {0.93490607593773967, 0.034273862913021626},
    {0.96476225558750639, 0.025392065309262427},
    {0.98561151154526838, 0.016274394730905965},
    {0.99726386184948157, 0.0070186100094692984},
};

double gl32(const std::function<double(double)>& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  double sum = 0.0;
  for (const auto& p : kGl32) sum += p.w * (f(c - h * p.x) + f(c + h * p.x));
  return sum * h;
}

// Adaptive splitting: bisect until the refined estimate stabilizes.
double adaptive_gl32(const std::function<double(double)>& f, double lo, double hi, double tol,
                     int depth = 0) {
  const double whole = gl32(f, lo, hi);
  const double mid = 0.5 * (lo + hi);
  const double split = gl32(f, lo, mid) + gl32(f, mid, hi);
  if (std::fabs(whole - split) <= tol || depth >= 12) return split;
  return adaptive_gl32(f, lo, mid, 0.5 * tol, depth + 1) +
         adaptive_gl32(f, mid, hi, 0.5 * tol, depth + 1);
}

// P(range of k standard normals <= w).
double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  const auto integrand = [w, k](double u) {
    const double inner = Phi(u) - Phi(u - w);
    return phi(u) * std::pow(inner, k - 1);
  };
  return k * adaptive_gl32(integrand, -8.0, 8.0, 1e-8);
}

double group_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double group_variance(const std::vector<double>& v) {
  const double m = group_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

void check_groups(const std::vector<GroupSample>& groups) {
  if (groups.size() < 2)
    throw std::invalid_argument("at least two groups are required");
  for (const auto& g : groups) {
    if (g.values.size() < 2 || group_variance(g.values) <= 0.0)
      throw std::invalid_argument("degenerate group");
  }
}

}  // namespace

double GroupSample::mean() const { return group_mean(values); }
double GroupSample::variance() const { return group_variance(values); }

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0)
    throw std::invalid_argument("incomplete beta requires positive shape parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_dist_sf(double f, double df1, double df2) {
  if (df1 <= 0.0 || df2 <= 0.0)
    throw std::invalid_argument("F distribution requires positive degrees of freedom");
  if (f <= 0.0) return 1.0;
  return regularized_incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

double t_dist_sf(double t, double df) {
  if (df <= 0.0)
    throw std::invalid_argument("t distribution requires positive degrees of freedom");
  if (t < 0.0) return 1.0 - t_dist_sf(-t, df);
  if (t == 0.0) return 0.5;
  return 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double studentized_range_sf(double q, int k, double df) {
  if (k < 2) throw std::invalid_argument("studentized range requires k >= 2");
  if (df <= 0.0)
    throw std::invalid_argument("studentized range requires positive degrees of freedom");
  if (q <= 0.0) return 1.0;
  // For very large df the scale factor concentrates at 1 and the outer
  // integral collapses onto the normal-range distribution.
  if (df >= 1e6) return 1.0 - normal_range_cdf(q, k);

  // Outer integration over s, the distribution of sqrt(chi^2_df / df).
  const double ln_norm = (1.0 - 0.5 * df) * std::log(2.0) + 0.5 * df * std::log(df) -
                         std::lgamma(0.5 * df);
  const auto outer = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double ln_g = ln_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(ln_g) * normal_range_cdf(q * s, k);
  };
  const double spread = 10.0 / std::sqrt(2.0 * df);
  const double lo = std::max(0.0, 1.0 - spread);
  const double hi = 1.0 + std::max(spread, 8.0 / std::sqrt(df));
  const double cdf = adaptive_gl32(outer, lo, hi, 1e-6);
  return std::clamp(1.0 - cdf, 0.0, 1.0);
}

double studentized_range_critical(double alpha, int k, double df) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("alpha must lie in (0, 1)");
  double lo = 0.0, hi = 2.0;
  while (studentized_range_sf(hi, k, df) > alpha && hi < 1e4) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (studentized_range_sf(mid, k, df) > alpha)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

WelchAnovaResult welch_anova(const std::vector<GroupSample>& groups) {
  check_groups(groups);
  const int k = static_cast<int>(groups.size());
  double w_sum = 0.0, weighted_mean = 0.0;
  std::vector<double> w(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double n = static_cast<double>(groups[i].values.size());
    w[i] = n / groups[i].variance();
    w_sum += w[i];
    weighted_mean += w[i] * groups[i].mean();
  }
  weighted_mean /= w_sum;

  double between = 0.0;
  double lambda = 0.0;  // sum of (1 - w_i / W)^2 / (n_i - 1)
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double n = static_cast<double>(groups[i].values.size());
    const double d = groups[i].mean() - weighted_mean;
    between += w[i] * d * d;
    const double frac = 1.0 - w[i] / w_sum;
    lambda += frac * frac / (n - 1.0);
  }
  WelchAnovaResult r;
  r.df1 = k - 1.0;
  r.df2 = (static_cast<double>(k) * k - 1.0) / (3.0 * lambda);
  r.f_stat = (between / (k - 1.0)) /
             (1.0 + 2.0 * (k - 2.0) / (static_cast<double>(k) * k - 1.0) * lambda);
  r.p_value = f_dist_sf(r.f_stat, r.df1, r.df2);
  return r;
}

std::vector<PairwiseComparison> games_howell(const std::vector<GroupSample>& groups) {
  check_groups(groups);
  const int k = static_cast<int>(groups.size());
  std::vector<PairwiseComparison> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double ni = static_cast<double>(groups[i].values.size());
      const double nj = static_cast<double>(groups[j].values.size());
      const double vi = groups[i].variance() / ni;
      const double vj = groups[j].variance() / nj;
      PairwiseComparison c;
      c.a = groups[i].name;
      c.b = groups[j].name;
      c.mean_a = groups[i].mean();
      c.mean_b = groups[j].mean();
      c.t_stat = (c.mean_a - c.mean_b) / std::sqrt(vi + vj);
      c.df = (vi + vj) * (vi + vj) /
             (vi * vi / (ni - 1.0) + vj * vj / (nj - 1.0));
      c.p_value = studentized_range_sf(std::fabs(c.t_stat) * std::sqrt(2.0), k, c.df);
      out.push_back(std::move(c));
    }
  }
  return out;
}

StatReport compare_groups(const std::vector<GroupSample>& groups) {
  StatReport report;
  report.anova = welch_anova(groups);
  report.pairwise = games_howell(groups);
  for (const auto& g : groups) {
    report.group_names.push_back(g.name);
    report.group_sizes.push_back(g.values.size());
    report.group_means.push_back(g.mean());
    report.group_stddevs.push_back(std::sqrt(g.variance()));
  }
  report.cle_matrix.assign(groups.size(), std::vector<double>(groups.size(), 0.5));
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (i != j) report.cle_matrix[i][j] = cle(groups[i].values, groups[j].values);
    }
  }
  return report;
}

}  // namespace rltest
