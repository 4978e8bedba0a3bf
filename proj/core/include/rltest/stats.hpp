#pragma once

#include <string>
#include <vector>

namespace rltest {

// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
// Continued-fraction evaluation, absolute error <= 1e-10.
double regularized_incomplete_beta(double a, double b, double x);

// Survival function of the F distribution: P(F > f).
double f_dist_sf(double f, double df1, double df2);

// One-sided survival function of Student's t distribution: P(T > t).
double t_dist_sf(double t, double df);

// Survival function of the studentized range statistic with k groups and
// df error degrees of freedom: P(Q >= q). Evaluated by nested Gauss-Legendre
// quadrature with adaptive interval splitting, absolute error <= 1e-4.
double studentized_range_sf(double q, int k, double df);

// Smallest q with studentized_range_sf(q, k, df) <= alpha (critical value).
double studentized_range_critical(double alpha, int k, double df);

struct GroupSample {
  std::string name;
  std::vector<double> values;

  double mean() const;
  double variance() const;  // sample variance (n - 1 denominator)
};

struct WelchAnovaResult {
  double f_stat = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
};

// Welch's heteroscedastic one-way ANOVA. Requires >= 2 groups, every group
// with >= 2 observations and non-zero variance; otherwise throws
// std::invalid_argument("degenerate group").
WelchAnovaResult welch_anova(const std::vector<GroupSample>& groups);

struct PairwiseComparison {
  std::string a, b;
  double mean_a = 0.0, mean_b = 0.0;
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Games-Howell post-hoc pairwise comparisons (unequal variances), one entry
// per unordered group pair in input order. Same preconditions as
// welch_anova.
std::vector<PairwiseComparison> games_howell(const std::vector<GroupSample>& groups);

// Full statistical comparison: omnibus Welch ANOVA, Games-Howell pairwise
// p-values, and the common-language effect size matrix (entry [i][j] =
// P(draw from group i > draw from group j), ties counted half).
struct StatReport {
  std::vector<std::string> group_names;
  std::vector<std::size_t> group_sizes;
  std::vector<double> group_means;
  std::vector<double> group_stddevs;
  WelchAnovaResult anova;
  std::vector<PairwiseComparison> pairwise;
  std::vector<std::vector<double>> cle_matrix;
};

StatReport compare_groups(const std::vector<GroupSample>& groups);

}  // namespace rltest
