#pragma once

#include <Eigen/Core>

#include <vector>

namespace cogload {

/// Accuracy threshold above chance for a balanced 2-class problem: the
/// smallest k/n with P(X >= k) <= alpha under X ~ Binomial(n, 1/2), by exact
/// tail summation.
struct ChanceLevel {
  int n = 0;
  int k_min = 0;          // smallest significant correct count
  double threshold = 0.0; // k_min / n
  double tail_p = 0.0;    // achieved P(X >= k_min)
  double alpha = 0.0;
};

ChanceLevel chance_level(int n_trials, double alpha);

/// P(X >= k) for X ~ Binomial(n, 1/2).
double binomial_tail_ge(int n, int k);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Upper tail of the chi-squared distribution with d degrees of freedom.
double chi_squared_upper_tail(double x, int d);

double normal_cdf(double z);

/// Wilcoxon signed-rank test on paired differences. Zero differences are
/// dropped; absolute differences are ranked with mid-rank ties; W is the
/// smaller signed-rank sum. Two-sided p is exact (full sign enumeration) for
/// up to 12 non-zero pairs and a tie-corrected normal approximation with
/// continuity correction above that.
struct WilcoxonResult {
  double w = 0.0;
  double p_value = 1.0;
  int n_nonzero = 0;
  bool degenerate = false;  // all differences were zero
};

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences);

/// Quantile with linear interpolation between order statistics, q in [0,1].
double percentile(const Eigen::VectorXd& values, double q);

}  // namespace cogload
