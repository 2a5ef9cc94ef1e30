#include "cogload/stats.hpp"

#include "cogload/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cogload {

double binomial_tail_ge(int n, int k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  // Sum ascending-magnitude terms from the far tail inward.
  const double log2n = static_cast<double>(n) * std::log(2.0);
  double tail = 0.0;
  for (int j = n; j >= k; --j) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                           std::lgamma(n - j + 1.0) - log2n;
    tail += std::exp(log_pmf);
  }
  return std::min(1.0, tail);
}

ChanceLevel chance_level(int n_trials, double alpha) {
  if (n_trials < 1) throw validation_error("chance_level needs n_trials >= 1");
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw validation_error("chance_level alpha must lie in (0,1)");
  }
  // Walk down from k = n while the tail stays within alpha.
  int k = n_trials;
  double tail = binomial_tail_ge(n_trials, k);
  if (tail > alpha) {
    // Even all-correct is not significant at this alpha/n; report k = n.
    ChanceLevel out{n_trials, n_trials, 1.0, tail, alpha};
    return out;
  }
  while (k > 1) {
    const double next = binomial_tail_ge(n_trials, k - 1);
    if (next > alpha) break;
    tail = next;
    --k;
  }
  ChanceLevel out;
  out.n = n_trials;
  out.k_min = k;
  out.threshold = static_cast<double>(k) / static_cast<double>(n_trials);
  out.tail_p = tail;
  out.alpha = alpha;
  return out;
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw validation_error("gamma_q needs a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  // Series for P(a,x) when x < a+1, continued fraction for Q(a,x) otherwise.
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - log_gamma_a);
    return 1.0 - p;
  }
  // Lentz's algorithm.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma_a) * h;
}

double chi_squared_upper_tail(double x, int d) {
  if (d < 1) throw validation_error("chi-squared needs d >= 1");
  if (x <= 0.0) return 1.0;
  return gamma_q(static_cast<double>(d) / 2.0, x / 2.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences) {
  std::vector<double> nonzero;
  for (const double d : differences) {
    if (d != 0.0) nonzero.push_back(d);
  }
  WilcoxonResult out;
  out.n_nonzero = static_cast<int>(nonzero.size());
  if (nonzero.empty()) {
    out.degenerate = true;
    out.w = 0.0;
    out.p_value = 1.0;
    return out;
  }

  const auto n = nonzero.size();
  // Mid-ranks of |d|.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(nonzero[a]) < std::abs(nonzero[b]);
  });
  std::vector<double> ranks(n);
  std::vector<double> tie_sizes;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           std::abs(nonzero[order[j + 1]]) == std::abs(nonzero[order[i]])) {
      ++j;
    }
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    tie_sizes.push_back(static_cast<double>(j - i + 1));
    i = j + 1;
  }

  double w_pos = 0.0;
  double w_neg = 0.0;
  double rank_total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    (nonzero[k] > 0.0 ? w_pos : w_neg) += ranks[k];
    rank_total += ranks[k];
  }
  out.w = std::min(w_pos, w_neg);

  if (n <= 12) {
    // Exact two-sided p over all 2^n sign assignments, using the same
    // mid-ranks: P(min signed-rank sum <= observed).
    const auto assignments = std::size_t{1} << n;
    std::size_t count = 0;
    for (std::size_t mask = 0; mask < assignments; ++mask) {
      double pos = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask & (std::size_t{1} << k)) pos += ranks[k];
      }
      const double w = std::min(pos, rank_total - pos);
      if (w <= out.w + 1e-12) ++count;
    }
    out.p_value = static_cast<double>(count) / static_cast<double>(assignments);
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    for (const double t : tie_sizes) tie_term += t * t * t - t;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      out.degenerate = true;
      out.p_value = 1.0;
      return out;
    }
    const double z = (out.w - mean + 0.5) / std::sqrt(var);
    out.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  }
  return out;
}

double percentile(const Eigen::VectorXd& values, double q) {
  if (values.size() == 0) throw validation_error("percentile of an empty vector");
  if (q < 0.0 || q > 1.0) throw validation_error("percentile q must lie in [0,1]");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  if (lo == hi) return sorted[lo];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace cogload
