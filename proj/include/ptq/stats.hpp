#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ptq/core.hpp"

namespace ptq {

// Asymptotic Kolmogorov distribution tail Q(lambda) = P(D > lambda-ish).
inline double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample KS p-value of `samples` against the unit exponential, with the
// Stephens small-sample correction.
inline double ks_test_exp1(std::vector<double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw BadArgument("KS test needs samples");
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = 1.0 - std::exp(-samples[i]);
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
  }
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

inline std::vector<double> ranks_with_ties(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Spearman rank correlation (average ranks for ties).
inline double spearman(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw BadArgument("spearman needs matched samples, n >= 3");
  const auto rx = ranks_with_ties(xs);
  const auto ry = ranks_with_ties(ys);
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// One-sided p-value for H1: rho > 0, via the large-sample t approximation
// (normal tail is adequate for the sample sizes used here).
inline double spearman_pvalue_positive(double rho, std::size_t n) {
  if (n < 4) throw BadArgument("need n >= 4");
  const double t = rho * std::sqrt((n - 2) / std::max(1e-12, 1.0 - rho * rho));
  return 0.5 * std::erfc(t / std::sqrt(2.0));
}

}  // namespace ptq
