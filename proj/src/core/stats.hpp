// Copyright 2026 The Configlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONFIGLAB_CORE_STATS_HPP_
#define CONFIGLAB_CORE_STATS_HPP_

#include <cstdint>
#include <vector>

namespace configlab::stats {

// Regularized incomplete gamma functions P(a, x) and Q(a, x).
double regularized_gamma_lower(double a, double x);
double regularized_gamma_upper(double a, double x);

double poisson_pmf(int k, double mean);
// P(X <= k) for X ~ Poisson(mean).
double poisson_cdf(int k, double mean);
// P(X >= k); equals the regularized lower incomplete gamma P(k, mean).
double poisson_tail_geq(int k, double mean);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t n = 0;
};
MeanStderr mean_stderr(const std::vector<double>& values);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// One-sample goodness of fit of observed counts per bin against bin
// probabilities.  Bin i of `probs` is the probability of category i; any
// remaining probability mass forms an implicit overflow bin.  Adjacent bins
// are pooled until every expected count is at least 5.
ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& observed,
                               const std::vector<double>& probs,
                               std::int64_t n_samples);

// Two-sample homogeneity test on two histograms over the same categories.
ChiSquareResult chi_square_two_sample(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b);

double chi_square_sf(double x, int dof);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against the uniform law on [lo, hi].
KsResult ks_uniform(std::vector<double> values, double lo, double hi);

// Least-squares line y = intercept + slope * t.  The intercept standard
// error is propagated from the per-point standard errors of y.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
};
LinearFit linear_fit(const std::vector<double>& t,
                     const std::vector<double>& y,
                     const std::vector<double>& y_se);

}  // namespace configlab::stats

#endif  // CONFIGLAB_CORE_STATS_HPP_
