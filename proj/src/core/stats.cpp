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

#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"

namespace configlab::stats {

double regularized_gamma_lower(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw InvalidArgument("regularized_gamma_lower: need a > 0, x >= 0");
  return boost::math::gamma_p(a, x);
}

double regularized_gamma_upper(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw InvalidArgument("regularized_gamma_upper: need a > 0, x >= 0");
  return boost::math::gamma_q(a, x);
}

double poisson_pmf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean < 0.0) throw InvalidArgument("poisson_pmf: negative mean");
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  double log_p = -mean + k * std::log(mean) - std::lgamma(k + 1.0);
  return std::exp(log_p);
}

double poisson_cdf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return 1.0;
  return regularized_gamma_upper(k + 1.0, mean);
}

double poisson_tail_geq(int k, double mean) {
  if (k <= 0) return 1.0;
  if (mean == 0.0) return 0.0;
  return regularized_gamma_lower(static_cast<double>(k), mean);
}

MeanStderr mean_stderr(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("mean_stderr: empty sample");
  MeanStderr out;
  out.n = static_cast<std::int64_t>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n == 1) {
    out.se = 0.0;
    return out;
  }
  double ss = 0.0;
  for (double v : values) {
    double d = v - out.mean;
    ss += d * d;
  }
  double var = ss / static_cast<double>(out.n - 1);
  out.se = std::sqrt(var / static_cast<double>(out.n));
  return out;
}

double chi_square_sf(double x, int dof) {
  if (dof <= 0) throw InvalidArgument("chi_square_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

namespace {

// Pools adjacent (observed, expected) cells left to right until every pooled
// cell has expected count >= 5; a trailing underfull cell is merged into its
// predecessor.
std::vector<std::pair<double, double>> pool_cells(
    const std::vector<std::pair<double, double>>& cells) {
  std::vector<std::pair<double, double>> pooled;
  double obs_acc = 0.0;
  double exp_acc = 0.0;
  for (const auto& [obs, exp] : cells) {
    obs_acc += obs;
    exp_acc += exp;
    if (exp_acc >= 5.0) {
      pooled.emplace_back(obs_acc, exp_acc);
      obs_acc = 0.0;
      exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (!pooled.empty()) {
      pooled.back().first += obs_acc;
      pooled.back().second += exp_acc;
    } else {
      pooled.emplace_back(obs_acc, exp_acc);
    }
  }
  return pooled;
}

}  // namespace

ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& observed,
                               const std::vector<double>& probs,
                               std::int64_t n_samples) {
  if (observed.size() != probs.size())
    throw InvalidArgument("chi_square_gof: observed/probs size mismatch");
  if (n_samples <= 0) throw InvalidArgument("chi_square_gof: n_samples must be positive");
  std::int64_t obs_total = 0;
  double prob_total = 0.0;
  std::vector<std::pair<double, double>> cells;
  cells.reserve(observed.size() + 1);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] < 0) throw InvalidArgument("chi_square_gof: negative count");
    if (probs[i] < 0.0) throw InvalidArgument("chi_square_gof: negative probability");
    obs_total += observed[i];
    prob_total += probs[i];
    cells.emplace_back(static_cast<double>(observed[i]), probs[i] * n_samples);
  }
  if (prob_total > 1.0 + 1e-9)
    throw InvalidArgument("chi_square_gof: probabilities exceed 1");
  double overflow_prob = std::max(0.0, 1.0 - prob_total);
  double overflow_obs = static_cast<double>(n_samples - obs_total);
  if (overflow_obs < 0.0)
    throw InvalidArgument("chi_square_gof: observed counts exceed n_samples");
  cells.emplace_back(overflow_obs, overflow_prob * n_samples);

  auto pooled = pool_cells(cells);
  if (pooled.size() < 2)
    throw InvalidArgument("chi_square_gof: fewer than two cells after pooling");
  ChiSquareResult out;
  out.dof = static_cast<int>(pooled.size()) - 1;
  for (const auto& [obs, exp] : pooled) {
    if (exp <= 0.0) {
      if (obs > 0.0) {
        out.statistic = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
        return out;
      }
      continue;
    }
    double d = obs - exp;
    out.statistic += d * d / exp;
  }
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

ChiSquareResult chi_square_two_sample(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b) {
  if (a.size() != b.size() || a.empty())
    throw InvalidArgument("chi_square_two_sample: histograms must have equal nonzero size");
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) throw InvalidArgument("chi_square_two_sample: negative count");
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  if (na <= 0.0 || nb <= 0.0)
    throw InvalidArgument("chi_square_two_sample: each sample needs positive total");

  // Pool categories until the pooled expected count is >= 5 in both samples.
  std::vector<std::pair<double, double>> pooled;
  double ca = 0.0;
  double cb = 0.0;
  auto expected_ok = [&](double pa, double pb) {
    double tot = pa + pb;
    return na * tot / (na + nb) >= 5.0 && nb * tot / (na + nb) >= 5.0;
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += static_cast<double>(a[i]);
    cb += static_cast<double>(b[i]);
    if (expected_ok(ca, cb)) {
      pooled.emplace_back(ca, cb);
      ca = 0.0;
      cb = 0.0;
    }
  }
  if (ca > 0.0 || cb > 0.0) {
    if (!pooled.empty()) {
      pooled.back().first += ca;
      pooled.back().second += cb;
    } else {
      pooled.emplace_back(ca, cb);
    }
  }
  if (pooled.size() < 2)
    throw InvalidArgument("chi_square_two_sample: fewer than two cells after pooling");

  ChiSquareResult out;
  out.dof = static_cast<int>(pooled.size()) - 1;
  for (const auto& [oa, ob] : pooled) {
    double tot = oa + ob;
    double ea = na * tot / (na + nb);
    double eb = nb * tot / (na + nb);
    double da = oa - ea;
    double db = ob - eb;
    out.statistic += da * da / ea + db * db / eb;
  }
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

namespace {

// Kolmogorov survival function 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_uniform(std::vector<double> values, double lo, double hi) {
  if (values.empty()) throw InvalidArgument("ks_uniform: empty sample");
  if (!(lo < hi)) throw InvalidArgument("ks_uniform: need lo < hi");
  std::sort(values.begin(), values.end());
  auto n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double f = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
    double lo_step = static_cast<double>(i) / n;
    double hi_step = static_cast<double>(i + 1) / n;
    d = std::max({d, f - lo_step, hi_step - f});
  }
  KsResult out;
  out.statistic = d;
  double sn = std::sqrt(n);
  out.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
  return out;
}

LinearFit linear_fit(const std::vector<double>& t,
                     const std::vector<double>& y,
                     const std::vector<double>& y_se) {
  if (t.size() != y.size() || t.size() != y_se.size())
    throw InvalidArgument("linear_fit: size mismatch");
  if (t.size() < 2) throw InvalidArgument("linear_fit: need at least two points");
  auto n = static_cast<double>(t.size());
  double t_mean = 0.0;
  for (double v : t) t_mean += v;
  t_mean /= n;
  double s_tt = 0.0;
  for (double v : t) s_tt += (v - t_mean) * (v - t_mean);
  if (s_tt <= 0.0) throw InvalidArgument("linear_fit: degenerate abscissae");

  LinearFit out;
  double slope = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) slope += (t[i] - t_mean) * y[i];
  slope /= s_tt;
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= n;
  out.slope = slope;
  out.intercept = y_mean - slope * t_mean;

  // intercept = sum_i c_i y_i with c_i = 1/n - t_mean (t_i - t_mean) / S_tt.
  double var = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double c = 1.0 / n - t_mean * (t[i] - t_mean) / s_tt;
    var += c * c * y_se[i] * y_se[i];
  }
  out.intercept_se = std::sqrt(var);
  return out;
}

}  // namespace configlab::stats
