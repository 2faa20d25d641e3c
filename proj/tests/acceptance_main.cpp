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

// End-to-end acceptance battery.  Each criterion prints exactly one
// PASS/FAIL line with its pinned tolerance and measured runtime; the
// process exits 0 only if every criterion passes.
//
//   acceptance [--cli PATH] [--only N,M,...]
//
// --cli points at the command line binary (needed by criterion 15);
// --only restricts the run to a comma-separated list of criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cylinder.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "point_config.hpp"
#include "rng.hpp"
#include "samplers.hpp"
#include "stats.hpp"
#include "transport.hpp"

using namespace configlab;
using stats::chi_square_gof;
using stats::mean_stderr;
using stats::poisson_pmf;
using diffusion::Concentration;
using diffusion::DiffusionSpec;
using diffusion::DistanceBall;
using diffusion::EventSet;
using diffusion::LambdaSet;
using diffusion::ReflectingBox;
using diffusion::Torus;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g_cli_path;

Point point1(double x) { return Point{{x}}; }

Configuration single_atom(double x) {
  Configuration g(1);
  g.add(point1(x));
  return g;
}

Configuration pair_atoms(double x0, double x1) {
  Configuration g(1);
  g.add(point1(x0));
  g.add(point1(x1));
  return g;
}

// Uniform configuration with the requested number of expanded points; a
// fraction of them land as multiplicity-2 atoms so duplicate handling stays
// covered.
Configuration random_config(int dim, int mass, double lo, double hi, Rng& rng,
                            double dup_prob = 0.2) {
  Configuration g(dim);
  int remaining = mass;
  while (remaining > 0) {
    Point p(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (int k = 0; k < dim; ++k) p[k] = rng.uniform(lo, hi);
    int mult = (remaining >= 2 && rng.uniform01() < dup_prob) ? 2 : 1;
    g.add(p, mult);
    remaining -= mult;
  }
  return g;
}

// Fixed-count uniform law on a box window: Gibbs chain with null potentials
// and move-only proposals, so the invariant law is the uniform symmetric one.
GibbsModel fixed_count_uniform(const Window& w, Configuration initial,
                               double move_scale, std::int64_t burn_in,
                               std::int64_t thinning) {
  McmcParams p;
  p.burn_in = burn_in;
  p.thinning = thinning;
  p.p_birth = 0.0;
  p.p_death = 0.0;
  p.p_move = 1.0;
  p.move_scale = move_scale;
  return GibbsModel{IntensityMeasure::uniform(w, 1.0),
                    [](const Point&) { return 0.0; },
                    [](const Point&, const Point&) { return 0.0; },
                    p,
                    std::move(initial)};
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f s", s);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Exact distance vs the exhaustive permutation oracle.

Outcome criterion_transport_oracle() {
  Rng rng(1001);
  double max_diff = 0.0;
  int finite = 0;
  for (int trial = 0; trial < 500; ++trial) {
    int dim = 1 + static_cast<int>(rng.uniform_index(3));
    int mass = 1 + static_cast<int>(rng.uniform_index(7));
    Configuration a = random_config(dim, mass, -1.0, 1.0, rng);
    Configuration b = random_config(dim, mass, -1.0, 1.0, rng);
    auto fast = transport::d_upsilon(a, b);
    auto slow = transport::brute_force_distance(a, b);
    if (fast.is_infinite() != slow.is_infinite()) {
      return {false, "oracle disagrees on finiteness"};
    }
    if (!fast.is_infinite()) {
      ++finite;
      max_diff = std::max(max_diff, std::abs(fast.value() - slow.value()));
    }
  }
  std::ostringstream out;
  out << "max |d - oracle| = " << max_diff << " over 500 pairs (" << finite
      << " finite)";
  return {max_diff <= 1e-9 && finite == 500, out.str()};
}

// ---------------------------------------------------------------------------
// 2. Metric axioms on random triples; unequal mass has no coupling.

Outcome criterion_metric_axioms() {
  Rng rng(1002);
  double worst_triangle = 0.0;
  double worst_symmetry = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int dim = 1 + static_cast<int>(rng.uniform_index(2));
    int mass = 1 + static_cast<int>(rng.uniform_index(5));
    Configuration a = random_config(dim, mass, -1.0, 1.0, rng);
    Configuration b = random_config(dim, mass, -1.0, 1.0, rng);
    Configuration c = random_config(dim, mass, -1.0, 1.0, rng);

    auto dab = transport::d_upsilon(a, b);
    auto dba = transport::d_upsilon(b, a);
    auto dbc = transport::d_upsilon(b, c);
    auto dac = transport::d_upsilon(a, c);
    if (dab.is_infinite() || dba.is_infinite() || dbc.is_infinite() ||
        dac.is_infinite()) {
      return {false, "equal-mass pair came back infinite"};
    }
    worst_symmetry =
        std::max(worst_symmetry, std::abs(dab.value() - dba.value()));
    worst_triangle = std::max(
        worst_triangle, dac.value() - (dab.value() + dbc.value()));
    if (transport::d_upsilon(a, a).value() != 0.0) {
      return {false, "d(a, a) is not zero"};
    }

    // One extra coupled point on one side empties the coupling set.
    Configuration bigger = a;
    bigger.add(Point{std::vector<double>(static_cast<std::size_t>(dim), 0.123)});
    if (!transport::d_upsilon(a, bigger).is_infinite()) {
      return {false, "unequal mass produced a finite distance"};
    }
  }
  std::ostringstream out;
  out << "symmetry gap " << worst_symmetry << ", triangle slack "
      << worst_triangle << " over 1000 triples";
  return {worst_symmetry <= 1e-9 && worst_triangle <= 1e-9, out.str()};
}

// ---------------------------------------------------------------------------
// 3. Chi-square goodness of fit of the window count law.

Outcome criterion_poisson_counts() {
  const std::int64_t n_samples = 100000;
  std::ostringstream out;
  bool pass = true;
  int idx = 0;
  for (double mean : {0.5, 2.0, 5.0}) {
    Window w = Window::box(point1(0.0), point1(1.0));
    ModelSampler sampler(
        PointProcessModel{PoissonModel{IntensityMeasure::uniform(w, mean)}},
        9100 + static_cast<std::uint64_t>(idx));
    ++idx;

    // Individual bins while the expected count stays comfortable, one tail
    // bin for the rest.
    int k_max = 0;
    while (static_cast<double>(n_samples) * poisson_pmf(k_max, mean) >= 5.0) {
      ++k_max;
    }
    std::vector<std::int64_t> observed(static_cast<std::size_t>(k_max) + 1, 0);
    for (std::int64_t i = 0; i < n_samples; ++i) {
      auto n = count(sampler.next(), w);
      observed[static_cast<std::size_t>(
          std::min<std::int64_t>(n, k_max))] += 1;
    }
    std::vector<double> probs(static_cast<std::size_t>(k_max) + 1, 0.0);
    double head = 0.0;
    for (int k = 0; k < k_max; ++k) {
      probs[static_cast<std::size_t>(k)] = poisson_pmf(k, mean);
      head += probs[static_cast<std::size_t>(k)];
    }
    probs[static_cast<std::size_t>(k_max)] = 1.0 - head;

    auto res = chi_square_gof(observed, probs, n_samples);
    if (res.p_value <= 0.01) pass = false;
    out << "mean " << mean << ": p = " << res.p_value << "; ";
  }
  out << "threshold 0.01, 1e5 samples each";
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 4. The point-process integration-by-parts identity, plus one closed form.

Outcome criterion_mecke() {
  const std::int64_t n_samples = 100000;
  const double rate = 1.5;
  Window w = Window::box(point1(0.0), point1(1.0));
  Window half = Window::box(point1(0.0), point1(0.5));
  Window left = Window::box(point1(0.0), point1(0.6));
  Window right = Window::box(point1(0.4), point1(1.0));
  auto intensity = IntensityMeasure::uniform(w, rate);
  auto bump = smooth_bump(point1(0.5), 0.5);

  using Fn = std::function<double(const Configuration&, const Point&)>;
  std::vector<std::pair<std::string, Fn>> functionals;
  functionals.emplace_back("indicator_in", [half](const Configuration&,
                                                  const Point& x) {
    return half.contains(x) ? 1.0 : 0.0;
  });
  functionals.emplace_back(
      "indicator_count_eq", [w](const Configuration& g, const Point& x) {
        return w.contains(x) && count(g, w) == 3 ? 1.0 : 0.0;
      });
  functionals.emplace_back(
      "indicator_other_geq",
      [left, right](const Configuration& g, const Point& x) {
        return left.contains(x) && count(g, right) >= 1 ? 1.0 : 0.0;
      });
  functionals.emplace_back(
      "neighbor_count", [](const Configuration& g, const Point& x) {
        double c = 0.0;
        for (const auto& y : g.expanded()) {
          double d = y[0] - x[0];
          if (d * d <= 0.04) c += 1.0;
        }
        return c - 1.0;
      });
  functionals.emplace_back("smooth_weight",
                           [&bump](const Configuration&, const Point& x) {
                             return bump.value(x);
                           });

  std::ostringstream out;
  bool pass = true;
  int fn_idx = 0;
  for (const auto& [name, fn] : functionals) {
    auto chk =
        check_mecke(intensity, fn, n_samples,
                    4200 + static_cast<std::uint64_t>(fn_idx));
    ++fn_idx;
    double gap = std::abs(chk.lhs - chk.rhs);
    if (gap > 3.0 * chk.se + 1e-12) {
      pass = false;
      out << name << ": |lhs-rhs| = " << gap << " > 3se = " << 3.0 * chk.se
          << "; ";
    }
  }

  // u = 1_E(x) 1{gamma E = 3} sums to 3 * P(N = 3); the mean count is the
  // window mass m(E) = 1.5.
  const double closed_form =
      3.0 * std::pow(rate, 3) * std::exp(-rate) / 6.0;
  ModelSampler sampler(PointProcessModel{PoissonModel{intensity}}, 4300);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    values.push_back(count(sampler.next(), w) == 3 ? 3.0 : 0.0);
  }
  auto ms = mean_stderr(values);
  double gap = std::abs(ms.mean - closed_form);
  if (gap > 3.0 * ms.se) pass = false;
  out << "5 functionals at 3se; closed form 3(mE)^3 e^{-mE}/3! = "
      << closed_form << ", estimate " << ms.mean << " (gap " << gap
      << " vs 3se = " << 3.0 * ms.se << ")";
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 5. Exponential functional of the sampled law vs quadrature.

Outcome criterion_laplace() {
  const std::int64_t n_samples = 100000;
  Window w = Window::box(point1(0.0), point1(2.0));
  auto intensity = IntensityMeasure::uniform(w, 1.0);

  std::vector<SmoothTestFunction> fns;
  fns.push_back(smooth_bump(point1(1.0), 0.8, 0.5));
  fns.push_back(gaussian_bump(point1(0.6), 0.2, 0.5, -0.7));
  fns.push_back(smooth_bump(point1(1.2), 0.6, 0.3));

  std::ostringstream out;
  bool pass = true;
  int idx = 0;
  for (const auto& f : fns) {
    BoundedTestFunction btf;
    btf.value = [&f](const Point& x) { return f.value(x); };
    auto chk = check_laplace(intensity, btf, n_samples,
                             5300 + static_cast<std::uint64_t>(idx));
    ++idx;
    double rel =
        std::abs(chk.empirical - chk.closed_form) / std::abs(chk.closed_form);
    if (rel > 0.02) pass = false;
    out << f.name() << ": rel " << rel << "; ";
  }
  out << "tolerance 2%, 1e5 samples each";
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 6. Tail profile n * P(N >= n) against the incomplete-gamma closed form.

Outcome criterion_tightness() {
  const double mean = 2.0;
  const std::int64_t n_samples = 100000;
  Window w = Window::box(point1(0.0), point1(1.0));
  PointProcessModel model{PoissonModel{IntensityMeasure::uniform(w, mean)}};
  auto rows = tightness_profile(model, w, 15, n_samples, 6400);

  double worst_z = 0.0;
  int checked = 0;
  bool pass = true;
  for (const auto& row : rows) {
    if (!row.has_exact || row.n == 0) continue;
    ++checked;
    double p = row.exact / row.n;
    double sigma =
        row.n * std::sqrt(std::max(p * (1.0 - p), 0.0) /
                          static_cast<double>(n_samples));
    double gap = std::abs(row.empirical - row.exact);
    if (gap > 3.0 * sigma + 1e-12) pass = false;
    if (sigma > 0.0) worst_z = std::max(worst_z, gap / sigma);
  }
  std::ostringstream out;
  out << checked << " tail rows (n <= 15) at mean 2, worst z = " << worst_z
      << " vs gate 3";
  return {pass && checked == 15, out.str()};
}

// ---------------------------------------------------------------------------
// Shared pool of cylinder functions for the square-field criteria.

std::vector<CylinderFunction> cylinder_pool() {
  std::vector<CylinderFunction> pool;
  pool.push_back(
      CylinderFunction(OuterFunction::identity(), {smooth_bump(point1(0.0), 1.2)}));
  pool.push_back(CylinderFunction(OuterFunction::arc_tangent(),
                                  {gaussian_bump(point1(0.5), 0.4, 1.0)}));
  pool.push_back(CylinderFunction(
      OuterFunction::linear({0.7, -0.4}),
      {smooth_bump(point1(-0.5), 1.0), smooth_bump(point1(0.6), 0.8, -0.5)}));
  pool.push_back(CylinderFunction(
      OuterFunction::arc_tangent(),
      {gaussian_bump(point1(-0.2), 0.3, 0.8, 1.3)}));
  return pool;
}

Configuration random_support_config(const CylinderFunction& u, int mass,
                                    Rng& rng) {
  Window box = common_support_box(u);
  return random_config(box.dim(), mass, box.lo()[0] - 0.4, box.hi()[0] + 0.4,
                       rng, 0.15);
}

// 7. Chain-rule vs per-atom square field, and representation independence.

Outcome criterion_square_field_routes() {
  auto pool = cylinder_pool();
  Rng rng(7001);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto& u = pool[trial % pool.size()];
    const auto& v = pool[(trial / 2) % pool.size()];
    int mass = 1 + static_cast<int>(rng.uniform_index(6));
    Configuration g = random_support_config(u, mass, rng);
    double lifted = square_field_lifted(u, v, g);
    double atomwise = square_field_atomwise(u, v, g);
    worst = std::max(worst, std::abs(lifted - atomwise));
  }

  // The same function under three different presentations: permuted inner
  // list with permuted coefficients, and a padded zero-coefficient slot.
  auto f1 = smooth_bump(point1(-0.5), 1.0);
  auto f2 = smooth_bump(point1(0.6), 0.8, -0.5);
  auto f3 = gaussian_bump(point1(0.0), 0.3, 0.7);
  CylinderFunction u1(OuterFunction::linear({0.7, -0.4}), {f1, f2});
  CylinderFunction u2(OuterFunction::linear({-0.4, 0.7}), {f2, f1});
  CylinderFunction u3(OuterFunction::linear({0.7, -0.4, 0.0}), {f1, f2, f3});
  double worst_rep = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int mass = 1 + static_cast<int>(rng.uniform_index(5));
    Configuration g = random_config(1, mass, -2.0, 2.0, rng, 0.15);
    double base = square_field_lifted(u1, u1, g);
    worst_rep = std::max(worst_rep,
                         std::abs(square_field_lifted(u2, u2, g) - base));
    worst_rep = std::max(worst_rep,
                         std::abs(square_field_lifted(u3, u3, g) - base));
    worst_rep = std::max(
        worst_rep, std::abs(eval_cylinder(u1, g) - eval_cylinder(u2, g)));
  }
  std::ostringstream out;
  out << "route gap " << worst << " on 200 instances, representation gap "
      << worst_rep << " on 100; gate 1e-10";
  return {worst <= 1e-10 && worst_rep <= 1e-10, out.str()};
}

// ---------------------------------------------------------------------------
// 8. The non-Lipschitz construction delivers its advertised energy.

Outcome criterion_nonlip() {
  std::ostringstream out;
  bool pass = true;
  for (int n : {1, 5, 10, 20}) {
    double eps = 1.0 / n;
    auto ex = nonlip_example(eps, n);
    double gamma_val = square_field_lifted(ex.u, ex.u, ex.gamma);
    double bound = n / std::pow(1.0 + eps * eps * n * n, 2);
    if (gamma_val < bound - 1e-9) pass = false;
    out << "n=" << n << ": " << gamma_val << " >= " << bound << "; ";
  }
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 9. The finite-volume Lipschitz bound sqrt(n) C_u.

Outcome criterion_local_lipschitz() {
  auto pool = cylinder_pool();
  Rng rng(9001);
  bool pass = true;
  double worst_excess = -1.0;
  for (const auto& u : pool) {
    for (int n : {1, 3}) {
      double bound = local_lipschitz_bound(u, n);
      for (int trial = 0; trial < 500; ++trial) {
        Configuration a = random_support_config(u, n, rng);
        Configuration b = random_support_config(u, n, rng);
        auto d = transport::d_upsilon(a, b);
        if (d.is_infinite()) {
          pass = false;
          continue;
        }
        double gap = std::abs(eval_cylinder(u, a) - eval_cylinder(u, b));
        double excess = gap - (bound * d.value() + 1e-9);
        worst_excess = std::max(worst_excess, excess);
        if (excess > 0.0) pass = false;
      }
    }
  }
  std::ostringstream out;
  out << "8 (u, n) combos x 500 pairs, worst slack " << worst_excess
      << " (must stay <= 0)";
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 10. Probe slope squared stays under the square field.

Outcome criterion_slope_domination() {
  auto pool = cylinder_pool();
  Rng rng(10001);
  bool pass = true;
  int instance = 0;
  double worst_ratio = 0.0;
  while (instance < 100) {
    const auto& u = pool[static_cast<std::size_t>(instance) % pool.size()];
    int mass = 1 + static_cast<int>(rng.uniform_index(4));
    Configuration g = random_support_config(u, mass, rng);
    double gamma_val = square_field_lifted(u, u, g);
    double slope = slope_estimate(u, g, {1e-3, 1e-4}, 8,
                                  11000 + static_cast<std::uint64_t>(instance));
    ++instance;
    if (slope * slope > 1.05 * gamma_val + 1e-12) pass = false;
    if (gamma_val > 1e-12) {
      worst_ratio = std::max(worst_ratio, slope * slope / gamma_val);
    }
  }
  std::ostringstream out;
  out << "100 instances, worst slope^2 / energy = " << worst_ratio
      << " vs gate 1.05";
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 11. Lipschitz family: difference quotients and short-time energy.

Outcome criterion_rademacher() {
  Window box = Window::box(point1(-1.0), point1(1.0));
  auto model = fixed_count_uniform(box, single_atom(0.0), 0.4, 500, 2);
  DiffusionSpec spec{PointProcessModel{model}, ReflectingBox{box}, 2e-4, 0.05};
  diffusion::LipschitzFunctionSpec u{
      single_atom(0.0), Window::box(point1(-0.5), point1(0.5)), 1.0, 1.0};
  diffusion::RademacherOptions opt;
  opt.n_cdc_gammas = 50;
  opt.cdc_t_grid = {0.008, 0.004, 0.002};
  opt.cdc_n_paths = 2000;
  auto rep = diffusion::rademacher_check(u, spec, 1000, 101, opt);
  std::ostringstream out;
  out << "max ratio " << rep.max_ratio << " over " << rep.finite_pairs
      << " pairs (gate 1 + 1e-9), max short-time energy " << rep.max_cdc
      << " over " << rep.cdc_gammas << " configs (gate 1.1)";
  return {rep.pass && rep.max_ratio <= 1.0 + 1e-9 && rep.max_cdc <= 1.1 &&
              rep.finite_pairs == 1000 && rep.cdc_gammas == 50,
          out.str()};
}

// ---------------------------------------------------------------------------
// 12. Two-set heat-flow upper bound battery.

Outcome criterion_gaussian_bound() {
  Window box = Window::box(point1(0.0), point1(1.0));
  PointProcessModel model{PoissonModel{IntensityMeasure::uniform(box, 2.0)}};
  DiffusionSpec spec{model, ReflectingBox{box}, 1e-3, 0.1};

  struct Case {
    EventSet a;
    EventSet b;
    std::vector<double> t_grid;
  };
  std::vector<Case> battery;
  battery.push_back({DistanceBall{single_atom(0.2), 0.25},
                     DistanceBall{single_atom(0.8), 0.25},
                     {0.01, 0.02, 0.05}});
  battery.push_back({DistanceBall{single_atom(0.3), 0.2},
                     DistanceBall{single_atom(0.7), 0.2},
                     {0.01, 0.05}});
  battery.push_back({LambdaSet{single_atom(0.2), box, 0.08},
                     LambdaSet{single_atom(0.75), box, 0.08},
                     {0.02, 0.05}});
  battery.push_back({DistanceBall{pair_atoms(0.2, 0.4), 0.2},
                     DistanceBall{pair_atoms(0.6, 0.8), 0.2},
                     {0.02, 0.05}});

  bool pass = true;
  int rows = 0;
  std::ostringstream out;
  int idx = 0;
  for (const auto& c : battery) {
    auto rep = diffusion::gaussian_bound_check(
        c.a, c.b, c.t_grid, spec, 100000,
        12000 + static_cast<std::uint64_t>(idx));
    ++idx;
    rows += static_cast<int>(rep.rows.size());
    if (!rep.pass) {
      pass = false;
      out << "case " << idx << " violated; ";
    }
  }
  out << rows << " (set, set, t) rows at 1e5 paths, no 3-sigma violation";
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 13. Short-time decay rate extrapolation vs transport references.

Outcome criterion_varadhan() {
  std::ostringstream out;

  // One particle on an interval, conditioned near the origin, reaching a
  // transport ball around 0.5: the rate extrapolates to (0.49 - 0.04)^2.
  Window box1 = Window::box(point1(-0.25), point1(0.85));
  auto model1 = fixed_count_uniform(box1, single_atom(0.0), 0.3, 2000, 1);
  DiffusionSpec spec1{PointProcessModel{model1}, ReflectingBox{box1}, 2e-3,
                      1.0};
  EventSet lambda1 = Concentration{
      Window::box(point1(-0.01), point1(0.01)), 1, CountMode::Eq};
  EventSet xi1 = DistanceBall{single_atom(0.5), 0.040};
  const double ref1 = 0.2025;
  auto rep1 = diffusion::varadhan_profile(xi1, lambda1,
                                          {0.06, 0.05, 0.04, 0.03}, spec1,
                                          1000000, 71);
  double rel1 = std::abs(rep1.extrapolated - ref1) / ref1;
  out << "one-particle rel " << rel1 << " vs 10% (rate " << rep1.extrapolated
      << ", ref " << ref1 << "); ";

  // Two particles started near {0, 1} asked to look like {2, 3} on a wide
  // window; the reference is the squared matching distance from the start
  // pool.
  Window box2 = Window::box(point1(-1.5), point1(4.5));
  auto model2 = fixed_count_uniform(box2, pair_atoms(0.0, 1.0), 0.8, 2000, 1);
  DiffusionSpec spec2{PointProcessModel{model2}, ReflectingBox{box2}, 5e-3,
                      1.0};
  EventSet lambda2 = DistanceBall{pair_atoms(0.0, 1.0), 0.6};
  EventSet xi2 = LambdaSet{pair_atoms(2.0, 3.0),
                           Window::box(point1(-5.0), point1(5.0)), 0.34};
  auto rep2 = diffusion::varadhan_profile(xi2, lambda2,
                                          {0.6, 0.55, 0.5, 0.45}, spec2,
                                          6000000, 73);
  if (!rep2.reference.has_value()) {
    return {false, "two-particle run produced no transport reference"};
  }
  double ref2 = *rep2.reference;
  double rel2 = std::abs(rep2.extrapolated - ref2) / ref2;
  out << "two-particle rel " << rel2 << " vs 15% (rate " << rep2.extrapolated
      << ", ref " << ref2 << ")";
  bool pass = rep1.reference.has_value() &&
              std::abs(*rep1.reference - ref1) <= 0.01 * ref1 &&
              rel1 <= 0.10 && rel2 <= 0.15;
  return {pass, out.str()};
}

// ---------------------------------------------------------------------------
// 14. Invariance of the sampled law under propagation, and a drift fault.

Outcome criterion_stationarity() {
  Window box = Window::box(point1(0.0), point1(1.0));
  std::vector<Window> windows{Window::box(point1(0.0), point1(0.25)),
                              Window::box(point1(0.25), point1(0.75)),
                              Window::box(point1(0.0), point1(1.0))};

  PointProcessModel poisson{
      PoissonModel{IntensityMeasure::uniform(box, 3.0)}};
  DiffusionSpec spec{poisson, Torus{{1.0}}, 5e-3, 1.0};
  auto good = diffusion::stationarity_test(spec, 1.0, windows, 1000, 111);

  McmcParams mc;
  mc.burn_in = 2000;
  mc.thinning = 10;
  GibbsModel tilted{IntensityMeasure::uniform(box, 3.0),
                    [](const Point& x) {
                      return 2.0 * std::cos(2.0 * M_PI * x[0]);
                    },
                    [](const Point&, const Point&) { return 0.0; },
                    mc,
                    std::nullopt};
  DiffusionSpec spec_bad{PointProcessModel{tilted}, Torus{{1.0}}, 5e-3, 1.0};
  auto bad = diffusion::stationarity_test(spec_bad, 1.0, windows, 1000, 113,
                                          /*negate_drift=*/true);

  std::ostringstream out;
  out << "invariant run min p = ";
  double min_p = 1.0;
  for (double p : good.p_values) min_p = std::min(min_p, p);
  out << min_p << " (alpha " << good.alpha << "), negated-drift control "
      << (bad.pass ? "PASSED (must fail)" : "failed as required")
      << "; 1000 chains, horizon 1";
  return {good.pass && !bad.pass, out.str()};
}

// ---------------------------------------------------------------------------
// 15. The command line front end reproduces bytes exactly.

Outcome criterion_cli_reproducibility() {
  if (g_cli_path.empty()) {
    return {false, "no --cli path provided"};
  }
  const std::string dir = "/tmp/configlab_acceptance";
  std::system(("mkdir -p " + dir).c_str());

  auto write_file = [](const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
  };
  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  write_file(dir + "/sample.json", R"({
    "schema_version": 1,
    "model": {"kind": "poisson",
              "window": {"kind": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
              "rate": 2.0},
    "n_samples": 50,
    "seed": 42,
    "workers": 2
  })");
  write_file(dir + "/mecke.json", R"({
    "schema_version": 1,
    "model": {"kind": "poisson",
              "window": {"kind": "box", "lo": [0.0], "hi": [1.0]},
              "rate": 1.5},
    "functionals": [{"name": "neighbor_count", "params": {"range": 0.2}}],
    "n_samples": 5000,
    "seed": 10
  })");

  std::ostringstream out;
  bool pass = true;
  for (const std::string name : {"sample", "mecke"}) {
    const std::string cfg = dir + "/" + name + ".json";
    const std::string sub = (name == "sample") ? "sample" : "mecke-check";
    for (int round = 0; round < 2; ++round) {
      const std::string tag = dir + "/" + name + std::to_string(round);
      const std::string cmd = g_cli_path + " " + sub + " --config " + cfg +
                              " --out " + tag + ".csv > " + tag +
                              ".verdict 2> /dev/null";
      int rc = std::system(cmd.c_str());
      if (rc != 0) {
        pass = false;
        out << name << " round " << round << " exited " << rc << "; ";
      }
    }
    bool same_csv = read_file(dir + "/" + name + "0.csv") ==
                    read_file(dir + "/" + name + "1.csv");
    bool same_verdict = read_file(dir + "/" + name + "0.verdict") ==
                        read_file(dir + "/" + name + "1.verdict");
    if (!(same_csv && same_verdict)) pass = false;
    out << name << ": csv " << (same_csv ? "identical" : "DIFFERS")
        << ", verdict " << (same_verdict ? "identical" : "DIFFERS") << "; ";
  }
  out << "2 subcommands x 2 runs";
  return {pass, out.str()};
}

struct Criterion {
  int number;
  const char* label;
  Outcome (*run)();
  // Wall-clock budget in seconds; 0 means no budget is pinned.
  double budget;
};

const Criterion kCriteria[] = {
    {1, "transport distance matches the permutation oracle",
     criterion_transport_oracle, 10.0},
    {2, "metric axioms hold on random triples", criterion_metric_axioms, 0.0},
    {3, "window counts follow the poisson law", criterion_poisson_counts,
     30.0},
    {4, "integration-by-parts identity holds", criterion_mecke, 0.0},
    {5, "exponential functionals match quadrature", criterion_laplace, 0.0},
    {6, "tail profile matches the incomplete gamma", criterion_tightness,
     0.0},
    {7, "square-field routes agree and are representation-free",
     criterion_square_field_routes, 0.0},
    {8, "non-lipschitz example has unbounded energy", criterion_nonlip, 0.0},
    {9, "finite-volume lipschitz bound holds", criterion_local_lipschitz,
     0.0},
    {10, "probe slope squared is dominated by the energy",
     criterion_slope_domination, 0.0},
    {11, "lipschitz family passes the two-sided check", criterion_rademacher,
     300.0},
    {12, "heat-flow upper bound holds across the battery",
     criterion_gaussian_bound, 600.0},
    {13, "short-time decay rates match transport references",
     criterion_varadhan, 900.0},
    {14, "propagation preserves the invariant law", criterion_stationarity,
     0.0},
    {15, "cli runs are byte-identical", criterion_cli_reproducibility, 0.0},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      g_cli_path = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::istringstream in(argv[++i]);
      std::string tok;
      while (std::getline(in, tok, ',')) only.push_back(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: acceptance [--cli PATH] [--only N,M,...]\n");
      return 2;
    }
  }

  int failures = 0;
  int ran = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.number) == only.end()) {
      continue;
    }
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    bool in_budget = c.budget <= 0.0 || elapsed <= c.budget;
    bool pass = outcome.pass && in_budget;
    if (!pass) ++failures;
    std::printf("criterion %02d %s (%s) %s: %s%s\n", c.number,
                pass ? "PASS" : "FAIL", fmt_seconds(elapsed).c_str(), c.label,
                outcome.detail.c_str(),
                in_budget ? ""
                          : (" [over budget " + fmt_seconds(c.budget) + "]")
                                .c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
