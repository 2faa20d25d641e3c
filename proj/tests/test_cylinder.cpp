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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cylinder.hpp"
#include "errors.hpp"
#include "point_config.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "samplers.hpp"
#include "test_util.hpp"
#include "transport.hpp"

using namespace configlab;
using namespace configlab::transport;

namespace {

double quintic(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double quintic_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

// Equals 1 on the core of [lo, hi], eased to 0 at the boundary.
SmoothTestFunction plateau_box(const Point& lo, const Point& hi, double margin) {
  int d = lo.dim();
  auto value = [lo, hi, margin, d](const Point& p) {
    double prod = 1.0;
    for (int k = 0; k < d; ++k)
      prod *= quintic((p[k] - lo[k]) / margin) * quintic((hi[k] - p[k]) / margin);
    return prod;
  };
  auto gradient = [lo, hi, margin, d](const Point& p) {
    std::vector<double> r(static_cast<std::size_t>(d)), s(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      double a = quintic((p[k] - lo[k]) / margin);
      double b = quintic((hi[k] - p[k]) / margin);
      r[static_cast<std::size_t>(k)] = a * b;
      s[static_cast<std::size_t>(k)] =
          quintic_deriv((p[k] - lo[k]) / margin) / margin * b -
          a * quintic_deriv((hi[k] - p[k]) / margin) / margin;
    }
    std::vector<double> g(static_cast<std::size_t>(d), 0.0);
    for (int k = 0; k < d; ++k) {
      double others = 1.0;
      for (int j = 0; j < d; ++j)
        if (j != k) others *= r[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k)] * others;
    }
    return g;
  };
  double lip = std::sqrt(static_cast<double>(d)) * 1.875 / margin;
  return SmoothTestFunction("plateau", value, gradient, Window::box(lo, hi), lip);
}

// A pool of validated cylinder functions over a shared 1d window.
std::vector<CylinderFunction> make_pool() {
  std::vector<SmoothTestFunction> fns;
  fns.push_back(smooth_bump(point1(0.0), 2.0));
  fns.push_back(smooth_bump(point1(1.0), 1.5, -0.7));
  fns.push_back(gaussian_bump(point1(-0.5), 0.8, 2.5));
  fns.push_back(mollified_tent());
  fns.push_back(coordinate_taper(0, point1(-3.0), point1(3.0), 0.5));

  std::vector<CylinderFunction> pool;
  pool.emplace_back(OuterFunction::identity(),
                    std::vector<SmoothTestFunction>{fns[0]});
  pool.emplace_back(OuterFunction::arc_tangent(),
                    std::vector<SmoothTestFunction>{fns[3]});
  pool.emplace_back(OuterFunction::linear({0.8, -1.2}),
                    std::vector<SmoothTestFunction>{fns[1], fns[2]});
  pool.emplace_back(OuterFunction::linear({0.5, 0.25, 1.0}),
                    std::vector<SmoothTestFunction>{fns[0], fns[3], fns[4]});
  pool.emplace_back(OuterFunction::arc_tangent(),
                    std::vector<SmoothTestFunction>{fns[2]});
  return pool;
}

Configuration random_config_1d(Rng& rng, int max_atoms, double lo, double hi,
                               int max_mult = 3) {
  Configuration g(1);
  int atoms = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(max_atoms) + 1));
  for (int i = 0; i < atoms; ++i)
    g.add(point1(rng.uniform(lo, hi)),
          1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(max_mult))));
  return g;
}

}  // namespace

TEST_CASE("star evaluation sums with multiplicity") {
  auto one = plateau_box(point1(-5.0), point1(5.0), 1.0);
  Configuration g(1);
  g.add(point1(-1.0), 2);
  g.add(point1(2.5), 1);
  CHECK(eval_star(one, g) == doctest::Approx(3.0));

  Configuration empty(1);
  CHECK(eval_star(one, empty) == 0.0);

  auto coord = coordinate_taper(0, point1(-10.0), point1(10.0), 2.0);
  Configuration twice(1);
  twice.add(point1(1.0), 2);
  CHECK(eval_star(coord, twice) == doctest::Approx(2.0 * coord.value(point1(1.0))));
  CHECK(coord.value(point1(1.0)) == doctest::Approx(1.0));

  Configuration g2(2);
  CHECK_THROWS_AS(eval_star(one, g2), DimensionMismatch);
}

TEST_CASE("cylinder evaluation composes outer and star parts") {
  Configuration g(1);
  g.add(point1(0.2));
  g.add(point1(-0.4), 2);

  CylinderFunction constant(OuterFunction::constant(3.25), {});
  CHECK(eval_cylinder(constant, g) == 3.25);
  CHECK(eval_cylinder(constant, Configuration(1)) == 3.25);

  auto f = smooth_bump(point1(0.0), 2.0);
  CylinderFunction ident(OuterFunction::identity(), {f});
  CHECK(eval_cylinder(ident, g) == doctest::Approx(eval_star(f, g)));

  // Same function represented through two different outer functions.
  CylinderFunction split(OuterFunction::linear({1.0, 1.0}),
                         {scaled(f, 0.5), scaled(f, 0.5)});
  Rng rng(321);
  for (int i = 0; i < 100; ++i) {
    auto gamma = random_config_1d(rng, 5, -2.5, 2.5);
    CHECK(std::abs(eval_cylinder(ident, gamma) - eval_cylinder(split, gamma)) <= 1e-12);
  }
}

TEST_CASE("base square field") {
  auto f = smooth_bump(point1(0.0), 1.0);
  for (double x : {-0.8, -0.3, 0.0, 0.5, 0.9}) {
    CHECK(square_field_base(f, f, point1(x)) >= 0.0);
  }
  auto left = smooth_bump(point1(-2.0), 1.0);
  auto right = smooth_bump(point1(2.0), 1.0);
  for (double x : {-2.5, -1.5, 0.0, 1.7, 2.8}) {
    CHECK(square_field_base(left, right, point1(x)) == 0.0);
  }
  auto coord = coordinate_taper(0, point1(-10.0), point1(10.0), 2.0);
  CHECK(square_field_base(coord, coord, point1(0.5)) == doctest::Approx(1.0));
}

TEST_CASE("lifted square field: identity outer collapses to the base field") {
  auto f = smooth_bump(point1(0.0), 2.0);
  CylinderFunction u(OuterFunction::identity(), {f});
  Configuration g(1);
  g.add(point1(0.5), 2);
  g.add(point1(-1.2));
  double expected = 0.0;
  for (const auto& a : g.atoms())
    expected += a.multiplicity * square_field_base(f, f, a.position);
  CHECK(square_field_lifted(u, u, g) == doctest::Approx(expected));
  CHECK(square_field_lifted(u, u, Configuration(1)) == 0.0);

  CylinderFunction c(OuterFunction::constant(1.0), {});
  CHECK(square_field_lifted(c, c, g) == 0.0);
}

TEST_CASE("lifted square field is local") {
  auto f = smooth_bump(point1(0.0), 1.0);
  CylinderFunction u(OuterFunction::arc_tangent(), {f});
  Configuration far(1);
  far.add(point1(5.0), 2);
  far.add(point1(-3.0));
  CHECK(square_field_lifted(u, u, far) == 0.0);
}

TEST_CASE("atomwise and chain-rule square fields agree") {
  auto pool = make_pool();
  Rng rng(777);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto& u = pool[rng.uniform_index(pool.size())];
    const auto& v = pool[rng.uniform_index(pool.size())];
    auto gamma = random_config_1d(rng, 6, -2.8, 2.8);
    double lifted = square_field_lifted(u, v, gamma);
    double atomwise = square_field_atomwise(u, v, gamma);
    CHECK(std::abs(lifted - atomwise) <= 1e-10);
    ++checked;
  }
  CHECK(checked == 200);

  // Single atom with identity outer reduces to the squared gradient norm.
  auto f = smooth_bump(point1(0.0), 2.0);
  CylinderFunction u(OuterFunction::identity(), {f});
  Configuration single(1);
  single.add(point1(0.7));
  auto grad = f.gradient(point1(0.7));
  CHECK(square_field_atomwise(u, u, single) ==
        doctest::Approx(grad[0] * grad[0]));
  CHECK(square_field_atomwise(u, u, Configuration(1)) == 0.0);
}

TEST_CASE("lifted square field is representation independent") {
  auto f = smooth_bump(point1(0.0), 2.0);
  CylinderFunction one(OuterFunction::identity(), {f});
  CylinderFunction two(OuterFunction::linear({1.0, 1.0}),
                       {scaled(f, 0.5), scaled(f, 0.5)});
  Rng rng(31337);
  for (int i = 0; i < 100; ++i) {
    auto gamma = random_config_1d(rng, 5, -2.5, 2.5);
    CHECK(std::abs(square_field_lifted(one, one, gamma) -
                   square_field_lifted(two, two, gamma)) <= 1e-10);
  }
}

TEST_CASE("cauchy-schwarz for the lifted square field") {
  auto pool = make_pool();
  Rng rng(4444);
  for (int trial = 0; trial < 150; ++trial) {
    const auto& u = pool[rng.uniform_index(pool.size())];
    const auto& v = pool[rng.uniform_index(pool.size())];
    auto gamma = random_config_1d(rng, 6, -2.8, 2.8);
    double uv = square_field_lifted(u, v, gamma);
    double uu = square_field_lifted(u, u, gamma);
    double vv = square_field_lifted(v, v, gamma);
    CHECK(uv * uv <= uu * vv + 1e-9);
  }
}

TEST_CASE("local lipschitz bound formula and pairwise contract") {
  CylinderFunction c(OuterFunction::constant(2.0), {});
  CHECK(local_lipschitz_bound(c, 5) == 0.0);

  CylinderFunction tent_u(OuterFunction::identity(), {mollified_tent()});
  CHECK(local_lipschitz_bound(tent_u, 2) == doctest::Approx(2.0));

  auto pool = make_pool();
  Rng rng(2025);
  const std::int64_t n_cap = 4;
  int violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto& u = pool[rng.uniform_index(pool.size())];
    double bound = local_lipschitz_bound(u, n_cap);
    auto box = common_support_box(u);
    int mass = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_cap)));
    auto gamma = testutil::random_configuration_with_mass(1, mass, rng, box.lo()[0],
                                                          box.hi()[0]);
    auto eta = testutil::random_configuration_with_mass(1, mass, rng, box.lo()[0],
                                                        box.hi()[0]);
    auto dd = d_upsilon(gamma, eta);
    REQUIRE_FALSE(dd.is_infinite());
    double lhs = std::abs(eval_cylinder(u, gamma) - eval_cylinder(u, eta));
    if (lhs > bound * dd.value() + 1e-9) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("non-lipschitz example meets its lower bound") {
  SUBCASE("single point, epsilon one") {
    auto ex = nonlip_example(1.0, 1);
    CHECK(ex.lower_bound == doctest::Approx(0.25));
    CHECK(square_field_lifted(ex.u, ex.u, ex.gamma) >= ex.lower_bound);
    CHECK(ex.gamma.total_mass() == 1);
  }
  SUBCASE("ten points at epsilon one tenth") {
    auto ex = nonlip_example(0.1, 10);
    CHECK(ex.lower_bound == doctest::Approx(2.5));
    CHECK(square_field_lifted(ex.u, ex.u, ex.gamma) >= ex.lower_bound);
  }
  SUBCASE("the bound grows linearly along epsilon = 1/n") {
    double prev = 0.0;
    for (int n : {4, 16, 64}) {
      auto ex = nonlip_example(1.0 / n, n);
      double gamma_field = square_field_lifted(ex.u, ex.u, ex.gamma);
      CHECK(ex.lower_bound == doctest::Approx(n / 4.0));
      CHECK(gamma_field >= ex.lower_bound);
      CHECK(gamma_field > prev);
      prev = gamma_field;
    }
  }
  SUBCASE("the example configuration sits where the tent has unit slope") {
    auto ex = nonlip_example(0.05, 12);
    auto tent = mollified_tent();
    for (const auto& a : ex.gamma.atoms()) {
      CHECK(a.position[0] > 2.0 - 0.05);
      CHECK(a.position[0] < 2.0);
      CHECK(std::abs(tent.gradient(a.position)[0]) == doctest::Approx(1.0));
      CHECK(tent.value(a.position) <= 0.05);
    }
    // Closed form: with s = f* gamma, the field is n / (1 + s^2)^2.
    double s = eval_star(tent, ex.gamma);
    double closed = 12.0 / std::pow(1.0 + s * s, 2.0);
    CHECK(square_field_lifted(ex.u, ex.u, ex.gamma) == doctest::Approx(closed));
  }
  CHECK_THROWS_AS(nonlip_example(0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(nonlip_example(1.5, 1), InvalidArgument);
  CHECK_THROWS_AS(nonlip_example(0.001, 1), InvalidArgument);
  CHECK_THROWS_AS(nonlip_example(0.5, 0), InvalidArgument);
}

TEST_CASE("slope estimate") {
  SUBCASE("constant functions have zero slope") {
    CylinderFunction c(OuterFunction::constant(1.5), {});
    Configuration g(1);
    g.add(point1(0.3));
    CHECK(slope_estimate(c, g, {1e-2, 1e-3}, 5, 1) == 0.0);
  }

  SUBCASE("one particle recovers the euclidean gradient norm") {
    auto f = smooth_bump(point1(0.0), 2.0);
    CylinderFunction u(OuterFunction::identity(), {f});
    Configuration g(1);
    g.add(point1(0.6));
    double expected = std::abs(f.gradient(point1(0.6))[0]);
    double est = slope_estimate(u, g, {1e-2, 1e-3}, 10, 7);
    CHECK(std::abs(est - expected) <= 0.05 * expected);
  }

  SUBCASE("slope squared is dominated by the square field") {
    auto pool = make_pool();
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
      const auto& u = pool[rng.uniform_index(pool.size())];
      // Distinct single-multiplicity atoms: the slope at configurations with
      // coincident atoms is not covered by the domination property.
      Configuration gamma(1);
      int atoms = 1 + static_cast<int>(rng.uniform_index(4));
      for (int i = 0; i < atoms; ++i) gamma.add(point1(rng.uniform(-2.8, 2.8)));
      double est = slope_estimate(u, gamma, {1e-3, 1e-4}, 8, 900 + trial);
      double field = square_field_lifted(u, u, gamma);
      CHECK(est * est <= field * 1.05 + 1e-9);
    }
  }

  SUBCASE("parameter validation") {
    CylinderFunction c(OuterFunction::constant(0.0), {});
    Configuration g(1);
    g.add(point1(0.0));
    CHECK_THROWS_AS(slope_estimate(c, g, {}, 3, 1), InvalidArgument);
    CHECK_THROWS_AS(slope_estimate(c, g, {1e-3, 1e-2}, 3, 1), InvalidArgument);
    CHECK_THROWS_AS(slope_estimate(c, g, {1e-2, 1e-3}, 0, 1), InvalidArgument);
  }
}

TEST_CASE("monte carlo dirichlet energy") {
  auto w = Window::box(point1(-3.0), point1(3.0));
  PointProcessModel model = PoissonModel{IntensityMeasure::uniform(w, 0.8)};

  SUBCASE("constants carry zero energy") {
    CylinderFunction c(OuterFunction::constant(4.0), {});
    auto r = energy_monte_carlo(c, c, model, 50, 5);
    CHECK(r.estimate == 0.0);
    CHECK(r.se == 0.0);
  }

  SUBCASE("identity outer matches the quadrature oracle") {
    auto f = smooth_bump(point1(0.0), 2.0);
    CylinderFunction u(OuterFunction::identity(), {f});
    auto r = energy_monte_carlo(u, u, model, 4000, 21);
    // E of the energy under a Poisson model is the intensity integral of
    // |grad f|^2 (a first-moment identity), computed here by quadrature.
    double oracle = integrate_box_simpson(
        point1(-3.0), point1(3.0), 2001, [&](const Point& x) {
          auto g = f.gradient(x);
          return 0.8 * g[0] * g[0];
        });
    CHECK(std::abs(r.estimate - oracle) <= 3.0 * r.se);
    CHECK(r.se > 0.0);
  }

  SUBCASE("energy is symmetric bit for bit") {
    auto f = smooth_bump(point1(0.0), 2.0);
    auto h = gaussian_bump(point1(0.5), 0.7, 2.0);
    CylinderFunction u(OuterFunction::arc_tangent(), {f});
    CylinderFunction v(OuterFunction::identity(), {h});
    auto uv = energy_monte_carlo(u, v, model, 500, 33);
    auto vu = energy_monte_carlo(v, u, model, 500, 33);
    CHECK(uv.estimate == vu.estimate);
    CHECK(uv.se == vu.se);
  }
}

TEST_CASE("construction validates gradients, bounds and supports") {
  auto support = Window::box(point1(-1.0), point1(1.0));

  // Wrong gradient.
  CHECK_THROWS_AS(
      SmoothTestFunction(
          "broken", [](const Point& p) { return std::sin(p[0]); },
          [](const Point& p) { return std::vector<double>{std::sin(p[0])}; },
          Window::box(point1(-8.0), point1(8.0)), 1.0),
      GradientMismatch);

  // Does not vanish outside its declared support.
  CHECK_THROWS_AS(SmoothTestFunction(
                      "leaky", [](const Point&) { return 1.0; },
                      [](const Point&) { return std::vector<double>{0.0}; },
                      support, 1.0),
                  InvalidArgument);

  // Understated Lipschitz constant.
  auto tent = mollified_tent();
  CHECK_THROWS_AS(
      SmoothTestFunction(
          "understated", [tent](const Point& p) { return tent.value(p); },
          [tent](const Point& p) { return tent.gradient(p); }, tent.support(),
          0.5),
      InvalidArgument);

  // Outer function with a wrong gradient.
  CHECK_THROWS_AS(
      OuterFunction("bad", 1,
                    [](const std::vector<double>& a) { return a[0] * a[0]; },
                    [](const std::vector<double>&) {
                      return std::vector<double>{1.0};
                    },
                    100.0, 100.0),
      GradientMismatch);

  // Inner count must match the outer arity.
  CHECK_THROWS_AS(CylinderFunction(OuterFunction::identity(), {}), InvalidArgument);
}

TEST_CASE("built-in test functions have the advertised shape") {
  auto tent = mollified_tent();
  CHECK(tent.value(point1(0.0)) == 1.0);
  CHECK(tent.value(point1(1.5)) == doctest::Approx(0.5));
  CHECK(tent.value(point1(-1.5)) == doctest::Approx(0.5));
  CHECK(tent.value(point1(2.5)) == 0.0);
  CHECK(tent.gradient(point1(1.5))[0] == doctest::Approx(-1.0));
  CHECK(tent.gradient(point1(-1.5))[0] == doctest::Approx(1.0));
  CHECK(tent.lip_const() == 1.0);
  for (int i = 0; i <= 6000; ++i) {
    double t = -3.0 + i / 1000.0;
    CHECK(std::abs(tent.gradient(point1(t))[0]) <= 1.0 + 1e-12);
  }

  auto bump2 = smooth_bump(Point({0.0, 0.0}), 1.5, 2.0);
  CHECK(bump2.value(Point({0.0, 0.0})) == doctest::Approx(2.0));
  CHECK(bump2.value(Point({1.5, 0.0})) == 0.0);
  CHECK(bump2.dim() == 2);

  auto gb = gaussian_bump(point1(0.0), 0.6, 2.0);
  CHECK(gb.value(point1(0.0)) == doctest::Approx(1.0));
  CHECK(gb.value(point1(2.0)) == 0.0);
  CHECK(gb.value(point1(1.0)) == doctest::Approx(std::exp(-1.0 / (2.0 * 0.36))));
}
