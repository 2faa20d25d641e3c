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

#ifndef CONFIGLAB_CORE_CYLINDER_HPP_
#define CONFIGLAB_CORE_CYLINDER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "point_config.hpp"
#include "samplers.hpp"

namespace configlab {

// A compactly supported C^1 test function on the ambient space with a
// hand-supplied gradient.  Construction validates the gradient against
// central finite differences (step 1e-4, tolerance 1e-5) at 100 points drawn
// from a fixed internal seed, checks |grad| <= lip_const + 1e-9 at those
// points, and checks that value and gradient vanish at sampled points
// outside the support.
class SmoothTestFunction {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using GradientFn = std::function<std::vector<double>(const Point&)>;

  SmoothTestFunction(std::string name, ValueFn value, GradientFn gradient,
                     Window support, double lip_const);

  const std::string& name() const { return name_; }
  int dim() const { return support_.dim(); }
  const Window& support() const { return support_; }
  double lip_const() const { return lip_; }

  double value(const Point& p) const { return value_(p); }
  std::vector<double> gradient(const Point& p) const { return gradient_(p); }

 private:
  std::string name_;
  ValueFn value_;
  GradientFn gradient_;
  Window support_;
  double lip_;
};

// The outer function F: R^k -> R of a cylinder function, with a declared
// uniform bound and Lipschitz constant.  Validation mirrors the test
// function validation on the box [-8, 8]^k.
class OuterFunction {
 public:
  using ValueFn = std::function<double(const std::vector<double>&)>;
  using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;

  OuterFunction(std::string name, int arity, ValueFn value, GradientFn gradient,
                double lip_const, double sup_bound);

  static OuterFunction constant(double c);
  static OuterFunction identity();
  static OuterFunction arc_tangent();
  static OuterFunction linear(const std::vector<double>& coefficients);

  const std::string& name() const { return name_; }
  int arity() const { return arity_; }
  double lip_const() const { return lip_; }
  double sup_bound() const { return sup_; }

  double value(const std::vector<double>& a) const { return value_(a); }
  std::vector<double> gradient(const std::vector<double>& a) const {
    return gradient_(a);
  }

 private:
  std::string name_;
  int arity_ = 0;
  ValueFn value_;
  GradientFn gradient_;
  double lip_ = 0.0;
  double sup_ = 0.0;
};

// u(gamma) = F(f_1* gamma, ..., f_k* gamma).  k = 0 is a constant.
class CylinderFunction {
 public:
  CylinderFunction(OuterFunction outer, std::vector<SmoothTestFunction> inner);

  const OuterFunction& outer() const { return outer_; }
  const std::vector<SmoothTestFunction>& inner() const { return inner_; }
  int arity() const { return outer_.arity(); }
  // Ambient dimension; meaningful only when arity >= 1.
  int dim() const;
  std::string name() const;

 private:
  OuterFunction outer_;
  std::vector<SmoothTestFunction> inner_;
};

// gamma f = sum of f over the points of gamma with multiplicity.
double eval_star(const SmoothTestFunction& f, const Configuration& gamma);

double eval_cylinder(const CylinderFunction& u, const Configuration& gamma);

// Base square field on the ambient space: grad f . grad g at x.
double square_field_base(const SmoothTestFunction& f, const SmoothTestFunction& g,
                         const Point& x);

// Lifted square field by the chain rule:
//   sum_{i,j} dF_i(f* gamma) dG_j(g* gamma) * (grad f_i . grad g_j)* gamma.
// The double sum is accumulated in both orders and averaged, which makes the
// result bit-identical under swapping u and v.
double square_field_lifted(const CylinderFunction& u, const CylinderFunction& v,
                           const Configuration& gamma);

// The per-atom form: for each atom x, differentiate y -> u(gamma with x's
// mass moved to y) at y = x, pair it with the same derivative of v, and sum
// with weights 1/multiplicity.  Agrees with square_field_lifted.
double square_field_atomwise(const CylinderFunction& u, const CylinderFunction& v,
                             const Configuration& gamma);

// sqrt(n) * C_u with C_u = sqrt(2) * sqrt(k) * Lip(F) * max_i lip(f_i); a
// Lipschitz constant for u between equal-mass configurations holding at most
// n points in the common support box.
double local_lipschitz_bound(const CylinderFunction& u, std::int64_t n);

// Bounding box containing every inner support of u; requires arity >= 1.
Window common_support_box(const CylinderFunction& u);

// A cylinder function that is not Lipschitz for the transportation distance:
// arc tangent of the star-lift of a mollified tent, together with an
// n-point configuration on which the lifted square field is at least
// n / (1 + eps^2 n^2)^2.
struct NonLipschitzExample {
  CylinderFunction u;
  Configuration gamma;
  double lower_bound = 0.0;
};
NonLipschitzExample nonlip_example(double epsilon, int n);

// The mollified tent used by the example: 1 on [-1,1], slopes +-1 down to 0
// at +-2, with C^1 quadratic blends of half-width 1e-3 at the kinks; support
// box (-3, 3).
SmoothTestFunction mollified_tent();

// Radial bump h * exp(1 - 1/(1 - t^2)) with t = |x - center| / radius.
SmoothTestFunction smooth_bump(const Point& center, double radius, double height = 1.0);

// Gaussian h * exp(-|x - center|^2 / (2 sigma^2)) tapered to zero between
// 0.7 * radius and radius by a quintic smoothstep.
SmoothTestFunction gaussian_bump(const Point& center, double sigma, double radius,
                                 double height = 1.0);

// Approximately x_axis on the core of the box [lo, hi], brought to zero near
// the boundary by quintic smoothstep ramps of the given margin.
SmoothTestFunction coordinate_taper(int axis, const Point& lo, const Point& hi,
                                    double margin);

// Same function scaled by c.
SmoothTestFunction scaled(const SmoothTestFunction& f, double c);

// max over probe perturbations of |u(gamma) - u(eta)| / d(gamma, eta), where
// eta moves every point of gamma by a vector of norm at most the radius; the
// estimate at the smallest radius is returned.  Probes include two
// gradient-aligned perturbations and random ones.
double slope_estimate(const CylinderFunction& u, const Configuration& gamma,
                      const std::vector<double>& radii, int probes_per_radius,
                      std::uint64_t seed);

// Sample mean and standard error of the lifted square field under the model.
struct EnergyEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::int64_t n_samples = 0;
};
EnergyEstimate energy_monte_carlo(const CylinderFunction& u,
                                  const CylinderFunction& v,
                                  const PointProcessModel& model,
                                  std::int64_t n_samples, std::uint64_t seed);

}  // namespace configlab

#endif  // CONFIGLAB_CORE_CYLINDER_HPP_
