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

#include "cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "rng.hpp"
#include "stats.hpp"
#include "transport.hpp"

namespace configlab {

namespace {

constexpr double kFdStep = 1e-4;
constexpr double kFdTol = 1e-5;
constexpr double kLipSlack = 1e-9;
constexpr int kValidationPoints = 100;
constexpr std::uint64_t kValidationSeed = 0x5eedc0de2026ULL;

// Half-width of the quadratic blends that round off the tent's kinks.  The
// blends are exact quadratics, so the central-difference gradient check is
// exact inside them as long as the step stays below this width.
constexpr double kTentBlend = 1e-3;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Quintic smoothstep: C^2, rises 0 -> 1 on [0, 1], clamped outside.
double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

}  // namespace

SmoothTestFunction::SmoothTestFunction(std::string name, ValueFn value,
                                       GradientFn gradient, Window support,
                                       double lip_const)
    : name_(std::move(name)),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      support_(std::move(support)),
      lip_(lip_const) {
  if (!value_ || !gradient_)
    throw InvalidArgument("SmoothTestFunction: null value or gradient");
  if (!(lip_ >= 0.0) || !std::isfinite(lip_))
    throw InvalidArgument("SmoothTestFunction: lip_const must be a nonnegative real");

  const int d = support_.dim();
  const auto [lo, hi] = support_.bounding_box();
  Rng rng = Rng::derived(kValidationSeed, static_cast<std::uint64_t>(d));
  for (int trial = 0; trial < kValidationPoints; ++trial) {
    Point p(std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (int k = 0; k < d; ++k) {
      double mid = 0.5 * (lo[k] + hi[k]);
      double half = 0.5 * (hi[k] - lo[k]);
      p[k] = mid + (2.0 * rng.uniform01() - 1.0) * 1.5 * half;
    }
    double v = value_(p);
    std::vector<double> g = gradient_(p);
    if (g.size() != static_cast<std::size_t>(d))
      throw GradientMismatch(name_ + ": gradient has the wrong dimension");

    if (!support_.contains(p)) {
      bool zero = v == 0.0;
      for (double gk : g) zero = zero && gk == 0.0;
      if (!zero)
        throw InvalidArgument(name_ + ": value or gradient nonzero outside the support");
    }

    Point shifted = p;
    for (int k = 0; k < d; ++k) {
      shifted[k] = p[k] + kFdStep;
      double up = value_(shifted);
      shifted[k] = p[k] - kFdStep;
      double down = value_(shifted);
      shifted[k] = p[k];
      double fd = (up - down) / (2.0 * kFdStep);
      if (std::abs(g[static_cast<std::size_t>(k)] - fd) > kFdTol)
        throw GradientMismatch(name_ + ": gradient disagrees with finite differences");
    }
    if (norm(g) > lip_ + kLipSlack)
      throw InvalidArgument(name_ + ": gradient norm exceeds the declared lip_const");
  }
}

OuterFunction::OuterFunction(std::string name, int arity, ValueFn value,
                             GradientFn gradient, double lip_const, double sup_bound)
    : name_(std::move(name)),
      arity_(arity),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      lip_(lip_const),
      sup_(sup_bound) {
  if (arity_ < 0) throw InvalidArgument("OuterFunction: negative arity");
  if (!value_ || !gradient_)
    throw InvalidArgument("OuterFunction: null value or gradient");
  if (!(lip_ >= 0.0) || !(sup_ >= 0.0))
    throw InvalidArgument("OuterFunction: bounds must be nonnegative");

  if (arity_ == 0) {
    if (std::abs(value_({})) > sup_ + kLipSlack)
      throw InvalidArgument(name_ + ": constant exceeds its declared bound");
    return;
  }
  Rng rng = Rng::derived(kValidationSeed, 1000 + static_cast<std::uint64_t>(arity_));
  std::vector<double> a(static_cast<std::size_t>(arity_), 0.0);
  for (int trial = 0; trial < kValidationPoints; ++trial) {
    for (auto& c : a) c = rng.uniform(-8.0, 8.0);
    double v = value_(a);
    std::vector<double> g = gradient_(a);
    if (g.size() != a.size())
      throw GradientMismatch(name_ + ": gradient has the wrong dimension");
    if (std::abs(v) > sup_ + kLipSlack)
      throw InvalidArgument(name_ + ": value exceeds the declared sup bound");
    for (std::size_t k = 0; k < a.size(); ++k) {
      double keep = a[k];
      a[k] = keep + kFdStep;
      double up = value_(a);
      a[k] = keep - kFdStep;
      double down = value_(a);
      a[k] = keep;
      double fd = (up - down) / (2.0 * kFdStep);
      if (std::abs(g[k] - fd) > kFdTol)
        throw GradientMismatch(name_ + ": gradient disagrees with finite differences");
    }
    if (norm(g) > lip_ + kLipSlack)
      throw InvalidArgument(name_ + ": gradient norm exceeds the declared lip_const");
  }
}

OuterFunction OuterFunction::constant(double c) {
  return OuterFunction(
      "const", 0, [c](const std::vector<double>&) { return c; },
      [](const std::vector<double>&) { return std::vector<double>{}; }, 0.0,
      std::abs(c));
}

OuterFunction OuterFunction::identity() {
  return OuterFunction(
      "id", 1, [](const std::vector<double>& a) { return a[0]; },
      [](const std::vector<double>&) { return std::vector<double>{1.0}; }, 1.0, 8.0);
}

OuterFunction OuterFunction::arc_tangent() {
  return OuterFunction(
      "atan", 1, [](const std::vector<double>& a) { return std::atan(a[0]); },
      [](const std::vector<double>& a) {
        return std::vector<double>{1.0 / (1.0 + a[0] * a[0])};
      },
      1.0, 1.5707963267948966);
}

OuterFunction OuterFunction::linear(const std::vector<double>& coefficients) {
  if (coefficients.empty()) throw InvalidArgument("OuterFunction::linear: no coefficients");
  double l2 = 0.0;
  double l1 = 0.0;
  for (double c : coefficients) {
    l2 += c * c;
    l1 += std::abs(c);
  }
  auto coeffs = coefficients;
  return OuterFunction(
      "linear", static_cast<int>(coefficients.size()),
      [coeffs](const std::vector<double>& a) {
        double s = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * a[i];
        return s;
      },
      [coeffs](const std::vector<double>&) { return coeffs; }, std::sqrt(l2),
      8.0 * l1);
}

CylinderFunction::CylinderFunction(OuterFunction outer,
                                   std::vector<SmoothTestFunction> inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
  if (static_cast<int>(inner_.size()) != outer_.arity())
    throw InvalidArgument("CylinderFunction: arity does not match the inner count");
  for (std::size_t i = 1; i < inner_.size(); ++i)
    if (inner_[i].dim() != inner_[0].dim())
      throw DimensionMismatch("CylinderFunction: inner functions disagree on dimension");
}

int CylinderFunction::dim() const {
  if (inner_.empty())
    throw InvalidArgument("CylinderFunction: a constant has no ambient dimension");
  return inner_[0].dim();
}

std::string CylinderFunction::name() const {
  std::string out = outer_.name() + "(";
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    if (i) out += ",";
    out += inner_[i].name();
  }
  return out + ")";
}

double eval_star(const SmoothTestFunction& f, const Configuration& gamma) {
  if (f.dim() != gamma.dim())
    throw DimensionMismatch("eval_star: dimension mismatch");
  double s = 0.0;
  for (const auto& a : gamma.atoms()) s += a.multiplicity * f.value(a.position);
  return s;
}

double eval_cylinder(const CylinderFunction& u, const Configuration& gamma) {
  std::vector<double> args;
  args.reserve(u.inner().size());
  for (const auto& f : u.inner()) args.push_back(eval_star(f, gamma));
  return u.outer().value(args);
}

double square_field_base(const SmoothTestFunction& f, const SmoothTestFunction& g,
                         const Point& x) {
  if (f.dim() != g.dim() || f.dim() != x.dim())
    throw DimensionMismatch("square_field_base: dimension mismatch");
  return dot(f.gradient(x), g.gradient(x));
}

namespace {

// Star arguments, outer gradient there, and per-atom inner gradients.
struct LiftedParts {
  std::vector<double> outer_grad;                       // k
  std::vector<std::vector<std::vector<double>>> grads;  // k x atoms x d
};

LiftedParts lifted_parts(const CylinderFunction& u, const Configuration& gamma) {
  LiftedParts parts;
  std::vector<double> args;
  args.reserve(u.inner().size());
  for (const auto& f : u.inner()) args.push_back(eval_star(f, gamma));
  parts.outer_grad = u.outer().gradient(args);
  parts.grads.resize(u.inner().size());
  for (std::size_t i = 0; i < u.inner().size(); ++i) {
    parts.grads[i].reserve(gamma.atoms().size());
    for (const auto& a : gamma.atoms())
      parts.grads[i].push_back(u.inner()[i].gradient(a.position));
  }
  return parts;
}

void check_field_dims(const CylinderFunction& u, const CylinderFunction& v,
                      const Configuration& gamma) {
  if (u.arity() > 0 && u.dim() != gamma.dim())
    throw DimensionMismatch("square field: dimension mismatch");
  if (v.arity() > 0 && v.dim() != gamma.dim())
    throw DimensionMismatch("square field: dimension mismatch");
}

}  // namespace

double square_field_lifted(const CylinderFunction& u, const CylinderFunction& v,
                           const Configuration& gamma) {
  check_field_dims(u, v, gamma);
  if (u.arity() == 0 || v.arity() == 0 || gamma.empty()) return 0.0;

  LiftedParts pu = lifted_parts(u, gamma);
  LiftedParts pv = lifted_parts(v, gamma);
  const auto& atoms = gamma.atoms();
  const std::size_t ku = pu.outer_grad.size();
  const std::size_t kv = pv.outer_grad.size();

  // Term matrix of the double sum.  Row-major and column-major accumulations
  // are averaged so that swapping u and v gives the bit-identical result.
  std::vector<std::vector<double>> term(ku, std::vector<double>(kv, 0.0));
  for (std::size_t i = 0; i < ku; ++i)
    for (std::size_t j = 0; j < kv; ++j) {
      double star = 0.0;
      for (std::size_t a = 0; a < atoms.size(); ++a)
        star += atoms[a].multiplicity * dot(pu.grads[i][a], pv.grads[j][a]);
      term[i][j] = pu.outer_grad[i] * pv.outer_grad[j] * star;
    }
  double row_major = 0.0;
  for (std::size_t i = 0; i < ku; ++i)
    for (std::size_t j = 0; j < kv; ++j) row_major += term[i][j];
  double col_major = 0.0;
  for (std::size_t j = 0; j < kv; ++j)
    for (std::size_t i = 0; i < ku; ++i) col_major += term[i][j];
  return 0.5 * (row_major + col_major);
}

double square_field_atomwise(const CylinderFunction& u, const CylinderFunction& v,
                             const Configuration& gamma) {
  check_field_dims(u, v, gamma);
  if (u.arity() == 0 || v.arity() == 0 || gamma.empty()) return 0.0;

  LiftedParts pu = lifted_parts(u, gamma);
  LiftedParts pv = lifted_parts(v, gamma);
  const auto& atoms = gamma.atoms();
  const auto d = static_cast<std::size_t>(gamma.dim());

  double total = 0.0;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const double m = atoms[a].multiplicity;
    // Derivative of y -> u(gamma with all of this atom's mass moved to y),
    // taken at y = the atom itself; the mass relocation scales it by m.
    std::vector<double> du(d, 0.0), dv(d, 0.0);
    for (std::size_t i = 0; i < pu.outer_grad.size(); ++i)
      for (std::size_t k = 0; k < d; ++k)
        du[k] += pu.outer_grad[i] * m * pu.grads[i][a][k];
    for (std::size_t j = 0; j < pv.outer_grad.size(); ++j)
      for (std::size_t k = 0; k < d; ++k)
        dv[k] += pv.outer_grad[j] * m * pv.grads[j][a][k];
    total += dot(du, dv) / m;
  }
  return total;
}

double local_lipschitz_bound(const CylinderFunction& u, std::int64_t n) {
  if (n < 1) throw InvalidArgument("local_lipschitz_bound: n must be positive");
  if (u.arity() == 0) return 0.0;
  double max_lip = 0.0;
  for (const auto& f : u.inner()) max_lip = std::max(max_lip, f.lip_const());
  double c_u = std::sqrt(2.0) * std::sqrt(static_cast<double>(u.arity())) *
               u.outer().lip_const() * max_lip;
  return std::sqrt(static_cast<double>(n)) * c_u;
}

Window common_support_box(const CylinderFunction& u) {
  if (u.arity() == 0)
    throw InvalidArgument("common_support_box: constant cylinder function");
  auto [lo, hi] = u.inner()[0].support().bounding_box();
  for (const auto& f : u.inner()) {
    auto [flo, fhi] = f.support().bounding_box();
    for (int k = 0; k < u.dim(); ++k) {
      lo[k] = std::min(lo[k], flo[k]);
      hi[k] = std::max(hi[k], fhi[k]);
    }
  }
  return Window::box(lo, hi);
}

SmoothTestFunction mollified_tent() {
  const double w = kTentBlend;
  auto profile = [w](double s) {
    if (s <= 1.0 - w) return 1.0;
    if (s < 1.0 + w) {
      double t = s - (1.0 - w);
      return 1.0 - t * t / (4.0 * w);
    }
    if (s <= 2.0 - w) return 2.0 - s;
    if (s < 2.0 + w) {
      double t = 2.0 + w - s;
      return t * t / (4.0 * w);
    }
    return 0.0;
  };
  auto profile_slope = [w](double s) {
    if (s <= 1.0 - w) return 0.0;
    if (s < 1.0 + w) return -(s - (1.0 - w)) / (2.0 * w);
    if (s <= 2.0 - w) return -1.0;
    if (s < 2.0 + w) return -(2.0 + w - s) / (2.0 * w);
    return 0.0;
  };
  return SmoothTestFunction(
      "nonlip_tent",
      [profile](const Point& p) { return profile(std::abs(p[0])); },
      [profile_slope](const Point& p) {
        double sgn = p[0] < 0.0 ? -1.0 : 1.0;
        return std::vector<double>{sgn * profile_slope(std::abs(p[0]))};
      },
      Window::box(point1(-3.0), point1(3.0)), 1.0);
}

namespace {

double bump_profile(double t) {
  if (t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

// max |d/dt bump_profile| over [0, 1), found once by a dense scan.
double bump_profile_max_slope() {
  static const double value = [] {
    double best = 0.0;
    for (int i = 1; i < 200000; ++i) {
      double t = i / 200000.0;
      double om = 1.0 - t * t;
      double slope = std::abs(-2.0 * t / (om * om) * bump_profile(t));
      best = std::max(best, slope);
    }
    return best * 1.0001;
  }();
  return value;
}

}  // namespace

SmoothTestFunction smooth_bump(const Point& center, double radius, double height) {
  if (!(radius > 0.0)) throw InvalidArgument("smooth_bump: radius must be positive");
  if (!std::isfinite(height)) throw InvalidArgument("smooth_bump: bad height");
  const int d = center.dim();
  auto c = center;
  double lip = std::abs(height) / radius * bump_profile_max_slope();
  char label[64];
  std::snprintf(label, sizeof label, "bump_r%g", radius);
  return SmoothTestFunction(
      label,
      [c, radius, height](const Point& p) {
        double t = distance(p, c) / radius;
        return height * bump_profile(t);
      },
      [c, radius, height, d](const Point& p) {
        std::vector<double> g(static_cast<std::size_t>(d), 0.0);
        double t = distance(p, c) / radius;
        if (t >= 1.0) return g;
        double om = 1.0 - t * t;
        double coeff = height * (-2.0 / (radius * radius * om * om)) * bump_profile(t);
        for (int k = 0; k < d; ++k) g[static_cast<std::size_t>(k)] = coeff * (p[k] - c[k]);
        return g;
      },
      Window::ball(center, radius), lip);
}

SmoothTestFunction gaussian_bump(const Point& center, double sigma, double radius,
                                 double height) {
  if (!(sigma > 0.0) || !(radius > 0.0))
    throw InvalidArgument("gaussian_bump: sigma and radius must be positive");
  const int d = center.dim();
  auto c = center;
  const double taper_start = 0.7;
  auto radial = [sigma, radius, height, taper_start](double s) {
    double t = s / radius;
    if (t >= 1.0) return 0.0;
    double gauss = std::exp(-s * s / (2.0 * sigma * sigma));
    double taper =
        t <= taper_start ? 1.0 : 1.0 - smoothstep((t - taper_start) / (1.0 - taper_start));
    return height * gauss * taper;
  };
  auto radial_slope = [sigma, radius, height, taper_start](double s) {
    double t = s / radius;
    if (t >= 1.0) return 0.0;
    double gauss = std::exp(-s * s / (2.0 * sigma * sigma));
    double taper = 1.0;
    double taper_slope = 0.0;
    if (t > taper_start) {
      double arg = (t - taper_start) / (1.0 - taper_start);
      taper = 1.0 - smoothstep(arg);
      taper_slope = -smoothstep_deriv(arg) / ((1.0 - taper_start) * radius);
    }
    return height * gauss * (-s / (sigma * sigma) * taper + taper_slope);
  };
  double lip = [&] {
    double best = 0.0;
    for (int i = 0; i <= 100000; ++i)
      best = std::max(best, std::abs(radial_slope(i * radius / 100000.0)));
    return best * 1.0001;
  }();
  char label[64];
  std::snprintf(label, sizeof label, "gauss_s%g", sigma);
  return SmoothTestFunction(
      label, [c, radial](const Point& p) { return radial(distance(p, c)); },
      [c, radial_slope, d](const Point& p) {
        std::vector<double> g(static_cast<std::size_t>(d), 0.0);
        double s = distance(p, c);
        if (s == 0.0) return g;
        double coeff = radial_slope(s) / s;
        for (int k = 0; k < d; ++k) g[static_cast<std::size_t>(k)] = coeff * (p[k] - c[k]);
        return g;
      },
      Window::ball(center, radius), lip);
}

SmoothTestFunction coordinate_taper(int axis, const Point& lo, const Point& hi,
                                    double margin) {
  const int d = lo.dim();
  if (hi.dim() != d || axis < 0 || axis >= d)
    throw InvalidArgument("coordinate_taper: bad axis or box");
  if (!(margin > 0.0)) throw InvalidArgument("coordinate_taper: margin must be positive");
  for (int k = 0; k < d; ++k)
    if (!(hi[k] - lo[k] > 2.0 * margin))
      throw InvalidArgument("coordinate_taper: margins overlap");

  auto ramp = [margin](double x, double a, double b) {
    return smoothstep((x - a) / margin) * smoothstep((b - x) / margin);
  };
  auto ramp_slope = [margin](double x, double a, double b) {
    return smoothstep_deriv((x - a) / margin) / margin * smoothstep((b - x) / margin) -
           smoothstep((x - a) / margin) * smoothstep_deriv((b - x) / margin) / margin;
  };

  auto lov = lo;
  auto hiv = hi;
  double coord_bound = std::max(std::abs(lo[axis]), std::abs(hi[axis]));
  double slope_bound = 1.875 / margin;
  double lip = std::sqrt(std::pow(1.0 + coord_bound * slope_bound, 2.0) +
                         (d - 1) * std::pow(coord_bound * slope_bound, 2.0));
  char label[32];
  std::snprintf(label, sizeof label, "coord%d", axis);
  return SmoothTestFunction(
      label,
      [axis, lov, hiv, ramp, d](const Point& p) {
        double prod = 1.0;
        for (int k = 0; k < d; ++k) prod *= ramp(p[k], lov[k], hiv[k]);
        return p[axis] * prod;
      },
      [axis, lov, hiv, ramp, ramp_slope, d](const Point& p) {
        std::vector<double> r(static_cast<std::size_t>(d));
        double prod = 1.0;
        for (int k = 0; k < d; ++k) {
          r[static_cast<std::size_t>(k)] = ramp(p[k], lov[k], hiv[k]);
          prod *= r[static_cast<std::size_t>(k)];
        }
        std::vector<double> g(static_cast<std::size_t>(d), 0.0);
        for (int k = 0; k < d; ++k) {
          double others = 1.0;
          for (int j = 0; j < d; ++j)
            if (j != k) others *= r[static_cast<std::size_t>(j)];
          g[static_cast<std::size_t>(k)] =
              p[axis] * ramp_slope(p[k], lov[k], hiv[k]) * others;
        }
        g[static_cast<std::size_t>(axis)] += prod;
        return g;
      },
      Window::box(lo, hi), lip);
}

SmoothTestFunction scaled(const SmoothTestFunction& f, double c) {
  if (!std::isfinite(c)) throw InvalidArgument("scaled: bad factor");
  auto value = [f, c](const Point& p) { return c * f.value(p); };
  auto gradient = [f, c](const Point& p) {
    auto g = f.gradient(p);
    for (double& v : g) v *= c;
    return g;
  };
  char label[80];
  std::snprintf(label, sizeof label, "%g*%s", c, f.name().c_str());
  return SmoothTestFunction(label, value, gradient, f.support(),
                            std::abs(c) * f.lip_const());
}

NonLipschitzExample nonlip_example(double epsilon, int n) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw InvalidArgument("nonlip_example: need 0 < epsilon <= 1");
  if (epsilon < 0.01)
    throw InvalidArgument(
        "nonlip_example: epsilon below 0.01 is thinner than the tent mollification");
  if (n < 1) throw InvalidArgument("nonlip_example: n must be positive");

  NonLipschitzExample out{
      CylinderFunction(OuterFunction::arc_tangent(), {mollified_tent()}),
      Configuration(1), 0.0};
  // n points inside (2 - eps + w, 2 - w): the tent there has values in
  // (0, eps) and slope exactly -1.
  const double w = kTentBlend;
  const double span = epsilon - 2.0 * w;
  for (int j = 1; j <= n; ++j)
    out.gamma.add(point1(2.0 - w - j * span / (n + 1)));
  double en = epsilon * epsilon * static_cast<double>(n) * n;
  out.lower_bound = static_cast<double>(n) / ((1.0 + en) * (1.0 + en));
  return out;
}

double slope_estimate(const CylinderFunction& u, const Configuration& gamma,
                      const std::vector<double>& radii, int probes_per_radius,
                      std::uint64_t seed) {
  if (radii.empty()) throw InvalidArgument("slope_estimate: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InvalidArgument("slope_estimate: radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1]))
      throw InvalidArgument("slope_estimate: radii must be strictly decreasing");
  }
  if (probes_per_radius < 1)
    throw InvalidArgument("slope_estimate: probes_per_radius must be >= 1");
  if (gamma.empty()) return 0.0;

  const auto d = static_cast<std::size_t>(gamma.dim());
  const std::vector<Point> base = gamma.expanded();
  const double u_at_gamma = eval_cylinder(u, gamma);

  // Per-point derivative direction of u, for the gradient-aligned probes.
  std::vector<std::vector<double>> dir(base.size(), std::vector<double>(d, 0.0));
  double max_norm = 0.0;
  if (u.arity() > 0) {
    std::vector<double> args;
    for (const auto& f : u.inner()) args.push_back(eval_star(f, gamma));
    std::vector<double> og = u.outer().gradient(args);
    for (std::size_t p = 0; p < base.size(); ++p) {
      for (std::size_t i = 0; i < og.size(); ++i) {
        auto g = u.inner()[i].gradient(base[p]);
        for (std::size_t k = 0; k < d; ++k) dir[p][k] += og[i] * g[k];
      }
      max_norm = std::max(max_norm, norm(dir[p]));
    }
  }

  Rng rng(seed);
  double result = 0.0;
  for (double r : radii) {
    double best = 0.0;
    auto try_probe = [&](const std::vector<std::vector<double>>& delta) {
      Configuration eta(gamma.dim());
      for (std::size_t p = 0; p < base.size(); ++p) {
        Point moved = base[p];
        for (std::size_t k = 0; k < d; ++k) moved[k] += delta[p][k];
        eta.add(moved);
      }
      transport::ExtendedDistance dd = transport::d_upsilon(gamma, eta);
      if (dd.is_infinite() || dd.value() == 0.0) return;
      best = std::max(best, std::abs(u_at_gamma - eval_cylinder(u, eta)) / dd.value());
    };

    if (max_norm > 0.0) {
      std::vector<std::vector<double>> aligned(base.size(), std::vector<double>(d, 0.0));
      for (std::size_t p = 0; p < base.size(); ++p)
        for (std::size_t k = 0; k < d; ++k) aligned[p][k] = r * dir[p][k] / max_norm;
      try_probe(aligned);
      for (auto& row : aligned)
        for (double& v : row) v = -v;
      try_probe(aligned);
    }
    for (int probe = 0; probe < probes_per_radius; ++probe) {
      std::vector<std::vector<double>> delta(base.size(), std::vector<double>(d, 0.0));
      for (auto& row : delta) {
        double len = 0.0;
        do {
          for (double& v : row) v = rng.normal();
          len = std::sqrt(dot(row, row));
        } while (len == 0.0);
        double target = r * rng.uniform01();
        for (double& v : row) v *= target / len;
      }
      try_probe(delta);
    }
    result = best;
  }
  return result;
}

EnergyEstimate energy_monte_carlo(const CylinderFunction& u,
                                  const CylinderFunction& v,
                                  const PointProcessModel& model,
                                  std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw InvalidArgument("energy_monte_carlo: need at least two samples");
  if (u.arity() > 0 && u.dim() != model_dim(model))
    throw DimensionMismatch("energy_monte_carlo: dimension mismatch");
  if (v.arity() > 0 && v.dim() != model_dim(model))
    throw DimensionMismatch("energy_monte_carlo: dimension mismatch");

  ModelSampler sampler(model, seed);
  std::vector<double> vals(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 0; i < n_samples; ++i)
    vals[static_cast<std::size_t>(i)] = square_field_lifted(u, v, sampler.next());
  auto ms = stats::mean_stderr(vals);
  return EnergyEstimate{ms.mean, ms.se, n_samples};
}

}  // namespace configlab
