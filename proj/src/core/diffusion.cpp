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

#include "diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "errors.hpp"
#include "stats.hpp"

namespace configlab::diffusion {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Stream layout per operation seed: tags below 0x10000 feed samplers and
// nested estimators, 0x10000 + i is the path stream of sample i in
// single-grid operations, and (row + 1) * kRowStride + i is the path stream
// of pool member i under grid row `row`.  Pool sizes are validated against
// kRowStride so the ranges cannot collide.
constexpr std::uint64_t kPathStreamBase = 0x10000;
constexpr std::uint64_t kRowStride = 0x4000000;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag + 0x7f4a7c15ULL));
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

const IntensityMeasure* model_intensity(const PointProcessModel& model) {
  if (const auto* p = std::get_if<PoissonModel>(&model)) return &p->intensity;
  if (const auto* p = std::get_if<MixedPoissonModel>(&model)) {
    return &p->intensity;
  }
  if (const auto* p = std::get_if<GibbsModel>(&model)) return &p->intensity;
  return nullptr;
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool same_window(const Window& a, const Window& b) {
  if (a.kind() != b.kind() || a.dim() != b.dim()) return false;
  if (a.kind() == Window::Kind::Box) {
    return a.lo() == b.lo() && a.hi() == b.hi();
  }
  return a.center() == b.center() && a.radius() == b.radius();
}

const char* event_kind_name(const EventSet& event) {
  return std::visit(
      overloaded{[](const Concentration&) { return "Concentration"; },
                 [](const LambdaSet&) { return "LambdaSet"; },
                 [](const DistanceBall&) { return "DistanceBall"; },
                 [](const CustomEvent&) { return "Custom"; }},
      event);
}

void validate_event(const EventSet& event, int dim) {
  std::visit(
      overloaded{
          [&](const Concentration& c) {
            if (c.region.dim() != dim) {
              throw DimensionMismatch(
                  "event: concentration region dimension mismatch");
            }
            if (c.n < 0) {
              throw InvalidArgument("event: concentration count must be >= 0");
            }
          },
          [&](const LambdaSet& l) {
            if (l.u_window.dim() != dim || l.gamma_ref.dim() != dim) {
              throw DimensionMismatch("event: lambda set dimension mismatch");
            }
            if (!(l.tolerance >= 0.0) || !std::isfinite(l.tolerance)) {
              throw InvalidArgument(
                  "event: lambda set tolerance must be finite and >= 0");
            }
          },
          [&](const DistanceBall& b) {
            if (b.center.dim() != dim) {
              throw DimensionMismatch("event: ball center dimension mismatch");
            }
            if (!(b.radius >= 0.0) || !std::isfinite(b.radius)) {
              throw InvalidArgument(
                  "event: ball radius must be finite and >= 0");
            }
          },
          [&](const CustomEvent& c) {
            if (!c.predicate) {
              throw InvalidArgument("event: custom event without a predicate");
            }
          }},
      event);
}

// Everything step-shaped needs: the box, the drift source, and the folding
// rule, resolved once per operation instead of once per step.
struct Dynamics {
  const Window* window = nullptr;
  const GibbsModel* gibbs = nullptr;  // null: free motion
  bool torus = false;
  int dim = 0;
  double dt = 0.0;
  double sqrt_dt = 0.0;
  double drift_sign = 1.0;
  double max_increment = 0.0;  // drift * dt beyond this raises StepTooLarge
};

Dynamics make_dynamics(const DiffusionSpec& spec, double drift_sign) {
  validate_spec(spec);
  Dynamics dyn;
  dyn.window = &spec_window(spec);
  dyn.gibbs = std::get_if<GibbsModel>(&spec.model);
  dyn.torus = std::holds_alternative<Torus>(spec.geometry);
  dyn.dim = dyn.window->dim();
  dyn.dt = spec.dt;
  dyn.sqrt_dt = std::sqrt(spec.dt);
  dyn.drift_sign = drift_sign;
  dyn.max_increment = 0.5 * dyn.window->diameter();
  return dyn;
}

double fold_reflect(double v, double lo, double hi) {
  const double span = hi - lo;
  double y = std::fmod(v - lo, 2.0 * span);
  if (y < 0.0) y += 2.0 * span;
  if (y > span) y = 2.0 * span - y;
  return lo + y;
}

double fold_torus(double v, double lo, double hi) {
  const double span = hi - lo;
  double y = std::fmod(v - lo, span);
  if (y < 0.0) y += span;
  return lo + y;
}

std::vector<double> flatten(const Configuration& gamma) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(gamma.total_mass()) *
              static_cast<std::size_t>(gamma.dim()));
  for (const Atom& a : gamma.atoms()) {
    for (int m = 0; m < a.multiplicity; ++m) {
      out.insert(out.end(), a.position.x.begin(), a.position.x.end());
    }
  }
  return out;
}

Configuration assemble(const std::vector<double>& x, int dim) {
  Configuration cfg(dim);
  const std::size_t n = x.size() / static_cast<std::size_t>(dim);
  Point p(std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) {
      p[k] = x[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
    }
    cfg.add(p);
  }
  return cfg;
}

// Langevin drift of particle i by central finite differences of the
// Hamiltonian: -1/2 grad Phi(x_i) - 1/2 sum_{j != i} grad_1 Psi(x_i, x_j).
void gibbs_drift(const Dynamics& dyn, const std::vector<double>& x,
                 std::size_t i, Point& p, Point& q, Point& y,
                 std::vector<double>& out) {
  const int d = dyn.dim;
  const std::size_t n = x.size() / static_cast<std::size_t>(d);
  const double h = 1e-5;
  for (int k = 0; k < d; ++k) {
    p[k] = x[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)];
  }
  q = p;
  for (int k = 0; k < d; ++k) {
    q[k] = p[k] + h;
    double up = dyn.gibbs->phi(q);
    q[k] = p[k] - h;
    double dn = dyn.gibbs->phi(q);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      for (int kk = 0; kk < d; ++kk) {
        y[kk] =
            x[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(kk)];
      }
      q[k] = p[k] + h;
      up += dyn.gibbs->psi(q, y);
      q[k] = p[k] - h;
      dn += dyn.gibbs->psi(q, y);
    }
    q[k] = p[k];
    out[static_cast<std::size_t>(k)] =
        dyn.drift_sign * (-0.5) * (up - dn) / (2.0 * h);
  }
}

void step_flat(const Dynamics& dyn, std::vector<double>& x,
               std::vector<double>& scratch, Rng& rng) {
  const int d = dyn.dim;
  const std::size_t n = x.size() / static_cast<std::size_t>(d);
  if (n == 0) return;
  const Window& w = *dyn.window;
  if (dyn.gibbs != nullptr) {
    scratch.assign(x.size(), 0.0);
    Point p(std::vector<double>(static_cast<std::size_t>(d), 0.0));
    Point q = p;
    Point y = p;
    std::vector<double> g(static_cast<std::size_t>(d), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      gibbs_drift(dyn, x, i, p, q, y, g);
      double norm2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double inc = g[static_cast<std::size_t>(k)] * dyn.dt;
        norm2 += inc * inc;
        scratch[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] =
            inc;
      }
      if (!(norm2 <= dyn.max_increment * dyn.max_increment)) {
        throw StepTooLarge(
            "step: drift increment " + fmt_double(std::sqrt(norm2)) +
            " exceeds half the window diameter; reduce dt");
      }
    }
    for (std::size_t c = 0; c < x.size(); ++c) x[c] += scratch[c];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const std::size_t c =
          i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k);
      double v = x[c] + dyn.sqrt_dt * rng.normal();
      v = dyn.torus ? fold_torus(v, w.lo()[k], w.hi()[k])
                    : fold_reflect(v, w.lo()[k], w.hi()[k]);
      x[c] = v;
    }
  }
}

std::int64_t steps_for(double t, double dt) {
  const double ratio = t / dt;
  const double rounded = std::nearbyint(ratio);
  if (std::abs(ratio - rounded) > 1e-9) {
    throw InvalidArgument("diffusion: t = " + fmt_double(t) +
                          " is not an integer multiple of dt = " +
                          fmt_double(dt));
  }
  return static_cast<std::int64_t>(rounded);
}

void check_time(double t, const DiffusionSpec& spec) {
  if (!std::isfinite(t) || t < 0.0) {
    throw InvalidArgument("diffusion: t must be finite and >= 0");
  }
  if (t > spec.horizon) {
    throw InvalidArgument("diffusion: t = " + fmt_double(t) +
                          " exceeds the horizon " + fmt_double(spec.horizon));
  }
  steps_for(t, spec.dt);
}

void check_decreasing_grid(const std::vector<double>& t_grid,
                           const DiffusionSpec& spec) {
  if (t_grid.empty()) {
    throw InvalidArgument("diffusion: the t grid must not be empty");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) {
      throw InvalidArgument("diffusion: grid times must be positive");
    }
    if (i > 0 && !(t_grid[i] < t_grid[i - 1])) {
      throw InvalidArgument("diffusion: the t grid must decrease strictly");
    }
    check_time(t_grid[i], spec);
  }
}

double escape_cost(const Window& u, const Point& p) {
  const double w = u.distance_to_complement(p);
  return w * w;
}

// Minimum cost of reconciling the two window restrictions when every atom
// may instead exit through the window boundary at its squared exit cost.
// Any transport plan between configurations agreeing with gamma_a / gamma_b
// inside the window pays at least this much, so the square root certifies a
// lower bound on the distance between the two agreement sets.
double escape_matching_distance(const Configuration& gamma_a,
                                const Configuration& gamma_b,
                                const Window& u_window) {
  const std::vector<Point> alpha = restrict_to(gamma_a, u_window).expanded();
  const std::vector<Point> beta = restrict_to(gamma_b, u_window).expanded();
  const std::size_t na = alpha.size();
  const std::size_t nb = beta.size();
  const std::size_t n = na + nb;
  if (n == 0) return 0.0;
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    const double ea = escape_cost(u_window, alpha[i]);
    for (std::size_t j = 0; j < nb; ++j) {
      cost[i * n + j] = squared_distance(alpha[i], beta[j]);
    }
    for (std::size_t j = nb; j < n; ++j) cost[i * n + j] = ea;
  }
  for (std::size_t i = na; i < n; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      cost[i * n + j] = escape_cost(u_window, beta[j]);
    }
  }
  const auto solved = transport::solve_assignment(n, n, cost);
  return std::sqrt(std::max(0.0, solved.total_cost));
}

// Distance from gamma to the target event, for the kinds that support a
// reference; infinity marks "no finite value", nullopt marks "unsupported".
// A ball is a solid target, so its radius is subtracted. A restriction set
// is reported against the exact-match set it approximates: the tolerance
// only thickens a null set to make it hittable, so the reference keeps the
// full restriction distance.
std::optional<double> target_distance(const EventSet& xi,
                                      const Configuration& gamma) {
  if (const auto* ball = std::get_if<DistanceBall>(&xi)) {
    const auto d = transport::d_upsilon(gamma, ball->center);
    if (d.is_infinite()) return std::numeric_limits<double>::infinity();
    return std::max(0.0, d.value() - ball->radius);
  }
  if (const auto* ls = std::get_if<LambdaSet>(&xi)) {
    const auto rho =
        transport::rho_gamma_u(gamma, ls->gamma_ref, ls->u_window);
    if (rho.is_infinite()) return std::numeric_limits<double>::infinity();
    return rho.value();
  }
  return std::nullopt;
}

std::string openness_note_for(const EventSet& xi) {
  return std::visit(
      overloaded{
          [](const Concentration& c) -> std::string {
            if (c.mode == CountMode::Leq) {
              return "target (count <= n over a closed region) is open in "
                     "the transport topology";
            }
            return "target count event need not be open in the transport "
                   "topology; the extrapolated limit is informational";
          },
          [](const LambdaSet&) -> std::string {
            return "target agreement event is closed in the transport "
                   "topology; the extrapolated limit is informational";
          },
          [](const DistanceBall&) -> std::string {
            return "target closed ball need not be open in the transport "
                   "topology; the extrapolated limit is informational";
          },
          [](const CustomEvent&) -> std::string {
            return "target openness is unknown for a custom predicate; the "
                   "extrapolated limit is informational";
          }},
      xi);
}

}  // namespace

void validate_spec(const DiffusionSpec& spec) {
  const IntensityMeasure* intensity = model_intensity(spec.model);
  if (intensity == nullptr) {
    throw InvalidArgument(
        "diffusion: the model must carry a window (Ginibre has none)");
  }
  const Window& w = intensity->window();
  if (w.kind() != Window::Kind::Box) {
    throw InvalidArgument("diffusion: the model window must be a box");
  }
  if (const auto* gibbs = std::get_if<GibbsModel>(&spec.model)) {
    if (!gibbs->phi || !gibbs->psi) {
      throw InvalidArgument("diffusion: Gibbs model with null potential");
    }
  }
  if (!std::isfinite(spec.dt) || !(spec.dt > 0.0) ||
      !std::isfinite(spec.horizon) || !(spec.horizon > 0.0)) {
    throw InvalidArgument("diffusion: dt and horizon must be positive");
  }
  if (spec.dt > 1e-2 * spec.horizon) {
    throw InvalidArgument("diffusion: dt must be at most 1e-2 * horizon");
  }
  if (const auto* rb = std::get_if<ReflectingBox>(&spec.geometry)) {
    if (rb->window.kind() != Window::Kind::Box ||
        rb->window.dim() != w.dim()) {
      throw InvalidArgument(
          "diffusion: reflecting geometry needs the model's box window");
    }
    for (int k = 0; k < w.dim(); ++k) {
      if (!nearly_equal(rb->window.lo()[k], w.lo()[k]) ||
          !nearly_equal(rb->window.hi()[k], w.hi()[k])) {
        throw InvalidArgument(
            "diffusion: reflecting box must coincide with the model window");
      }
    }
  } else {
    const auto& torus = std::get<Torus>(spec.geometry);
    if (static_cast<int>(torus.period.size()) != w.dim()) {
      throw DimensionMismatch(
          "diffusion: torus period count must match the window dimension");
    }
    for (int k = 0; k < w.dim(); ++k) {
      const double span = w.hi()[k] - w.lo()[k];
      const double period = torus.period[static_cast<std::size_t>(k)];
      if (!(period > 0.0) || !std::isfinite(period) ||
          !nearly_equal(period, span)) {
        throw InvalidArgument(
            "diffusion: torus periods must equal the window edge lengths");
      }
    }
  }
}

const Window& spec_window(const DiffusionSpec& spec) {
  const IntensityMeasure* intensity = model_intensity(spec.model);
  if (intensity == nullptr) {
    throw InvalidArgument(
        "diffusion: the model must carry a window (Ginibre has none)");
  }
  return intensity->window();
}

EventSet whole_space() {
  return CustomEvent{"whole_space",
                     [](const Configuration&) { return true; }};
}

bool event_contains(const EventSet& event, const Configuration& gamma) {
  return std::visit(
      overloaded{
          [&](const Concentration& c) {
            return in_concentration_set(gamma, c.region, c.n, c.mode);
          },
          [&](const LambdaSet& l) {
            const auto rho =
                transport::rho_gamma_u(gamma, l.gamma_ref, l.u_window);
            return !rho.is_infinite() && rho.value() <= l.tolerance;
          },
          [&](const DistanceBall& b) {
            const auto d = transport::d_upsilon(gamma, b.center);
            return !d.is_infinite() && d.value() <= b.radius;
          },
          [&](const CustomEvent& c) {
            if (!c.predicate) {
              throw InvalidArgument("event: custom event without a predicate");
            }
            return c.predicate(gamma);
          }},
      event);
}

transport::ExtendedDistance event_distance_lower(const EventSet& a,
                                                 const EventSet& b) {
  using transport::ExtendedDistance;
  if (const auto* ball_a = std::get_if<DistanceBall>(&a)) {
    if (const auto* ball_b = std::get_if<DistanceBall>(&b)) {
      validate_event(a, ball_a->center.dim());
      validate_event(b, ball_b->center.dim());
      const auto d = transport::d_upsilon(ball_a->center, ball_b->center);
      if (d.is_infinite()) return ExtendedDistance::infinity();
      return ExtendedDistance::finite(
          std::max(0.0, d.value() - ball_a->radius - ball_b->radius));
    }
  }
  if (const auto* set_a = std::get_if<LambdaSet>(&a)) {
    if (const auto* set_b = std::get_if<LambdaSet>(&b)) {
      validate_event(a, set_a->u_window.dim());
      validate_event(b, set_b->u_window.dim());
      if (!same_window(set_a->u_window, set_b->u_window)) {
        throw NoDistanceCertificate(
            "event_distance_lower: LambdaSet pair needs a common window");
      }
      const double sigma = escape_matching_distance(
          set_a->gamma_ref, set_b->gamma_ref, set_a->u_window);
      return ExtendedDistance::finite(
          std::max(0.0, sigma - set_a->tolerance - set_b->tolerance));
    }
  }
  throw NoDistanceCertificate(
      std::string("event_distance_lower: unsupported pair (") +
      event_kind_name(a) + ", " + event_kind_name(b) + ")");
}

Configuration step(const Configuration& state, const DiffusionSpec& spec,
                   Rng& rng) {
  const Dynamics dyn = make_dynamics(spec, 1.0);
  if (state.dim() != dyn.dim) {
    throw DimensionMismatch("step: state dimension does not match the model");
  }
  if (state.total_mass() < 1) {
    throw InvalidArgument("step: the state must carry at least one point");
  }
  std::vector<double> x = flatten(state);
  std::vector<double> scratch;
  step_flat(dyn, x, scratch, rng);
  return assemble(x, dyn.dim);
}

Configuration run_path(const Configuration& start, const DiffusionSpec& spec,
                       std::int64_t steps, Rng& rng) {
  const Dynamics dyn = make_dynamics(spec, 1.0);
  if (start.dim() != dyn.dim) {
    throw DimensionMismatch(
        "run_path: start dimension does not match the model");
  }
  if (steps < 0) throw InvalidArgument("run_path: steps must be >= 0");
  if (start.empty() || steps == 0) return start;
  std::vector<double> x = flatten(start);
  std::vector<double> scratch;
  for (std::int64_t s = 0; s < steps; ++s) step_flat(dyn, x, scratch, rng);
  return assemble(x, dyn.dim);
}

SemigroupEstimate semigroup_estimate(const EventSet& xi,
                                     const EventSet& lambda, double t,
                                     const DiffusionSpec& spec,
                                     std::int64_t n_paths,
                                     std::uint64_t seed) {
  const Dynamics dyn = make_dynamics(spec, 1.0);
  validate_event(xi, dyn.dim);
  validate_event(lambda, dyn.dim);
  check_time(t, spec);
  if (n_paths < 1) {
    throw InvalidArgument("semigroup_estimate: n_paths must be >= 1");
  }
  const std::int64_t steps = steps_for(t, spec.dt);
  ModelSampler sampler(spec.model, sub_seed(seed, 0));
  SemigroupEstimate out;
  out.n_paths = n_paths;
  std::vector<double> x;
  std::vector<double> scratch;
  for (std::int64_t i = 0; i < n_paths; ++i) {
    const Configuration start = sampler.next();
    if (!event_contains(lambda, start)) continue;
    ++out.lambda_hits;
    bool hit = false;
    if (steps == 0 || start.empty()) {
      hit = event_contains(xi, start);
    } else {
      x = flatten(start);
      Rng rng = Rng::derived(seed, kPathStreamBase + static_cast<std::uint64_t>(i));
      for (std::int64_t s = 0; s < steps; ++s) step_flat(dyn, x, scratch, rng);
      hit = event_contains(xi, assemble(x, dyn.dim));
    }
    if (hit) ++out.hits;
  }
  const double n = static_cast<double>(n_paths);
  out.estimate = static_cast<double>(out.hits) / n;
  out.se = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  return out;
}

GaussianBoundReport gaussian_bound_check(const EventSet& lambda_a,
                                         const EventSet& lambda_b,
                                         const std::vector<double>& t_grid,
                                         const DiffusionSpec& spec,
                                         std::int64_t n_paths,
                                         std::uint64_t seed) {
  const Dynamics dyn = make_dynamics(spec, 1.0);
  validate_event(lambda_a, dyn.dim);
  validate_event(lambda_b, dyn.dim);
  if (t_grid.empty()) {
    throw InvalidArgument("gaussian_bound_check: empty t grid");
  }
  for (double t : t_grid) {
    if (!(t > 0.0)) {
      throw InvalidArgument("gaussian_bound_check: grid times must be > 0");
    }
    check_time(t, spec);
  }
  if (n_paths < 2) {
    throw InvalidArgument("gaussian_bound_check: n_paths must be >= 2");
  }

  const auto d_low = event_distance_lower(lambda_a, lambda_b);

  GaussianBoundReport report;
  {
    ModelSampler sampler(spec.model, sub_seed(seed, 1));
    std::int64_t in_a = 0;
    std::int64_t in_b = 0;
    for (std::int64_t i = 0; i < n_paths; ++i) {
      const Configuration g = sampler.next();
      if (event_contains(lambda_a, g)) ++in_a;
      if (event_contains(lambda_b, g)) ++in_b;
    }
    const double n = static_cast<double>(n_paths);
    report.mass_a = static_cast<double>(in_a) / n;
    report.mass_b = static_cast<double>(in_b) / n;
    report.mass_a_se = std::sqrt(report.mass_a * (1.0 - report.mass_a) / n);
    report.mass_b_se = std::sqrt(report.mass_b * (1.0 - report.mass_b) / n);
  }
  report.distance_lower = d_low.is_infinite() ? -1.0 : d_low.value();

  const double mass_factor = std::sqrt(report.mass_a * report.mass_b);
  for (std::size_t idx = 0; idx < t_grid.size(); ++idx) {
    const double t = t_grid[idx];
    const SemigroupEstimate est =
        semigroup_estimate(lambda_b, lambda_a, t, spec, n_paths,
                           sub_seed(seed, 100 + static_cast<std::uint64_t>(idx)));
    GaussianBoundRow row;
    row.t = t;
    row.estimate = est.estimate;
    row.se = est.se;
    row.bound = d_low.is_infinite()
                    ? 0.0
                    : mass_factor * std::exp(-(d_low.value() * d_low.value()) /
                                             (2.0 * t));
    row.violation = row.estimate - 3.0 * row.se > row.bound;
    if (row.violation) report.pass = false;
    report.rows.push_back(row);
  }
  return report;
}

VaradhanReport varadhan_profile(const EventSet& xi, const EventSet& lambda,
                                const std::vector<double>& t_grid,
                                const DiffusionSpec& spec,
                                std::int64_t n_paths, std::uint64_t seed) {
  const Dynamics dyn = make_dynamics(spec, 1.0);
  validate_event(xi, dyn.dim);
  validate_event(lambda, dyn.dim);
  check_decreasing_grid(t_grid, spec);
  if (n_paths < 100) {
    throw InvalidArgument("varadhan_profile: n_paths must be >= 100");
  }
  if (static_cast<std::uint64_t>(n_paths) >= kRowStride) {
    throw InvalidArgument("varadhan_profile: n_paths exceeds the rng stream "
                          "budget per grid row");
  }

  // Conditional start pool: model samples accepted into lambda, kept as one
  // flat coordinate block.  The pool is reused for every grid row; each
  // (row, member) pair owns a derived noise stream.
  std::vector<double> coords;
  std::vector<std::size_t> offsets{0};  // particle counts, prefix form
  double min_target = std::numeric_limits<double>::infinity();
  const bool target_supported = std::holds_alternative<DistanceBall>(xi) ||
                                std::holds_alternative<LambdaSet>(xi);
  std::int64_t attempts = 0;
  {
    ModelSampler sampler(spec.model, sub_seed(seed, 0));
    const std::int64_t max_attempts = 1000 + 500 * n_paths;
    std::int64_t pool = 0;
    while (pool < n_paths && attempts < max_attempts) {
      ++attempts;
      const Configuration g = sampler.next();
      if (!event_contains(lambda, g)) continue;
      const std::vector<double> flat = flatten(g);
      coords.insert(coords.end(), flat.begin(), flat.end());
      offsets.push_back(coords.size() / static_cast<std::size_t>(dyn.dim));
      ++pool;
      if (target_supported) {
        const auto dist = target_distance(xi, g);
        if (dist.has_value() && *dist < min_target) min_target = *dist;
      }
    }
    if (pool < n_paths) {
      throw InsufficientPaths(
          "varadhan_profile: only " + std::to_string(pool) + " of " +
          std::to_string(n_paths) + " starts landed in lambda after " +
          std::to_string(attempts) + " samples");
    }
  }

  VaradhanReport report;
  report.lambda_mass =
      static_cast<double>(n_paths) / static_cast<double>(attempts);
  report.openness_note = openness_note_for(xi);
  if (target_supported && std::isfinite(min_target)) {
    report.reference = min_target * min_target;
  }

  std::vector<double> ts;
  std::vector<double> rates;
  std::vector<double> rate_ses;
  std::vector<double> x;
  std::vector<double> scratch;
  for (std::size_t idx = 0; idx < t_grid.size(); ++idx) {
    const double t = t_grid[idx];
    const std::int64_t steps = steps_for(t, spec.dt);
    std::int64_t hits = 0;
    for (std::int64_t j = 0; j < n_paths; ++j) {
      const std::size_t p0 = offsets[static_cast<std::size_t>(j)] *
                             static_cast<std::size_t>(dyn.dim);
      const std::size_t p1 = offsets[static_cast<std::size_t>(j) + 1] *
                             static_cast<std::size_t>(dyn.dim);
      x.assign(coords.begin() + static_cast<std::ptrdiff_t>(p0),
               coords.begin() + static_cast<std::ptrdiff_t>(p1));
      Rng rng = Rng::derived(
          seed, (static_cast<std::uint64_t>(idx) + 1) * kRowStride +
                    static_cast<std::uint64_t>(j));
      for (std::int64_t s = 0; s < steps; ++s) step_flat(dyn, x, scratch, rng);
      if (event_contains(xi, assemble(x, dyn.dim))) ++hits;
    }
    if (hits < 10) {
      throw InsufficientPaths("varadhan_profile: " + std::to_string(hits) +
                              " hits at t = " + fmt_double(t) +
                              "; more paths or larger t needed");
    }
    const double n = static_cast<double>(n_paths);
    const double h = static_cast<double>(hits) / n;
    const double se_h = std::sqrt(h * (1.0 - h) / n);
    VaradhanRow row;
    row.t = t;
    row.estimate = report.lambda_mass * h;
    row.se = report.lambda_mass * se_h;
    row.rate = -2.0 * t * std::log(row.estimate);
    row.rate_se = 2.0 * t * se_h / h;
    report.rows.push_back(row);
    ts.push_back(t);
    rates.push_back(row.rate);
    rate_ses.push_back(row.rate_se);
  }

  if (t_grid.size() >= 2) {
    const auto fit = stats::linear_fit(ts, rates, rate_ses);
    report.extrapolated = fit.intercept;
    report.extrapolated_se = fit.intercept_se;
  } else {
    report.extrapolated = rates.front();
    report.extrapolated_se = rate_ses.front();
  }
  return report;
}

CdcReport carre_du_champ_mc(const std::function<double(const Configuration&)>& u,
                            const Configuration& gamma,
                            const std::vector<double>& t_grid,
                            const DiffusionSpec& spec, std::int64_t n_paths,
                            std::uint64_t seed) {
  const Dynamics dyn = make_dynamics(spec, 1.0);
  if (!u) throw InvalidArgument("carre_du_champ: null function");
  if (gamma.dim() != dyn.dim) {
    throw DimensionMismatch("carre_du_champ: configuration dimension");
  }
  check_decreasing_grid(t_grid, spec);
  if (n_paths < 2) {
    throw InvalidArgument("carre_du_champ: n_paths must be >= 2");
  }
  if (static_cast<std::uint64_t>(n_paths) >= kRowStride) {
    throw InvalidArgument("carre_du_champ: n_paths exceeds the rng stream "
                          "budget per grid row");
  }
  const double margin = 3.0 * std::sqrt(t_grid.front());
  for (const Atom& a : gamma.atoms()) {
    if (!dyn.window->contains(a.position)) {
      throw InvalidArgument("carre_du_champ: atom outside the window");
    }
    if (!dyn.torus &&
        dyn.window->distance_to_complement(a.position) < margin) {
      throw BoundaryContamination(
          "carre_du_champ: atom within 3 sqrt(max t) of the reflecting "
          "boundary");
    }
  }

  const double u0 = u(gamma);
  const std::vector<double> base = flatten(gamma);
  CdcReport report;
  report.t_grid = t_grid;
  std::vector<double> ratios;
  std::vector<double> ratio_ses;
  std::vector<double> values(static_cast<std::size_t>(n_paths), 0.0);
  std::vector<double> x;
  std::vector<double> scratch;
  for (std::size_t idx = 0; idx < t_grid.size(); ++idx) {
    const double t = t_grid[idx];
    const std::int64_t steps = steps_for(t, spec.dt);
    for (std::int64_t j = 0; j < n_paths; ++j) {
      x = base;
      Rng rng = Rng::derived(
          seed, (static_cast<std::uint64_t>(idx) + 1) * kRowStride +
                    static_cast<std::uint64_t>(j));
      for (std::int64_t s = 0; s < steps; ++s) step_flat(dyn, x, scratch, rng);
      const double du = u(assemble(x, dyn.dim)) - u0;
      values[static_cast<std::size_t>(j)] = du * du;
    }
    const auto ms = stats::mean_stderr(values);
    ratios.push_back(ms.mean / t);
    ratio_ses.push_back(ms.se / t);
  }
  report.ratios = ratios;
  report.ratio_ses = ratio_ses;
  if (t_grid.size() >= 2) {
    const auto fit = stats::linear_fit(t_grid, ratios, ratio_ses);
    report.value = fit.intercept;
    report.se = fit.intercept_se;
  } else {
    report.value = ratios.front();
    report.se = ratio_ses.front();
  }
  return report;
}

CdcReport carre_du_champ_mc(const CylinderFunction& u,
                            const Configuration& gamma,
                            const std::vector<double>& t_grid,
                            const DiffusionSpec& spec, std::int64_t n_paths,
                            std::uint64_t seed) {
  return carre_du_champ_mc(
      [&u](const Configuration& g) { return eval_cylinder(u, g); }, gamma,
      t_grid, spec, n_paths, seed);
}

double lipschitz_value(const LipschitzFunctionSpec& u_spec,
                       const Configuration& gamma) {
  if (!(u_spec.cap >= 0.0) || !std::isfinite(u_spec.cap) ||
      !std::isfinite(u_spec.scale)) {
    throw InvalidArgument(
        "lipschitz_value: cap must be >= 0 and scale finite");
  }
  const auto rho =
      transport::rho_gamma_u(gamma, u_spec.gamma_ref, u_spec.u_window);
  const double v =
      rho.is_infinite() ? u_spec.cap : std::min(rho.value(), u_spec.cap);
  return u_spec.scale * v;
}

RademacherReport rademacher_check(const LipschitzFunctionSpec& u_spec,
                                  const DiffusionSpec& spec,
                                  std::int64_t n_pairs, std::uint64_t seed,
                                  const RademacherOptions& options) {
  const Dynamics dyn = make_dynamics(spec, 1.0);
  if (u_spec.gamma_ref.dim() != dyn.dim || u_spec.u_window.dim() != dyn.dim) {
    throw DimensionMismatch("rademacher_check: function spec dimension");
  }
  if (!(u_spec.cap >= 0.0) || !std::isfinite(u_spec.cap) ||
      !std::isfinite(u_spec.scale)) {
    throw InvalidArgument(
        "rademacher_check: cap must be >= 0 and scale finite");
  }
  if (n_pairs < 1) {
    throw InvalidArgument("rademacher_check: n_pairs must be >= 1");
  }
  if (options.n_cdc_gammas < 0 || options.cdc_n_paths < 2) {
    throw InvalidArgument("rademacher_check: bad square-field options");
  }
  check_decreasing_grid(options.cdc_t_grid, spec);

  RademacherReport report;
  report.lipschitz_constant = std::abs(u_spec.scale);

  {
    ModelSampler sampler(spec.model, sub_seed(seed, 0));
    const std::int64_t max_attempts = options.max_attempt_factor * n_pairs;
    std::int64_t attempts = 0;
    while (report.finite_pairs < n_pairs && attempts < max_attempts) {
      ++attempts;
      const Configuration g = sampler.next();
      const Configuration h = sampler.next();
      const auto d = transport::d_upsilon(g, h);
      if (d.is_infinite() || d.value() == 0.0) continue;
      const double ratio =
          std::abs(lipschitz_value(u_spec, g) - lipschitz_value(u_spec, h)) /
          d.value();
      report.max_ratio = std::max(report.max_ratio, ratio);
      ++report.finite_pairs;
    }
  }

  {
    ModelSampler sampler(spec.model, sub_seed(seed, 1));
    const double margin = 3.0 * std::sqrt(options.cdc_t_grid.front());
    const std::int64_t max_attempts =
        60 * std::max<std::int64_t>(options.n_cdc_gammas, 1);
    std::int64_t attempts = 0;
    const auto u_fn = [&u_spec](const Configuration& g) {
      return lipschitz_value(u_spec, g);
    };
    while (report.cdc_gammas < options.n_cdc_gammas &&
           attempts < max_attempts) {
      ++attempts;
      const Configuration g = sampler.next();
      bool usable = true;
      for (const Atom& a : g.atoms()) {
        if (!dyn.window->contains(a.position) ||
            (!dyn.torus &&
             dyn.window->distance_to_complement(a.position) < margin)) {
          usable = false;
          break;
        }
      }
      if (!usable) continue;
      const CdcReport cdc = carre_du_champ_mc(
          u_fn, g, options.cdc_t_grid, spec, options.cdc_n_paths,
          sub_seed(seed, 0x300 + static_cast<std::uint64_t>(report.cdc_gammas)));
      report.max_cdc = std::max(report.max_cdc, cdc.value);
      ++report.cdc_gammas;
    }
  }

  const double lip = report.lipschitz_constant;
  report.pass = report.max_ratio <= lip + 1e-9 &&
                report.max_cdc <= lip * lip * 1.1;
  return report;
}

StationarityReport stationarity_test(const DiffusionSpec& spec, double horizon,
                                     const std::vector<Window>& statistics,
                                     std::int64_t n_chains, std::uint64_t seed,
                                     bool negate_drift) {
  const Dynamics dyn = make_dynamics(spec, negate_drift ? -1.0 : 1.0);
  if (!dyn.torus) {
    throw InvalidArgument("stationarity_test: torus geometry required");
  }
  if (statistics.empty()) {
    throw InvalidArgument("stationarity_test: no statistic windows");
  }
  for (const Window& w : statistics) {
    if (w.dim() != dyn.dim) {
      throw DimensionMismatch("stationarity_test: statistic window dimension");
    }
  }
  if (n_chains < 4) {
    throw InvalidArgument("stationarity_test: n_chains must be >= 4");
  }
  if (!std::isfinite(horizon) || horizon < 0.0 || horizon > spec.horizon) {
    throw InvalidArgument(
        "stationarity_test: horizon must lie in [0, spec.horizon]");
  }
  const std::int64_t steps = steps_for(horizon, spec.dt);

  const std::size_t n_windows = statistics.size();
  std::vector<std::vector<std::int64_t>> counts_start(n_windows);
  std::vector<std::vector<std::int64_t>> counts_end(n_windows);
  const std::int64_t half = n_chains / 2;
  ModelSampler sampler(spec.model, sub_seed(seed, 0));
  std::vector<double> x;
  std::vector<double> scratch;
  for (std::int64_t i = 0; i < n_chains; ++i) {
    Configuration g = sampler.next();
    if (i >= half && steps > 0 && !g.empty()) {
      x = flatten(g);
      Rng rng = Rng::derived(seed, kPathStreamBase + static_cast<std::uint64_t>(i));
      for (std::int64_t s = 0; s < steps; ++s) step_flat(dyn, x, scratch, rng);
      g = assemble(x, dyn.dim);
    }
    for (std::size_t w = 0; w < n_windows; ++w) {
      const std::int64_t c = count(g, statistics[w]);
      (i < half ? counts_start[w] : counts_end[w]).push_back(c);
    }
  }

  StationarityReport report;
  report.alpha = 0.01 / static_cast<double>(n_windows);
  report.pass = true;
  for (std::size_t w = 0; w < n_windows; ++w) {
    std::int64_t max_count = 0;
    for (std::int64_t c : counts_start[w]) max_count = std::max(max_count, c);
    for (std::int64_t c : counts_end[w]) max_count = std::max(max_count, c);
    std::vector<std::int64_t> hist_a(static_cast<std::size_t>(max_count) + 1,
                                     0);
    std::vector<std::int64_t> hist_b(static_cast<std::size_t>(max_count) + 1,
                                     0);
    for (std::int64_t c : counts_start[w]) {
      ++hist_a[static_cast<std::size_t>(c)];
    }
    for (std::int64_t c : counts_end[w]) ++hist_b[static_cast<std::size_t>(c)];
    const auto res = stats::chi_square_two_sample(hist_a, hist_b);
    report.p_values.push_back(res.p_value);
    if (!(res.p_value > report.alpha)) report.pass = false;
  }
  return report;
}

}  // namespace configlab::diffusion
