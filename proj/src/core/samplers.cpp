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

#include "samplers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "quadrature.hpp"
#include "stats.hpp"

namespace configlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double checked_potential(double v, const char* what) {
  if (std::isnan(v)) throw NumericalFailure(std::string(what) + " returned NaN");
  return v;
}

}  // namespace

IntensityMeasure IntensityMeasure::uniform(const Window& window, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw InvalidArgument("IntensityMeasure: rate must be positive and finite");
  IntensityMeasure m(window);
  m.rate_ = rate;
  m.total_mass_ = rate * window.volume();
  return m;
}

IntensityMeasure IntensityMeasure::with_density(
    const Window& window, std::function<double(const Point&)> density,
    double density_bound, double total_mass) {
  if (!density) throw InvalidArgument("IntensityMeasure: null density");
  if (!(density_bound > 0.0) || !std::isfinite(density_bound))
    throw InvalidArgument("IntensityMeasure: density_bound must be positive and finite");
  if (!(total_mass > 0.0) || !std::isfinite(total_mass))
    throw InvalidArgument("IntensityMeasure: total_mass must be positive and finite");
  IntensityMeasure m(window);
  m.density_ = std::move(density);
  m.density_bound_ = density_bound;
  m.total_mass_ = total_mass;
  return m;
}

double IntensityMeasure::rate() const {
  if (!is_uniform()) throw InvalidArgument("IntensityMeasure: rate of a non-uniform measure");
  return rate_;
}

double IntensityMeasure::density_at(const Point& p) const {
  if (!window_.contains(p)) return 0.0;
  if (is_uniform()) return rate_;
  double v = density_(p);
  if (!(v >= 0.0)) throw InvalidArgument("IntensityMeasure: density returned a negative value");
  return v;
}

Point IntensityMeasure::sample_location(Rng& rng) const {
  if (is_uniform()) return window_.sample_uniform(rng);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    Point p = window_.sample_uniform(rng);
    double v = density_at(p);
    if (v > density_bound_ * (1.0 + 1e-12))
      throw InvalidArgument("IntensityMeasure: density exceeds density_bound");
    if (rng.uniform01() * density_bound_ < v) return p;
  }
  throw NumericalFailure("IntensityMeasure: rejection sampling failed to accept");
}

void validate_mixing_law(const MixingLaw& law) {
  if (law.empty()) throw InvalidArgument("mixing law: no atoms");
  double sum = 0.0;
  for (const auto& a : law) {
    if (!(a.scale > 0.0) || !std::isfinite(a.scale))
      throw InvalidArgument("mixing law: scales must be positive and finite");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      throw InvalidArgument("mixing law: weights must be positive and finite");
    sum += a.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidArgument("mixing law: weights must sum to 1");
}

double sample_mixing_scale(const MixingLaw& law, Rng& rng) {
  double u = rng.uniform01();
  double cum = 0.0;
  for (const auto& a : law) {
    cum += a.weight;
    if (u < cum) return a.scale;
  }
  return law.back().scale;
}

double hamiltonian(const Configuration& gamma, const FreePotentialFn& phi,
                   const PairPotentialFn& psi) {
  if (!phi || !psi) throw InvalidArgument("hamiltonian: null potential");
  const auto& atoms = gamma.atoms();
  double h = 0.0;
  for (const auto& a : atoms)
    h += a.multiplicity * checked_potential(phi(a.position), "free potential");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    double self_pairs = atoms[i].multiplicity * (atoms[i].multiplicity - 1) / 2.0;
    if (self_pairs > 0.0)
      h += self_pairs *
           checked_potential(psi(atoms[i].position, atoms[i].position), "pair potential");
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      h += atoms[i].multiplicity * atoms[j].multiplicity *
           checked_potential(psi(atoms[i].position, atoms[j].position), "pair potential");
  }
  if (std::isnan(h)) throw NumericalFailure("hamiltonian: energy is NaN");
  return h;
}

int model_dim(const PointProcessModel& model) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GinibreModel>)
          return 2;
        else
          return m.intensity.window().dim();
      },
      model);
}

Configuration sample_poisson(const IntensityMeasure& intensity, Rng& rng) {
  int n = rng.poisson(intensity.total_mass());
  Configuration gamma(intensity.window().dim());
  for (int i = 0; i < n; ++i) gamma.add(intensity.sample_location(rng));
  return gamma;
}

Configuration sample_mixed_poisson(const IntensityMeasure& intensity,
                                   const MixingLaw& mixing, Rng& rng) {
  validate_mixing_law(mixing);
  double s = sample_mixing_scale(mixing, rng);
  int n = rng.poisson(s * intensity.total_mass());
  Configuration gamma(intensity.window().dim());
  for (int i = 0; i < n; ++i) gamma.add(intensity.sample_location(rng));
  return gamma;
}

Configuration sample_ginibre(int matrix_size, Rng& rng) {
  if (matrix_size < 1) throw InvalidArgument("sample_ginibre: matrix_size must be >= 1");
  const int n = matrix_size;
  const double scale = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      double re = rng.normal();
      double im = rng.normal();
      g(r, c) = std::complex<double>(re * scale, im * scale);
    }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(g, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("sample_ginibre: eigenvalue solver did not converge");
  Configuration gamma(2);
  for (int i = 0; i < n; ++i) {
    const auto& ev = solver.eigenvalues()[i];
    gamma.add(Point({ev.real(), ev.imag()}));
  }
  return gamma;
}

namespace {

Point expanded_at(const Configuration& gamma, std::int64_t index) {
  std::int64_t seen = 0;
  for (const auto& a : gamma.atoms()) {
    if (index < seen + a.multiplicity) return a.position;
    seen += a.multiplicity;
  }
  throw InvalidArgument("expanded_at: index out of range");
}

Configuration remove_expanded(const Configuration& gamma, std::int64_t index) {
  Configuration out(gamma.dim());
  std::int64_t seen = 0;
  for (const auto& a : gamma.atoms()) {
    int m = a.multiplicity;
    if (index >= seen && index < seen + a.multiplicity) m -= 1;
    if (m > 0) out.add(a.position, m);
    seen += a.multiplicity;
  }
  return out;
}

}  // namespace

GibbsChain::GibbsChain(GibbsModel model, std::uint64_t seed)
    : model_(std::move(model)),
      rng_(seed),
      state_(model_.intensity.window().dim()) {
  const auto& p = model_.mcmc;
  if (p.burn_in < 1 || p.thinning < 1)
    throw InvalidArgument("GibbsChain: burn_in and thinning must be >= 1");
  if (p.p_birth < 0.0 || p.p_death < 0.0 || p.p_move < 0.0 ||
      std::abs(p.p_birth + p.p_death + p.p_move - 1.0) > 1e-12)
    throw InvalidArgument("GibbsChain: proposal weights must be nonnegative and sum to 1");
  if (!model_.phi || !model_.psi) throw InvalidArgument("GibbsChain: null potential");
  move_scale_ = p.move_scale > 0.0 ? p.move_scale
                                   : 0.1 * model_.intensity.window().diameter();

  if (model_.initial.has_value()) {
    if (model_.initial->dim() != state_.dim())
      throw DimensionMismatch("GibbsChain: initial state dimension mismatch");
    for (const auto& a : model_.initial->atoms())
      if (!model_.intensity.window().contains(a.position))
        throw InvalidArgument("GibbsChain: initial state has a point outside the window");
    state_ = *model_.initial;
  }
  double h0 = hamiltonian(state_, model_.phi, model_.psi);
  if (!std::isfinite(h0))
    throw InvalidArgument("GibbsChain: initial state has non-finite energy");

  for (std::int64_t i = 0; i < p.burn_in; ++i) step_once();
  if (static_cast<double>(accepted_) < 0.001 * static_cast<double>(p.burn_in))
    throw ChainStuck("GibbsChain: acceptance rate below 0.1% across burn-in");
}

double GibbsChain::acceptance_rate() const {
  return proposed_ == 0 ? 0.0
                        : static_cast<double>(accepted_) / static_cast<double>(proposed_);
}

double GibbsChain::delta_h_birth(const Configuration& gamma, const Point& x) const {
  double d = checked_potential(model_.phi(x), "free potential");
  for (const auto& a : gamma.atoms())
    d += a.multiplicity * checked_potential(model_.psi(x, a.position), "pair potential");
  return d;
}

double GibbsChain::delta_h_death(const Configuration& gamma, const Point& x) const {
  double interaction = 0.0;
  for (const auto& a : gamma.atoms()) {
    // Pairs lost by removing one copy at x: all pairs with other points, and
    // m-1 self pairs at x itself.  Zero coefficients are skipped so that an
    // infinite pair potential cannot produce 0 * inf.
    int coeff = a.position == x ? a.multiplicity - 1 : a.multiplicity;
    if (coeff > 0)
      interaction += coeff * checked_potential(model_.psi(x, a.position), "pair potential");
  }
  return -(checked_potential(model_.phi(x), "free potential") + interaction);
}

void GibbsChain::step_once() {
  const auto& p = model_.mcmc;
  const double mass = model_.intensity.total_mass();
  const auto n = state_.total_mass();
  const double choice = rng_.uniform01();
  ++proposed_;

  auto metropolis_accept = [&](double log_free_ratio, double delta_h) {
    if (delta_h == kInf) return false;
    double a = std::exp(log_free_ratio - delta_h);
    return rng_.uniform01() < a;
  };

  if (choice < p.p_birth) {
    Point x = model_.intensity.sample_location(rng_);
    double dh = delta_h_birth(state_, x);
    if (metropolis_accept(std::log(mass / static_cast<double>(n + 1)), dh)) {
      state_.add(x);
      ++accepted_;
    }
    return;
  }
  if (choice < p.p_birth + p.p_death) {
    if (n == 0) return;
    auto idx = static_cast<std::int64_t>(rng_.uniform_index(static_cast<std::size_t>(n)));
    Point x = expanded_at(state_, idx);
    double dh = delta_h_death(state_, x);
    if (metropolis_accept(std::log(static_cast<double>(n) / mass), dh)) {
      state_ = remove_expanded(state_, idx);
      ++accepted_;
    }
    return;
  }
  if (n == 0) return;
  auto idx = static_cast<std::int64_t>(rng_.uniform_index(static_cast<std::size_t>(n)));
  Point x = expanded_at(state_, idx);
  Point y = x;
  for (int k = 0; k < y.dim(); ++k) y[k] += move_scale_ * rng_.normal();
  if (!model_.intensity.window().contains(y)) return;
  Configuration without = remove_expanded(state_, idx);
  double dh = delta_h_death(state_, x) + delta_h_birth(without, y);
  double dens_x = model_.intensity.density_at(x);
  double dens_y = model_.intensity.density_at(y);
  if (dens_x <= 0.0) throw NumericalFailure("GibbsChain: state point has zero density");
  if (metropolis_accept(std::log(dens_y / dens_x), dh)) {
    without.add(y);
    state_ = std::move(without);
    ++accepted_;
  }
}

Configuration GibbsChain::next() {
  for (std::int64_t i = 0; i < model_.mcmc.thinning; ++i) step_once();
  return state_;
}

ModelSampler::ModelSampler(PointProcessModel model, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed) {
  if (const auto* gibbs = std::get_if<GibbsModel>(&model_))
    chain_ = std::make_unique<GibbsChain>(*gibbs, splitmix64(seed ^ 0x61bb5ULL));
}

Configuration ModelSampler::next() {
  return std::visit(
      [this](const auto& m) -> Configuration {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PoissonModel>)
          return sample_poisson(m.intensity, rng_);
        else if constexpr (std::is_same_v<T, MixedPoissonModel>)
          return sample_mixed_poisson(m.intensity, m.mixing, rng_);
        else if constexpr (std::is_same_v<T, GibbsModel>)
          return chain_->next();
        else
          return sample_ginibre(m.matrix_size, rng_);
      },
      model_);
}

MeckeCheck check_mecke(
    const IntensityMeasure& intensity,
    const std::function<double(const Configuration&, const Point&)>& u,
    std::int64_t n_samples, std::uint64_t seed, int strata_per_axis) {
  if (!u) throw InvalidArgument("check_mecke: null functional");
  if (n_samples < 2) throw InvalidArgument("check_mecke: need at least two samples");
  if (strata_per_axis < 1) throw InvalidArgument("check_mecke: strata_per_axis must be >= 1");

  const auto [lo, hi] = intensity.window().bounding_box();
  const int d = intensity.window().dim();
  std::vector<double> cell_width(d);
  double cell_volume = 1.0;
  for (int k = 0; k < d; ++k) {
    cell_width[k] = (hi[k] - lo[k]) / strata_per_axis;
    cell_volume *= cell_width[k];
  }

  std::vector<double> lhs_vals(static_cast<std::size_t>(n_samples));
  std::vector<double> rhs_vals(static_cast<std::size_t>(n_samples));
  std::vector<double> diffs(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(i));
    Configuration gamma = sample_poisson(intensity, rng);

    double lhs = 0.0;
    for (const auto& a : gamma.atoms()) lhs += a.multiplicity * u(gamma, a.position);

    double rhs = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Point x(std::vector<double>(static_cast<std::size_t>(d), 0.0));
    while (true) {
      for (int k = 0; k < d; ++k)
        x[k] = lo[k] + (idx[static_cast<std::size_t>(k)] + rng.uniform01()) * cell_width[k];
      double w = intensity.density_at(x) * cell_volume;
      if (w != 0.0) {
        Configuration plus = gamma;
        plus.add(x);
        rhs += w * u(plus, x);
      }
      int k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == strata_per_axis) {
        idx[static_cast<std::size_t>(k)] = 0;
        ++k;
      }
      if (k == d) break;
    }

    lhs_vals[static_cast<std::size_t>(i)] = lhs;
    rhs_vals[static_cast<std::size_t>(i)] = rhs;
    diffs[static_cast<std::size_t>(i)] = lhs - rhs;
  }

  MeckeCheck out;
  out.n_samples = n_samples;
  out.lhs = stats::mean_stderr(lhs_vals).mean;
  out.rhs = stats::mean_stderr(rhs_vals).mean;
  out.se = stats::mean_stderr(diffs).se;
  return out;
}

LaplaceCheck check_laplace(const IntensityMeasure& intensity,
                           const BoundedTestFunction& f, std::int64_t n_samples,
                           std::uint64_t seed, int quad_points_per_axis) {
  if (!f.value) throw InvalidArgument("check_laplace: null test function");
  if (n_samples < 2) throw InvalidArgument("check_laplace: need at least two samples");

  std::vector<double> vals(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(i));
    Configuration gamma = sample_poisson(intensity, rng);
    double s = 0.0;
    for (const auto& a : gamma.atoms()) s += a.multiplicity * f.value(a.position);
    vals[static_cast<std::size_t>(i)] = std::exp(s);
  }
  auto ms = stats::mean_stderr(vals);

  double integral;
  if (f.exact_exp_integral.has_value()) {
    integral = *f.exact_exp_integral;
  } else {
    const auto [lo, hi] = intensity.window().bounding_box();
    integral = integrate_box_simpson(lo, hi, quad_points_per_axis, [&](const Point& x) {
      double dens = intensity.density_at(x);
      if (dens == 0.0) return 0.0;
      return (std::expm1(f.value(x))) * dens;
    });
  }

  LaplaceCheck out;
  out.empirical = ms.mean;
  out.se = ms.se;
  out.closed_form = std::exp(integral);
  out.n_samples = n_samples;
  return out;
}

double intensity_mass_on(const IntensityMeasure& intensity, const Window& region) {
  if (!intensity.is_uniform())
    throw InvalidArgument("intensity_mass_on: closed form needs a uniform intensity");
  const Window& w = intensity.window();
  if (region.dim() != w.dim())
    throw DimensionMismatch("intensity_mass_on: dimension mismatch");

  if (region.kind() == Window::Kind::Box && w.kind() == Window::Kind::Box) {
    double vol = 1.0;
    for (int k = 0; k < w.dim(); ++k) {
      double a = std::max(region.lo()[k], w.lo()[k]);
      double b = std::min(region.hi()[k], w.hi()[k]);
      if (b <= a) return 0.0;
      vol *= b - a;
    }
    return intensity.rate() * vol;
  }

  if (region.kind() == Window::Kind::Ball && w.kind() == Window::Kind::Box) {
    for (int k = 0; k < w.dim(); ++k)
      if (region.center()[k] - region.radius() < w.lo()[k] ||
          region.center()[k] + region.radius() > w.hi()[k])
        throw InvalidArgument("intensity_mass_on: ball region must lie inside the window");
    return intensity.rate() * region.volume();
  }

  if (region.kind() == Window::Kind::Ball && w.kind() == Window::Kind::Ball) {
    if (distance(region.center(), w.center()) + region.radius() > w.radius())
      throw InvalidArgument("intensity_mass_on: ball region must lie inside the window");
    return intensity.rate() * region.volume();
  }

  throw InvalidArgument("intensity_mass_on: unsupported window/region combination");
}

std::vector<TightnessRow> tightness_profile(const PointProcessModel& model,
                                            const Window& region, int n_max,
                                            std::int64_t n_samples,
                                            std::uint64_t seed) {
  if (n_max < 1) throw InvalidArgument("tightness_profile: n_max must be >= 1");
  if (n_samples < 1) throw InvalidArgument("tightness_profile: n_samples must be >= 1");
  if (region.dim() != model_dim(model))
    throw DimensionMismatch("tightness_profile: region dimension mismatch");

  std::vector<std::int64_t> tail_hits(static_cast<std::size_t>(n_max) + 1, 0);
  ModelSampler sampler(model, seed);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Configuration gamma = sampler.next();
    auto c = count(gamma, region);
    auto top = std::min<std::int64_t>(c, n_max);
    for (std::int64_t n = 1; n <= top; ++n) ++tail_hits[static_cast<std::size_t>(n)];
  }

  bool has_exact = false;
  double region_mass = 0.0;
  if (const auto* poisson = std::get_if<PoissonModel>(&model)) {
    try {
      region_mass = intensity_mass_on(poisson->intensity, region);
      has_exact = true;
    } catch (const InvalidArgument&) {
      has_exact = false;
    }
  }

  std::vector<TightnessRow> rows;
  rows.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    TightnessRow row;
    row.n = n;
    row.empirical = n * static_cast<double>(tail_hits[static_cast<std::size_t>(n)]) /
                    static_cast<double>(n_samples);
    if (has_exact) {
      row.exact = n * stats::poisson_tail_geq(n, region_mass);
      row.has_exact = true;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace configlab
