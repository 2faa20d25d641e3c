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

#ifndef CONFIGLAB_CORE_SAMPLERS_HPP_
#define CONFIGLAB_CORE_SAMPLERS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "point_config.hpp"
#include "rng.hpp"

namespace configlab {

// A finite measure on a window: either a uniform rate or a bounded density
// with respect to Lebesgue measure (zero outside the window either way).
class IntensityMeasure {
 public:
  static IntensityMeasure uniform(const Window& window, double rate = 1.0);
  static IntensityMeasure with_density(const Window& window,
                                       std::function<double(const Point&)> density,
                                       double density_bound, double total_mass);

  const Window& window() const { return window_; }
  double total_mass() const { return total_mass_; }
  bool is_uniform() const { return !density_; }
  double rate() const;

  // Density with respect to Lebesgue measure, window indicator included.
  double density_at(const Point& p) const;

  // One point distributed as this measure normalized to a probability law.
  Point sample_location(Rng& rng) const;

 private:
  explicit IntensityMeasure(Window window) : window_(std::move(window)) {}

  Window window_;
  std::function<double(const Point&)> density_;
  double rate_ = 1.0;
  double density_bound_ = 1.0;
  double total_mass_ = 0.0;
};

// One atom of the mixing law for a mixed Poisson model: a scale applied to
// the intensity, with its probability.
struct MixingAtom {
  double scale = 1.0;
  double weight = 1.0;
};
using MixingLaw = std::vector<MixingAtom>;

// Requires positive scales and weights summing to 1 within 1e-12.
void validate_mixing_law(const MixingLaw& law);
double sample_mixing_scale(const MixingLaw& law, Rng& rng);

using FreePotentialFn = std::function<double(const Point&)>;
using PairPotentialFn = std::function<double(const Point&, const Point&)>;

// Energy of a configuration: sum of the free potential over points (with
// multiplicity) plus the pair potential over unordered pairs of distinct
// expanded points, so an atom of multiplicity m contributes m*(m-1)/2 self
// pairs.  Potentials may return +infinity (hard exclusion) but never NaN.
double hamiltonian(const Configuration& gamma, const FreePotentialFn& phi,
                   const PairPotentialFn& psi);

struct McmcParams {
  std::int64_t burn_in = 5000;
  std::int64_t thinning = 25;
  double p_birth = 1.0 / 3.0;
  double p_death = 1.0 / 3.0;
  double p_move = 1.0 / 3.0;
  // Standard deviation of the Gaussian move proposal; a non-positive value
  // selects 0.1 times the window diameter.
  double move_scale = 0.0;
};

struct PoissonModel {
  IntensityMeasure intensity;
};

struct MixedPoissonModel {
  IntensityMeasure intensity;
  MixingLaw mixing;
};

struct GibbsModel {
  IntensityMeasure intensity;
  FreePotentialFn phi;
  PairPotentialFn psi;
  McmcParams mcmc;
  std::optional<Configuration> initial;  // default: empty configuration
};

// Eigenvalues of an n x n matrix with independent standard complex Gaussian
// entries, as a planar configuration.
struct GinibreModel {
  int matrix_size = 1;
};

using PointProcessModel =
    std::variant<PoissonModel, MixedPoissonModel, GibbsModel, GinibreModel>;

int model_dim(const PointProcessModel& model);

Configuration sample_poisson(const IntensityMeasure& intensity, Rng& rng);
Configuration sample_mixed_poisson(const IntensityMeasure& intensity,
                                   const MixingLaw& mixing, Rng& rng);
Configuration sample_ginibre(int matrix_size, Rng& rng);

// Birth-death-move Metropolis chain targeting the Gibbs measure with the
// given potentials relative to the Poisson model of the same intensity.
// Construction validates the parameters, checks that the initial state has
// finite energy, and runs the burn-in; a burn-in acceptance rate below 0.1%
// raises ChainStuck.
class GibbsChain {
 public:
  GibbsChain(GibbsModel model, std::uint64_t seed);

  // Advances by the thinning interval and returns the new state.
  Configuration next();
  const Configuration& state() const { return state_; }
  double acceptance_rate() const;
  std::int64_t steps_taken() const { return proposed_; }

 private:
  void step_once();
  double delta_h_birth(const Configuration& gamma, const Point& x) const;
  double delta_h_death(const Configuration& gamma, const Point& x) const;

  GibbsModel model_;
  Rng rng_;
  Configuration state_;
  double move_scale_ = 0.0;
  std::int64_t proposed_ = 0;
  std::int64_t accepted_ = 0;
};

// Uniform sampling front end over the model variant.  Poisson-type models
// draw independent samples; the Gibbs model advances an internal chain.
class ModelSampler {
 public:
  ModelSampler(PointProcessModel model, std::uint64_t seed);

  Configuration next();
  const PointProcessModel& model() const { return model_; }

 private:
  PointProcessModel model_;
  Rng rng_;
  std::unique_ptr<GibbsChain> chain_;
};

// Monte Carlo check of the identity
//   E sum_{x in gamma} u(gamma, x) = E int u(gamma + delta_x, x) m(dx)
// under the Poisson model with intensity m.  The inner integral is evaluated
// by stratified uniform draws over the window's bounding box, weighted by the
// intensity density; the two sides are paired per sample, and `se` is the
// standard error of the mean pairwise difference.
struct MeckeCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double se = 0.0;
  std::int64_t n_samples = 0;
};
MeckeCheck check_mecke(
    const IntensityMeasure& intensity,
    const std::function<double(const Configuration&, const Point&)>& u,
    std::int64_t n_samples, std::uint64_t seed, int strata_per_axis = 64);

// Bounded test function for the Laplace functional check.  Support must lie
// inside the window.  When the exact value of int (e^f - 1) dm is supplied it
// is used directly; otherwise the integral is computed by Simpson quadrature
// over the window's bounding box.
struct BoundedTestFunction {
  std::function<double(const Point&)> value;
  std::optional<double> exact_exp_integral;
};

struct LaplaceCheck {
  double empirical = 0.0;
  double se = 0.0;
  double closed_form = 0.0;
  std::int64_t n_samples = 0;
};
LaplaceCheck check_laplace(const IntensityMeasure& intensity,
                           const BoundedTestFunction& f, std::int64_t n_samples,
                           std::uint64_t seed, int quad_points_per_axis = 257);

// Empirical tail profile n -> n * P(region holds at least n points), with the
// closed-form Poisson value when the model is Poisson and the region mass is
// available in closed form.
struct TightnessRow {
  int n = 0;
  double empirical = 0.0;
  double exact = 0.0;
  bool has_exact = false;
};
std::vector<TightnessRow> tightness_profile(const PointProcessModel& model,
                                            const Window& region, int n_max,
                                            std::int64_t n_samples,
                                            std::uint64_t seed);

// Mass the intensity assigns to a region, in closed form.  Supported when the
// intensity is uniform and the region is a box, or a ball contained in the
// window; other combinations raise InvalidArgument.
double intensity_mass_on(const IntensityMeasure& intensity, const Window& region);

}  // namespace configlab

#endif  // CONFIGLAB_CORE_SAMPLERS_HPP_
