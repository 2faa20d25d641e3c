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

#ifndef CONFIGLAB_CORE_DIFFUSION_HPP_
#define CONFIGLAB_CORE_DIFFUSION_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cylinder.hpp"
#include "point_config.hpp"
#include "rng.hpp"
#include "samplers.hpp"
#include "transport.hpp"

namespace configlab::diffusion {

// Interacting Brownian particles in a finite window.  The invariant law is
// the point process model: a Gibbs model supplies the Langevin drift
// -1/2 grad H, Poisson-type models mean free motion.  The boundary is either
// reflecting or periodic; both require a box window.

struct ReflectingBox {
  Window window;
};

// Periodic boundary with the given edge lengths, anchored at the lower
// corner of the model window.
struct Torus {
  std::vector<double> period;
};

using Geometry = std::variant<ReflectingBox, Torus>;

struct DiffusionSpec {
  PointProcessModel model;
  Geometry geometry;
  double dt = 1e-3;
  double horizon = 1.0;
};

// Checks dt in (0, 1e-2 * horizon], a box-window model (Ginibre has no
// window and is rejected), and geometry consistent with the model window.
void validate_spec(const DiffusionSpec& spec);

// The box window the dynamics lives in.
const Window& spec_window(const DiffusionSpec& spec);

// Measurable sets of configurations used as start / target events.

// Configurations whose count in `region` compares to n per `mode`.
struct Concentration {
  Window region;
  std::int64_t n = 0;
  CountMode mode = CountMode::Eq;
};

// Configurations within `tolerance` (in the escape-padded matching distance
// rho) of agreeing with gamma_ref inside u_window.  Tolerance 0 keeps the
// literal set {eta : eta restricted to u_window == gamma_ref restricted},
// which has zero mass under continuous models; a positive tolerance thickens
// it into a usable event.
struct LambdaSet {
  Configuration gamma_ref;
  Window u_window;
  double tolerance = 0.0;
};

// Closed transport-distance ball around a fixed configuration.
struct DistanceBall {
  Configuration center;
  double radius = 0.0;
};

struct CustomEvent {
  std::string name;
  std::function<bool(const Configuration&)> predicate;
};

using EventSet = std::variant<Concentration, LambdaSet, DistanceBall, CustomEvent>;

EventSet whole_space();

bool event_contains(const EventSet& event, const Configuration& gamma);

// Certified lower bound on the transport distance between two event sets.
// Supported pairs: DistanceBall / DistanceBall (distance of centers minus the
// radii), and LambdaSet / LambdaSet over the same window (minimum-cost
// matching of the two restricted references where any atom may instead exit
// through the window boundary at its exit cost, minus the tolerances).  Other
// combinations throw NoDistanceCertificate.
transport::ExtendedDistance event_distance_lower(const EventSet& a,
                                                 const EventSet& b);

// One Euler-Maruyama step of every expanded atom: drift from the Gibbs
// Hamiltonian (finite differences), Gaussian noise of per-coordinate
// variance dt, then reflection into the box or wrap onto the torus.  Mass is
// conserved.  Throws StepTooLarge when a drift increment exceeds half the
// window diameter.
Configuration step(const Configuration& state, const DiffusionSpec& spec,
                   Rng& rng);

// `steps` consecutive steps; an empty state is returned unchanged.
Configuration run_path(const Configuration& start, const DiffusionSpec& spec,
                       std::int64_t steps, Rng& rng);

struct SemigroupEstimate {
  double estimate = 0.0;   // (1/n) sum 1_lambda(start) * 1_xi(end)
  double se = 0.0;         // binomial standard error
  std::int64_t n_paths = 0;
  std::int64_t hits = 0;         // paths counted by the estimator
  std::int64_t lambda_hits = 0;  // starts that landed in lambda
};

// Monte Carlo estimate of the constrained transition mass
// T_t = integral over lambda of P_gamma(X_t in xi) d(mu).  Starts are model
// samples; only starts inside lambda are propagated, each on its own derived
// rng stream indexed by the sample position, so results do not depend on a
// worker count.  Requires 0 <= t <= horizon with t/dt integral.
SemigroupEstimate semigroup_estimate(const EventSet& xi, const EventSet& lambda,
                                     double t, const DiffusionSpec& spec,
                                     std::int64_t n_paths, std::uint64_t seed);

struct GaussianBoundRow {
  double t = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double bound = 0.0;      // sqrt(mass_a * mass_b) * exp(-d^2 / (2t))
  bool violation = false;  // estimate - 3 se > bound
};

struct GaussianBoundReport {
  double mass_a = 0.0;
  double mass_a_se = 0.0;
  double mass_b = 0.0;
  double mass_b_se = 0.0;
  // Certified lower bound on the set distance; infinite distance reports -1
  // here and forces every bound to 0.
  double distance_lower = 0.0;
  std::vector<GaussianBoundRow> rows;
  bool pass = true;
};

// Tests the two-set heat-flow bound
//   T_t(a, b) <= sqrt(mu(a) mu(b)) * exp(-d(a, b)^2 / (2t))
// with the certified distance lower bound standing in for d(a, b) (a weaker,
// still valid bound).  Masses come from a dedicated sample stream.
GaussianBoundReport gaussian_bound_check(const EventSet& lambda_a,
                                         const EventSet& lambda_b,
                                         const std::vector<double>& t_grid,
                                         const DiffusionSpec& spec,
                                         std::int64_t n_paths,
                                         std::uint64_t seed);

struct VaradhanRow {
  double t = 0.0;
  double estimate = 0.0;  // T-hat_t = lambda mass estimate * conditional hits
  double se = 0.0;
  double rate = 0.0;      // -2 t log T-hat_t
  // Noise on the rate from the conditional hit fraction only.  The mass
  // factor is shared by every row and contributes an exactly linear term in
  // t, so it cannot move the extrapolated intercept.
  double rate_se = 0.0;
};

struct VaradhanReport {
  std::vector<VaradhanRow> rows;
  double extrapolated = 0.0;     // least-squares intercept of rate vs t
  double extrapolated_se = 0.0;
  double lambda_mass = 0.0;      // acceptance fraction of the start sampler
  // Squared distance reference min over start pool of d(gamma, xi)^2, when
  // xi is a DistanceBall or LambdaSet; empty otherwise.
  std::optional<double> reference;
  std::string openness_note;
};

// Short-time decay profile rate(t) = -2 t log T-hat_t on a decreasing grid,
// with a linear-in-t extrapolation to t = 0.  Starts are drawn from the
// model conditioned on lambda by rejection; n_paths is the size of that
// conditional pool, reused across the grid with per-(row, path) rng streams.
// Rows with fewer than 10 hits throw InsufficientPaths.
VaradhanReport varadhan_profile(const EventSet& xi, const EventSet& lambda,
                                const std::vector<double>& t_grid,
                                const DiffusionSpec& spec,
                                std::int64_t n_paths, std::uint64_t seed);

struct CdcReport {
  double value = 0.0;  // intercept of E[(u(X_t) - u(gamma))^2] / t at t = 0
  double se = 0.0;
  std::vector<double> t_grid;
  std::vector<double> ratios;
  std::vector<double> ratio_ses;
};

// Short-time variance ratio E[(u(X_t) - u(gamma))^2] / t extrapolated
// linearly to t = 0.  For a cylinder function under free dynamics this
// converges to the lifted square field (per-coordinate noise variance is dt,
// so no extra factor).  Requires gamma inside the window with margin
// 3 sqrt(max t) from a reflecting boundary (BoundaryContamination otherwise).
CdcReport carre_du_champ_mc(const std::function<double(const Configuration&)>& u,
                            const Configuration& gamma,
                            const std::vector<double>& t_grid,
                            const DiffusionSpec& spec, std::int64_t n_paths,
                            std::uint64_t seed);

CdcReport carre_du_champ_mc(const CylinderFunction& u,
                            const Configuration& gamma,
                            const std::vector<double>& t_grid,
                            const DiffusionSpec& spec, std::int64_t n_paths,
                            std::uint64_t seed);

// Built-in Lipschitz family: gamma |-> scale * min(rho(gamma), cap) where
// rho is the escape-padded matching distance to the set of configurations
// agreeing with gamma_ref inside u_window (infinite rho clips to cap).  The
// family member is |scale|-Lipschitz for the transport distance.
struct LipschitzFunctionSpec {
  Configuration gamma_ref;
  Window u_window;
  double cap = 1.0;
  double scale = 1.0;
};

double lipschitz_value(const LipschitzFunctionSpec& u_spec,
                       const Configuration& gamma);

struct RademacherOptions {
  std::int64_t n_cdc_gammas = 50;
  std::vector<double> cdc_t_grid = {0.01, 0.005, 0.0025};
  std::int64_t cdc_n_paths = 2000;
  // Sampling gives up after this multiple of the requested pair count.
  std::int64_t max_attempt_factor = 60;
};

struct RademacherReport {
  double lipschitz_constant = 0.0;
  double max_ratio = 0.0;        // max |u(x) - u(y)| / d(x, y), finite pairs
  std::int64_t finite_pairs = 0;
  double max_cdc = 0.0;          // max short-time square-field estimate
  std::int64_t cdc_gammas = 0;
  bool pass = false;
};

// Two-sided check that the built-in Lipschitz family behaves like its
// constant L: (a) difference quotients over sampled pairs at finite distance
// stay <= L + 1e-9; (b) the short-time square-field estimate stays
// <= 1.1 L^2 on sampled configurations away from the boundary.
RademacherReport rademacher_check(const LipschitzFunctionSpec& u_spec,
                                  const DiffusionSpec& spec,
                                  std::int64_t n_pairs, std::uint64_t seed,
                                  const RademacherOptions& options = {});

struct StationarityReport {
  std::vector<double> p_values;  // one two-sample test per statistic window
  double alpha = 0.01;           // Bonferroni-adjusted to alpha / #windows
  bool pass = false;
};

// Compares count statistics of the invariant law at time 0 against the
// propagated law at the horizon, across independent chains split half and
// half.  Torus geometry only: reflection makes finite-window invariance
// approximate, the periodic free case is exact.  negate_drift flips the
// drift sign as a deliberate fault for negative-control runs.
StationarityReport stationarity_test(const DiffusionSpec& spec, double horizon,
                                     const std::vector<Window>& statistics,
                                     std::int64_t n_chains, std::uint64_t seed,
                                     bool negate_drift = false);

}  // namespace configlab::diffusion

#endif  // CONFIGLAB_CORE_DIFFUSION_HPP_
