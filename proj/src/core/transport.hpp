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

#ifndef CONFIGLAB_CORE_TRANSPORT_HPP_
#define CONFIGLAB_CORE_TRANSPORT_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "point_config.hpp"

namespace configlab::transport {

// A distance value on [0, +inf].  +inf is a distinguished state, never a
// floating-point sentinel: configurations of different total mass are at
// infinite transport distance from one another.
class ExtendedDistance {
 public:
  static ExtendedDistance infinity() { return ExtendedDistance(true, 0.0); }
  static ExtendedDistance finite(double v);

  bool is_infinite() const { return infinite_; }
  // The finite value; throws InvalidArgument when infinite.
  double value() const;

  // Infinite absorbs addition with any finite value.
  friend ExtendedDistance operator+(const ExtendedDistance& a,
                                    const ExtendedDistance& b);
  // Infinite compares greater than every finite value.
  friend bool operator<(const ExtendedDistance& a, const ExtendedDistance& b);
  friend bool operator==(const ExtendedDistance& a, const ExtendedDistance& b);
  friend bool operator!=(const ExtendedDistance& a, const ExtendedDistance& b) {
    return !(a == b);
  }
  friend bool operator<=(const ExtendedDistance& a, const ExtendedDistance& b) {
    return a < b || a == b;
  }

 private:
  ExtendedDistance(bool infinite, double value)
      : infinite_(infinite), value_(value) {}

  bool infinite_;
  double value_;
};

// An optimal point-to-point matching between two configurations of equal
// total mass.  Indices refer to the expanded atom lists (multiplicities
// written out) in stored order, i.e. Configuration::expanded().
struct Matching {
  std::vector<std::pair<int, int>> pairs;
  // The achieved total squared displacement; the distance is sqrt(cost).
  double cost = 0.0;
};

// Minimum-cost assignment on a dense cost matrix with rows <= cols, by the
// shortest-augmenting-path method with dual potentials (O(rows^2 * cols)).
struct AssignmentResult {
  std::vector<int> row_to_col;
  double total_cost = 0.0;
};
AssignmentResult solve_assignment(std::size_t rows, std::size_t cols,
                                  const std::vector<double>& cost_row_major);

// The transportation distance between configurations: the square root of the
// minimal total squared displacement over perfect matchings of the expanded
// atoms, infinite when the total masses differ.
ExtendedDistance d_upsilon(const Configuration& a, const Configuration& b);

// The matching achieving d_upsilon; throws SectorMismatch when the total
// masses differ (no matching exists).
Matching optimal_matching(const Configuration& a, const Configuration& b);

// Exhaustive permutation oracle for d_upsilon.  Independent of the
// assignment solver; refuses total mass beyond the cap with OracleTooLarge.
ExtendedDistance brute_force_distance(const Configuration& a,
                                      const Configuration& b,
                                      std::int64_t mass_cap = 8);

// Distance from eta to the set of configurations that agree with gamma
// inside the open window u_window and are arbitrary outside it.  Solved as an
// assignment of eta's expanded atoms to the targets of gamma inside u_window
// plus "escape" slots at squared cost d(x, complement)^2; infinite when eta
// has less total mass than gamma has inside u_window.
ExtendedDistance rho_gamma_u(const Configuration& eta,
                             const Configuration& gamma,
                             const Window& u_window);

enum class ExtensionSide { Upper, Lower };

// Constrained extension of sampled values beyond their sample set, preserving
// the Lipschitz constant and the sampled bounds:
//   Upper:  min( max_A f , min_a f(a) + L * d(query, a) )
//   Lower:  max( min_A f , max_a f(a) - L * d(query, a) )
// Sample pairs at infinite distance impose no constraint on each other.
double mcshane_extend(
    const std::vector<std::pair<Configuration, double>>& samples, double lip,
    const Configuration& query, ExtensionSide side);

}  // namespace configlab::transport

#endif  // CONFIGLAB_CORE_TRANSPORT_HPP_
