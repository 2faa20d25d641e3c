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

#include "transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace configlab::transport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(const Configuration& a, const Configuration& b,
                      const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(what) + ": dimensions differ");
  }
}

std::vector<double> squared_cost_matrix(const std::vector<Point>& rows,
                                        const std::vector<Point>& cols) {
  std::vector<double> cost(rows.size() * cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      cost[i * cols.size() + j] = squared_distance(rows[i], cols[j]);
    }
  }
  return cost;
}

}  // namespace

ExtendedDistance ExtendedDistance::finite(double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument("ExtendedDistance: value must be finite and >= 0");
  }
  return ExtendedDistance(false, v);
}

double ExtendedDistance::value() const {
  if (infinite_) {
    throw InvalidArgument("ExtendedDistance: no finite value to read");
  }
  return value_;
}

ExtendedDistance operator+(const ExtendedDistance& a,
                           const ExtendedDistance& b) {
  if (a.infinite_ || b.infinite_) return ExtendedDistance::infinity();
  return ExtendedDistance::finite(a.value_ + b.value_);
}

bool operator<(const ExtendedDistance& a, const ExtendedDistance& b) {
  if (a.infinite_) return false;
  if (b.infinite_) return true;
  return a.value_ < b.value_;
}

bool operator==(const ExtendedDistance& a, const ExtendedDistance& b) {
  if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
  return a.value_ == b.value_;
}

AssignmentResult solve_assignment(std::size_t rows, std::size_t cols,
                                  const std::vector<double>& cost_row_major) {
  if (rows > cols) {
    throw InvalidArgument("solve_assignment: requires rows <= cols");
  }
  if (cost_row_major.size() != rows * cols) {
    throw InvalidArgument("solve_assignment: cost matrix size mismatch");
  }
  AssignmentResult result;
  result.row_to_col.assign(rows, -1);
  if (rows == 0) return result;

  const auto cost = [&](std::size_t i, std::size_t j) {
    return cost_row_major[i * cols + j];
  };

  // Shortest augmenting paths with dual potentials.  Column 0 of the working
  // arrays is a virtual root; real columns are shifted by one.
  const std::size_t m = cols;
  std::vector<double> pot_row(rows + 1, 0.0);
  std::vector<double> pot_col(m + 1, 0.0);
  std::vector<int> col_to_row(m + 1, 0);  // 0 = unassigned (rows are 1-based)
  std::vector<int> parent(m + 1, 0);

  for (std::size_t i = 1; i <= rows; ++i) {
    col_to_row[0] = static_cast<int>(i);
    std::size_t j0 = 0;
    std::vector<double> min_red(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = static_cast<std::size_t>(col_to_row[j0]);
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0 - 1, j - 1) - pot_row[i0] - pot_col[j];
        if (reduced < min_red[j]) {
          min_red[j] = reduced;
          parent[j] = static_cast<int>(j0);
        }
        if (min_red[j] < delta) {
          delta = min_red[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          pot_row[static_cast<std::size_t>(col_to_row[j])] += delta;
          pot_col[j] -= delta;
        } else {
          min_red[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[j0] != 0);
    // Walk the augmenting path back to the root, flipping assignments.
    while (j0 != 0) {
      const std::size_t j1 = static_cast<std::size_t>(parent[j0]);
      col_to_row[j0] = col_to_row[j1];
      j0 = j1;
    }
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (col_to_row[j] != 0) {
      result.row_to_col[static_cast<std::size_t>(col_to_row[j] - 1)] =
          static_cast<int>(j - 1);
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    total += cost(i, static_cast<std::size_t>(result.row_to_col[i]));
  }
  result.total_cost = total;
  return result;
}

ExtendedDistance d_upsilon(const Configuration& a, const Configuration& b) {
  require_same_dim(a, b, "d_upsilon");
  if (a.total_mass() != b.total_mass()) return ExtendedDistance::infinity();
  if (a.total_mass() == 0) return ExtendedDistance::finite(0.0);
  return ExtendedDistance::finite(std::sqrt(optimal_matching(a, b).cost));
}

Matching optimal_matching(const Configuration& a, const Configuration& b) {
  require_same_dim(a, b, "optimal_matching");
  if (a.total_mass() != b.total_mass()) {
    throw SectorMismatch(
        "optimal_matching: configurations have different total mass");
  }
  Matching matching;
  const std::vector<Point> pa = a.expanded();
  const std::vector<Point> pb = b.expanded();
  if (pa.empty()) return matching;

  const AssignmentResult solved =
      solve_assignment(pa.size(), pb.size(), squared_cost_matrix(pa, pb));
  matching.pairs.reserve(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    matching.pairs.emplace_back(static_cast<int>(i), solved.row_to_col[i]);
  }
  matching.cost = solved.total_cost;
  return matching;
}

ExtendedDistance brute_force_distance(const Configuration& a,
                                      const Configuration& b,
                                      std::int64_t mass_cap) {
  require_same_dim(a, b, "brute_force_distance");
  if (a.total_mass() > mass_cap || b.total_mass() > mass_cap) {
    throw OracleTooLarge("brute_force_distance: total mass exceeds cap " +
                         std::to_string(mass_cap));
  }
  if (a.total_mass() != b.total_mass()) return ExtendedDistance::infinity();
  const std::vector<Point> pa = a.expanded();
  const std::vector<Point> pb = b.expanded();
  if (pa.empty()) return ExtendedDistance::finite(0.0);

  std::vector<std::size_t> perm(pb.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      total += squared_distance(pa[i], pb[perm[i]]);
      if (total >= best) break;
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return ExtendedDistance::finite(std::sqrt(best));
}

ExtendedDistance rho_gamma_u(const Configuration& eta,
                             const Configuration& gamma,
                             const Window& u_window) {
  require_same_dim(eta, gamma, "rho_gamma_u");
  if (eta.dim() != u_window.dim()) {
    throw DimensionMismatch("rho_gamma_u: window dimension differs");
  }

  // Targets: the part of gamma inside the open window, written out.
  std::vector<Point> targets;
  for (const Atom& atom : gamma.atoms()) {
    if (u_window.contains_open(atom.position)) {
      for (int k = 0; k < atom.multiplicity; ++k) targets.push_back(atom.position);
    }
  }
  const std::vector<Point> sources = eta.expanded();
  if (sources.size() < targets.size()) return ExtendedDistance::infinity();
  if (sources.empty()) return ExtendedDistance::finite(0.0);

  // Square matrix: the first columns are the fixed targets, the remaining
  // ones are escape slots whose cost is the squared distance to the closed
  // complement of the window (zero for atoms already outside).
  const std::size_t n = sources.size();
  const std::size_t t = targets.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double exit = u_window.distance_to_complement(sources[i]);
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = j < t ? squared_distance(sources[i], targets[j])
                              : exit * exit;
    }
  }
  return ExtendedDistance::finite(
      std::sqrt(solve_assignment(n, n, cost).total_cost));
}

double mcshane_extend(
    const std::vector<std::pair<Configuration, double>>& samples, double lip,
    const Configuration& query, ExtensionSide side) {
  if (samples.empty()) {
    throw InvalidArgument("mcshane_extend: sample set must be non-empty");
  }
  if (!(lip >= 0.0) || !std::isfinite(lip)) {
    throw InvalidArgument("mcshane_extend: Lipschitz constant must be >= 0");
  }
  // The declared constant must hold on the sample set itself.
  constexpr double kSlack = 1e-9;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const ExtendedDistance d = d_upsilon(samples[i].first, samples[j].first);
      if (d.is_infinite()) continue;
      if (std::abs(samples[i].second - samples[j].second) >
          lip * d.value() + kSlack) {
        throw NotLipschitzOnA(
            "mcshane_extend: sample values violate the declared constant");
      }
    }
  }

  double sample_min = kInf, sample_max = -kInf;
  for (const auto& [_, v] : samples) {
    sample_min = std::min(sample_min, v);
    sample_max = std::max(sample_max, v);
  }

  if (side == ExtensionSide::Upper) {
    double bound = kInf;
    for (const auto& [a, v] : samples) {
      const ExtendedDistance d = d_upsilon(query, a);
      if (d.is_infinite()) continue;
      bound = std::min(bound, v + lip * d.value());
    }
    return std::min(sample_max, bound);
  }
  double bound = -kInf;
  for (const auto& [a, v] : samples) {
    const ExtendedDistance d = d_upsilon(query, a);
    if (d.is_infinite()) continue;
    bound = std::max(bound, v - lip * d.value());
  }
  return std::max(sample_min, bound);
}

}  // namespace configlab::transport
