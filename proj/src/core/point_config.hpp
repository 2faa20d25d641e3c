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

#ifndef CONFIGLAB_CORE_POINT_CONFIG_HPP_
#define CONFIGLAB_CORE_POINT_CONFIG_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace configlab {

// A point of the ambient Euclidean space.
struct Point {
  std::vector<double> x;

  Point() = default;
  explicit Point(std::vector<double> coords) : x(std::move(coords)) {}

  int dim() const { return static_cast<int>(x.size()); }
  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Point& a, const Point& b) { return a.x == b.x; }
  friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
  // Lexicographic order; used for canonical atom storage and tie-breaking.
  friend bool operator<(const Point& a, const Point& b) { return a.x < b.x; }
};

// Convenience for one-dimensional points.
inline Point point1(double v) { return Point({v}); }

double squared_distance(const Point& a, const Point& b);
double distance(const Point& a, const Point& b);

// One atom of a configuration: a location carrying an integer multiplicity.
struct Atom {
  Point position;
  int multiplicity = 1;
};

// A finite point configuration: a multiset of points with positive integer
// multiplicities.  Atoms at exactly equal coordinates are merged; the atom
// list is kept sorted lexicographically, so equal multisets compare equal.
class Configuration {
 public:
  explicit Configuration(int dim);
  Configuration(int dim, const std::vector<Point>& points);

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  // Total mass: the number of points counted with multiplicity.
  std::int64_t total_mass() const;

  void add(const Point& p, int multiplicity = 1);

  // Points listed with multiplicity, in stored (lexicographic) atom order.
  std::vector<Point> expanded() const;

  friend bool operator==(const Configuration& a, const Configuration& b);
  friend bool operator!=(const Configuration& a, const Configuration& b) {
    return !(a == b);
  }

 private:
  int dim_;
  std::vector<Atom> atoms_;
};

// An observation window: an axis-aligned half-open box [lo, hi) or a closed
// ball.  Counting and restriction use exactly this membership rule, so
// restrictions to a partition of boxes split a configuration without overlap.
class Window {
 public:
  enum class Kind { Box, Ball };

  static Window box(Point lo, Point hi);
  static Window ball(Point center, double radius);

  Kind kind() const { return kind_; }
  int dim() const;
  const Point& lo() const;
  const Point& hi() const;
  const Point& center() const;
  double radius() const;

  bool contains(const Point& p) const;
  // Strict interior membership: open box (lo, hi) / open ball.
  bool contains_open(const Point& p) const;
  // Distance from p to the complement of the open window; 0 outside.
  double distance_to_complement(const Point& p) const;

  double volume() const;
  double diameter() const;
  std::pair<Point, Point> bounding_box() const;
  Point sample_uniform(Rng& rng) const;

 private:
  Window() = default;

  Kind kind_ = Kind::Box;
  Point a_;  // box lo / ball center
  Point b_;  // box hi
  double radius_ = 0.0;
};

std::int64_t count(const Configuration& gamma, const Window& window);
Configuration restrict_to(const Configuration& gamma, const Window& window);
Configuration superpose(const Configuration& a, const Configuration& b);

enum class CountMode { Eq, Geq, Leq };

// Membership in the concentration set: does the window hold exactly / at
// least / at most n points of gamma?
bool in_concentration_set(const Configuration& gamma, const Window& window,
                          std::int64_t n, CountMode mode);

// A finite labeled sequence of points; the order carries information.
struct LabeledSequence {
  int dim = 0;
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
};

// Forgets the order: the configuration whose atoms are the listed points.
Configuration unlabel(const LabeledSequence& seq);

// Keeps the first min(M, length) points.
LabeledSequence truncate(const LabeledSequence& seq, std::size_t m);

// The canonical labeling of a configuration: points listed with multiplicity,
// sorted by distance from the anchor, ties broken lexicographically.  This is
// a measurable right inverse of unlabel, not a continuous one.
LabeledSequence canonical_label(const Configuration& gamma,
                                const Point& anchor);
LabeledSequence canonical_label(const Configuration& gamma);

}  // namespace configlab

#endif  // CONFIGLAB_CORE_POINT_CONFIG_HPP_
