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

#include "point_config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace configlab {

namespace {

void require_finite(const Point& p, const char* what) {
  for (double v : p.x) {
    if (!std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + ": coordinates must be finite");
    }
  }
}

void require_dim(int expected, const Point& p, const char* what) {
  if (p.dim() != expected) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(expected) + ", got " +
                            std::to_string(p.dim()));
  }
}

}  // namespace

double squared_distance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("squared_distance: dimension mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

Configuration::Configuration(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidArgument("Configuration: dimension must be >= 1");
}

Configuration::Configuration(int dim, const std::vector<Point>& points)
    : Configuration(dim) {
  for (const Point& p : points) add(p);
}

std::int64_t Configuration::total_mass() const {
  std::int64_t m = 0;
  for (const Atom& a : atoms_) m += a.multiplicity;
  return m;
}

void Configuration::add(const Point& p, int multiplicity) {
  require_dim(dim_, p, "Configuration::add");
  require_finite(p, "Configuration::add");
  if (multiplicity < 1) {
    throw InvalidArgument("Configuration::add: multiplicity must be >= 1");
  }
  auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), p,
      [](const Atom& a, const Point& q) { return a.position < q; });
  if (it != atoms_.end() && it->position == p) {
    it->multiplicity += multiplicity;
  } else {
    atoms_.insert(it, Atom{p, multiplicity});
  }
}

std::vector<Point> Configuration::expanded() const {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(total_mass()));
  for (const Atom& a : atoms_) {
    for (int i = 0; i < a.multiplicity; ++i) out.push_back(a.position);
  }
  return out;
}

bool operator==(const Configuration& a, const Configuration& b) {
  if (a.dim_ != b.dim_ || a.atoms_.size() != b.atoms_.size()) return false;
  for (std::size_t i = 0; i < a.atoms_.size(); ++i) {
    if (a.atoms_[i].position != b.atoms_[i].position ||
        a.atoms_[i].multiplicity != b.atoms_[i].multiplicity) {
      return false;
    }
  }
  return true;
}

Window Window::box(Point lo, Point hi) {
  require_finite(lo, "Window::box");
  require_finite(hi, "Window::box");
  if (lo.dim() != hi.dim() || lo.dim() < 1) {
    throw InvalidArgument("Window::box: lo and hi must share a dimension >= 1");
  }
  for (int i = 0; i < lo.dim(); ++i) {
    if (!(lo[i] < hi[i])) {
      throw InvalidArgument("Window::box: requires lo < hi on every axis");
    }
  }
  Window w;
  w.kind_ = Kind::Box;
  w.a_ = std::move(lo);
  w.b_ = std::move(hi);
  return w;
}

Window Window::ball(Point center, double radius) {
  require_finite(center, "Window::ball");
  if (center.dim() < 1) {
    throw InvalidArgument("Window::ball: center must have dimension >= 1");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("Window::ball: radius must be positive and finite");
  }
  Window w;
  w.kind_ = Kind::Ball;
  w.a_ = std::move(center);
  w.radius_ = radius;
  return w;
}

int Window::dim() const { return a_.dim(); }

const Point& Window::lo() const {
  if (kind_ != Kind::Box) throw InvalidArgument("Window::lo: not a box");
  return a_;
}

const Point& Window::hi() const {
  if (kind_ != Kind::Box) throw InvalidArgument("Window::hi: not a box");
  return b_;
}

const Point& Window::center() const {
  if (kind_ != Kind::Ball) throw InvalidArgument("Window::center: not a ball");
  return a_;
}

double Window::radius() const {
  if (kind_ != Kind::Ball) throw InvalidArgument("Window::radius: not a ball");
  return radius_;
}

bool Window::contains(const Point& p) const {
  require_dim(dim(), p, "Window::contains");
  if (kind_ == Kind::Box) {
    for (int i = 0; i < dim(); ++i) {
      if (p[i] < a_[i] || p[i] >= b_[i]) return false;
    }
    return true;
  }
  return squared_distance(p, a_) <= radius_ * radius_;
}

bool Window::contains_open(const Point& p) const {
  require_dim(dim(), p, "Window::contains_open");
  if (kind_ == Kind::Box) {
    for (int i = 0; i < dim(); ++i) {
      if (p[i] <= a_[i] || p[i] >= b_[i]) return false;
    }
    return true;
  }
  return squared_distance(p, a_) < radius_ * radius_;
}

double Window::distance_to_complement(const Point& p) const {
  if (!contains_open(p)) return 0.0;
  if (kind_ == Kind::Box) {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim(); ++i) {
      d = std::min(d, std::min(p[i] - a_[i], b_[i] - p[i]));
    }
    return d;
  }
  return radius_ - distance(p, a_);
}

double Window::volume() const {
  if (kind_ == Kind::Box) {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= b_[i] - a_[i];
    return v;
  }
  const double d = dim();
  return std::pow(std::numbers::pi, d / 2.0) * std::pow(radius_, d) /
         std::tgamma(d / 2.0 + 1.0);
}

double Window::diameter() const {
  if (kind_ == Kind::Ball) return 2.0 * radius_;
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double e = b_[i] - a_[i];
    s += e * e;
  }
  return std::sqrt(s);
}

std::pair<Point, Point> Window::bounding_box() const {
  if (kind_ == Kind::Box) return {a_, b_};
  Point lo = a_, hi = a_;
  for (int i = 0; i < dim(); ++i) {
    lo[i] -= radius_;
    hi[i] += radius_;
  }
  return {lo, hi};
}

Point Window::sample_uniform(Rng& rng) const {
  if (kind_ == Kind::Box) {
    Point p = a_;
    for (int i = 0; i < dim(); ++i) p[i] = rng.uniform(a_[i], b_[i]);
    return p;
  }
  // Rejection from the bounding box; acceptance is at worst ~2% in dim 3.
  const auto [lo, hi] = bounding_box();
  for (;;) {
    Point p = lo;
    for (int i = 0; i < dim(); ++i) p[i] = rng.uniform(lo[i], hi[i]);
    if (contains(p)) return p;
  }
}

std::int64_t count(const Configuration& gamma, const Window& window) {
  if (gamma.dim() != window.dim()) {
    throw DimensionMismatch("count: configuration and window dimensions differ");
  }
  std::int64_t n = 0;
  for (const Atom& a : gamma.atoms()) {
    if (window.contains(a.position)) n += a.multiplicity;
  }
  return n;
}

Configuration restrict_to(const Configuration& gamma, const Window& window) {
  if (gamma.dim() != window.dim()) {
    throw DimensionMismatch(
        "restrict_to: configuration and window dimensions differ");
  }
  Configuration out(gamma.dim());
  for (const Atom& a : gamma.atoms()) {
    if (window.contains(a.position)) out.add(a.position, a.multiplicity);
  }
  return out;
}

Configuration superpose(const Configuration& a, const Configuration& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("superpose: dimensions differ");
  }
  Configuration out = a;
  for (const Atom& atom : b.atoms()) out.add(atom.position, atom.multiplicity);
  return out;
}

bool in_concentration_set(const Configuration& gamma, const Window& window,
                          std::int64_t n, CountMode mode) {
  if (n < 0) throw InvalidArgument("in_concentration_set: n must be >= 0");
  const std::int64_t c = count(gamma, window);
  switch (mode) {
    case CountMode::Eq:
      return c == n;
    case CountMode::Geq:
      return c >= n;
    case CountMode::Leq:
      return c <= n;
  }
  throw InvalidArgument("in_concentration_set: unknown mode");
}

Configuration unlabel(const LabeledSequence& seq) {
  Configuration out(seq.dim);
  for (const Point& p : seq.points) out.add(p);
  return out;
}

LabeledSequence truncate(const LabeledSequence& seq, std::size_t m) {
  LabeledSequence out;
  out.dim = seq.dim;
  const std::size_t keep = std::min(m, seq.points.size());
  out.points.assign(seq.points.begin(),
                    seq.points.begin() + static_cast<std::ptrdiff_t>(keep));
  return out;
}

LabeledSequence canonical_label(const Configuration& gamma,
                                const Point& anchor) {
  require_dim(gamma.dim(), anchor, "canonical_label");
  LabeledSequence out;
  out.dim = gamma.dim();
  out.points = gamma.expanded();
  std::stable_sort(out.points.begin(), out.points.end(),
                   [&anchor](const Point& p, const Point& q) {
                     const double dp = squared_distance(p, anchor);
                     const double dq = squared_distance(q, anchor);
                     if (dp != dq) return dp < dq;
                     return p < q;
                   });
  return out;
}

LabeledSequence canonical_label(const Configuration& gamma) {
  return canonical_label(gamma, Point(std::vector<double>(
                                    static_cast<std::size_t>(gamma.dim()))));
}

}  // namespace configlab
