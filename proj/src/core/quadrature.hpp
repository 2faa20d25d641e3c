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

#ifndef CONFIGLAB_CORE_QUADRATURE_HPP_
#define CONFIGLAB_CORE_QUADRATURE_HPP_

#include <functional>
#include <vector>

#include "errors.hpp"
#include "point_config.hpp"

namespace configlab {

// Composite Simpson rule over an axis-aligned box, tensorized per axis.
// points_per_axis must be odd and at least 3.
inline double integrate_box_simpson(
    const Point& lo, const Point& hi, int points_per_axis,
    const std::function<double(const Point&)>& f) {
  const int d = lo.dim();
  if (hi.dim() != d || d == 0)
    throw InvalidArgument("integrate_box_simpson: bad box dimensions");
  if (points_per_axis < 3 || points_per_axis % 2 == 0)
    throw InvalidArgument("integrate_box_simpson: points_per_axis must be odd and >= 3");
  for (int k = 0; k < d; ++k)
    if (!(lo[k] < hi[k]))
      throw InvalidArgument("integrate_box_simpson: box must have positive extent");

  std::vector<double> step(d);
  for (int k = 0; k < d; ++k) step[k] = (hi[k] - lo[k]) / (points_per_axis - 1);
  auto weight1d = [&](int i) {
    if (i == 0 || i == points_per_axis - 1) return 1.0;
    return i % 2 == 1 ? 4.0 : 2.0;
  };

  std::vector<int> idx(d, 0);
  Point x(std::vector<double>(d, 0.0));
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      x[k] = lo[k] + idx[k] * step[k];
      w *= weight1d(idx[k]) * step[k] / 3.0;
    }
    total += w * f(x);
    int k = 0;
    while (k < d && ++idx[k] == points_per_axis) {
      idx[k] = 0;
      ++k;
    }
    if (k == d) break;
  }
  return total;
}

}  // namespace configlab

#endif  // CONFIGLAB_CORE_QUADRATURE_HPP_
