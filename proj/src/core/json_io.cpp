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

#include "json_io.hpp"

#include <algorithm>
#include <cmath>

namespace configlab {

void require_keys(const Json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional,
                  const std::string& where) {
  if (!j.is_object()) {
    throw ConfigError(where + ": expected a JSON object");
  }
  for (const char* key : required) {
    if (!j.contains(key)) {
      throw ConfigError(where + ": missing required key \"" + key + "\"");
    }
  }
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    const auto match = [&key](const char* k) { return key == k; };
    if (!std::any_of(required.begin(), required.end(), match) &&
        !std::any_of(optional.begin(), optional.end(), match)) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

std::vector<double> double_vector_from_json(const Json& j,
                                            const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + ": expected a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const Json& v : j) {
    if (!v.is_number()) {
      throw ConfigError(where + ": expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ConfigError(where + ": values must be finite");
    }
    out.push_back(d);
  }
  return out;
}

Json configuration_to_json(const Configuration& gamma) {
  // Emit merged atoms ordered like the canonical labeling anchored at the
  // origin: by distance from the origin, ties lexicographic.
  std::vector<Atom> atoms(gamma.atoms().begin(), gamma.atoms().end());
  const Point origin(std::vector<double>(static_cast<std::size_t>(gamma.dim())));
  std::stable_sort(atoms.begin(), atoms.end(),
                   [&origin](const Atom& a, const Atom& b) {
                     const double da = squared_distance(a.position, origin);
                     const double db = squared_distance(b.position, origin);
                     if (da != db) return da < db;
                     return a.position < b.position;
                   });
  Json out;
  out["dim"] = gamma.dim();
  Json list = Json::array();
  for (const Atom& a : atoms) {
    Json atom;
    atom["x"] = a.position.x;
    atom["m"] = a.multiplicity;
    list.push_back(std::move(atom));
  }
  out["atoms"] = std::move(list);
  return out;
}

Configuration configuration_from_json(const Json& j) {
  require_keys(j, {"dim", "atoms"}, {}, "configuration");
  if (!j["dim"].is_number_integer() || j["dim"].get<int>() < 1) {
    throw ConfigError("configuration: \"dim\" must be a positive integer");
  }
  const int dim = j["dim"].get<int>();
  if (!j["atoms"].is_array()) {
    throw ConfigError("configuration: \"atoms\" must be an array");
  }
  Configuration gamma(dim);
  for (const Json& atom : j["atoms"]) {
    require_keys(atom, {"x", "m"}, {}, "configuration atom");
    const std::vector<double> x =
        double_vector_from_json(atom["x"], "configuration atom \"x\"");
    if (static_cast<int>(x.size()) != dim) {
      throw ConfigError("configuration atom: dimension mismatch");
    }
    if (!atom["m"].is_number_integer() || atom["m"].get<int>() < 1) {
      throw ConfigError("configuration atom: \"m\" must be a positive integer");
    }
    gamma.add(Point(x), atom["m"].get<int>());
  }
  return gamma;
}

Json window_to_json(const Window& window) {
  Json out;
  if (window.kind() == Window::Kind::Box) {
    out["kind"] = "box";
    out["lo"] = window.lo().x;
    out["hi"] = window.hi().x;
  } else {
    out["kind"] = "ball";
    out["center"] = window.center().x;
    out["radius"] = window.radius();
  }
  return out;
}

Window window_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("window: expected an object with a \"kind\" string");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "box") {
    require_keys(j, {"kind", "lo", "hi"}, {}, "box window");
    return Window::box(Point(double_vector_from_json(j["lo"], "window \"lo\"")),
                       Point(double_vector_from_json(j["hi"], "window \"hi\"")));
  }
  if (kind == "ball") {
    require_keys(j, {"kind", "center", "radius"}, {}, "ball window");
    if (!j["radius"].is_number()) {
      throw ConfigError("window: \"radius\" must be a number");
    }
    return Window::ball(
        Point(double_vector_from_json(j["center"], "window \"center\"")),
        j["radius"].get<double>());
  }
  throw ConfigError("window: unknown kind \"" + kind + "\"");
}

}  // namespace configlab
