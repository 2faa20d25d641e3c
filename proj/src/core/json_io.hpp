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

#ifndef CONFIGLAB_CORE_JSON_IO_HPP_
#define CONFIGLAB_CORE_JSON_IO_HPP_

#include <string>

#include <json.hpp>

#include "point_config.hpp"

namespace configlab {

using Json = nlohmann::json;

// Configuration wire format:
//   {"dim": d, "atoms": [{"x": [..], "m": k}, ...]}
// Atoms are emitted in canonical labeling order anchored at the origin, so
// equal configurations serialize to identical bytes.
Json configuration_to_json(const Configuration& gamma);
Configuration configuration_from_json(const Json& j);

// Window wire format:
//   {"kind": "box", "lo": [..], "hi": [..]}
//   {"kind": "ball", "center": [..], "radius": r}
Json window_to_json(const Window& window);
Window window_from_json(const Json& j);

// Strict object access used by every schema in the project: unknown keys are
// rejected so that config typos fail loudly instead of silently defaulting.
void require_keys(const Json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional,
                  const std::string& where);

std::vector<double> double_vector_from_json(const Json& j,
                                            const std::string& where);

}  // namespace configlab

#endif  // CONFIGLAB_CORE_JSON_IO_HPP_
