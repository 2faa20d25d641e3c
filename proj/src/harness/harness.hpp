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

#ifndef CONFIGLAB_HARNESS_HARNESS_HPP_
#define CONFIGLAB_HARNESS_HARNESS_HPP_

#include <string>
#include <vector>

namespace configlab::harness {

// Outcome of one subcommand run.  `csv` holds the plot-ready payload (a
// header row plus data rows; the `sample` subcommand emits configuration
// JSON lines instead).  `verdict_json` embeds the canonical config, an input
// digest, and the subcommand results; re-running the embedded config
// reproduces both fields byte for byte.  `pass` is false exactly when the
// run completed but a checked property was violated.
struct RunResult {
  std::string csv;
  std::string verdict_json;
  bool pass = true;
};

// Dispatches one subcommand on a JSON run configuration.  Schema problems
// (unknown subcommand, malformed JSON, unknown or missing keys, bad value
// types) throw ConfigError; operational failures from the underlying
// estimators propagate as their own error types.
RunResult run_subcommand(const std::string& subcommand,
                         const std::string& config_json);

// Names of all available subcommands, in dispatch order.
const std::vector<std::string>& subcommand_names();

// Byte-stable catalog of builtin models, events, test functions and
// functionals, as pretty-printed JSON.
std::string catalog_json();

// Version string stamped into every verdict.
const char* artifact_version();

}  // namespace configlab::harness

#endif  // CONFIGLAB_HARNESS_HARNESS_HPP_
