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

#include "configlab/configlab.h"

#include <exception>
#include <new>
#include <string>

#include "errors.hpp"
#include "harness.hpp"

struct cfgl_result {
  std::string csv;
  std::string verdict;
  std::string error;
  bool has_output = false;
  bool pass = false;
};

namespace {

const std::string& subcommand_list() {
  static const std::string joined = [] {
    std::string s;
    for (const auto& name : configlab::harness::subcommand_names()) {
      s += name;
      s += '\n';
    }
    return s;
  }();
  return joined;
}

const std::string& catalog_text() {
  static const std::string text = configlab::harness::catalog_json();
  return text;
}

}  // namespace

extern "C" {

const char* cfgl_version(void) {
  return configlab::harness::artifact_version();
}

const char* cfgl_subcommands(void) { return subcommand_list().c_str(); }

const char* cfgl_catalog(void) { return catalog_text().c_str(); }

cfgl_status cfgl_run(const char* subcommand, const char* config_json,
                     cfgl_result** out) {
  if (out == nullptr) return CFGL_ERROR_NULL_ARGUMENT;
  *out = nullptr;
  auto* r = new (std::nothrow) cfgl_result();
  if (r == nullptr) return CFGL_ERROR_RUNTIME;
  *out = r;
  if (subcommand == nullptr || config_json == nullptr) {
    r->error = "subcommand and config_json must be non-NULL";
    return CFGL_ERROR_NULL_ARGUMENT;
  }
  try {
    auto run = configlab::harness::run_subcommand(subcommand, config_json);
    r->csv = std::move(run.csv);
    r->verdict = std::move(run.verdict_json);
    r->has_output = true;
    r->pass = run.pass;
    return run.pass ? CFGL_OK : CFGL_ERROR_VIOLATION;
  } catch (const configlab::ConfigError& e) {
    r->error = e.what();
    return CFGL_ERROR_CONFIG;
  } catch (const std::exception& e) {
    r->error = e.what();
    return CFGL_ERROR_RUNTIME;
  } catch (...) {
    r->error = "unknown error";
    return CFGL_ERROR_RUNTIME;
  }
}

const char* cfgl_result_csv(const cfgl_result* r) {
  return (r != nullptr && r->has_output) ? r->csv.c_str() : nullptr;
}

const char* cfgl_result_verdict(const cfgl_result* r) {
  return (r != nullptr && r->has_output) ? r->verdict.c_str() : nullptr;
}

const char* cfgl_result_error(const cfgl_result* r) {
  return (r != nullptr && !r->error.empty()) ? r->error.c_str() : nullptr;
}

int cfgl_result_pass(const cfgl_result* r) {
  return (r != nullptr && r->has_output && r->pass) ? 1 : 0;
}

void cfgl_result_free(cfgl_result* r) { delete r; }

}  // extern "C"
