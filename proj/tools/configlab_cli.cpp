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

// Command line front end over the C API.  Reads a JSON config, runs one
// subcommand, writes the CSV table (JSONL for `sample`) to --out or stdout
// followed by the JSON verdict on stdout.  Timing goes to stderr so the
// streams stay byte-reproducible.
//
// Exit codes: 0 run passed, 1 operational error (bad config, estimator
// failure, I/O), 2 run completed but a checked property was violated.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "configlab/configlab.h"
#include "json.hpp"

namespace {

int fail_operational(const std::string& message) {
  nlohmann::json diag{{"error", message}};
  std::cerr << diag.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"configuration-space laboratory"};
  app.set_version_flag("--version", std::string(cfgl_version()));

  std::string subcommand;
  std::string config_path;
  std::string out_path;
  std::int64_t seed = -1;
  std::int64_t workers = 0;

  std::string subcommand_help = "one of:";
  {
    std::istringstream in(cfgl_subcommands());
    std::string name;
    while (std::getline(in, name)) subcommand_help += " " + name;
  }
  app.add_option("subcommand", subcommand, subcommand_help)->required();
  app.add_option("--config", config_path,
                 "JSON config file ('-' reads stdin; default empty config)");
  app.add_option("--out", out_path,
                 "write the CSV table here instead of stdout");
  app.add_option("--seed", seed, "override the config's seed (>= 0)");
  app.add_option("--workers", workers, "override the config's workers (>= 1)");

  CLI11_PARSE(app, argc, argv);

  std::string config_json = "{}";
  if (config_path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    config_json = buf.str();
  } else if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) return fail_operational("cannot open config file: " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    config_json = buf.str();
  }

  if (seed >= 0 || workers >= 1) {
    nlohmann::json cfg = nlohmann::json::parse(config_json, nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object()) {
      return fail_operational("config must be a JSON object to apply overrides");
    }
    if (seed >= 0) cfg["seed"] = seed;
    if (workers >= 1) cfg["workers"] = workers;
    config_json = cfg.dump();
  }

  const auto start = std::chrono::steady_clock::now();
  cfgl_result* result = nullptr;
  cfgl_status status = cfgl_run(subcommand.c_str(), config_json.c_str(), &result);
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  std::fprintf(stderr, "wall_time_seconds %.3f\n", elapsed.count());

  int exit_code = 0;
  if (status == CFGL_OK || status == CFGL_ERROR_VIOLATION) {
    const char* csv = cfgl_result_csv(result);
    const char* verdict = cfgl_result_verdict(result);
    if (out_path.empty()) {
      std::cout << csv;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        cfgl_result_free(result);
        return fail_operational("cannot open output file: " + out_path);
      }
      out << csv;
    }
    std::cout << verdict;
    exit_code = (status == CFGL_OK) ? 0 : 2;
  } else {
    const char* message = cfgl_result_error(result);
    exit_code = fail_operational(message != nullptr ? message : "unknown error");
  }
  cfgl_result_free(result);
  return exit_code;
}
