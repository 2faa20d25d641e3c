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

#include "harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cylinder.hpp"
#include "diffusion.hpp"
#include "errors.hpp"
#include "json_io.hpp"
#include "point_config.hpp"
#include "samplers.hpp"
#include "transport.hpp"

#ifndef CONFIGLAB_VERSION
#define CONFIGLAB_VERSION "0.0.0"
#endif

namespace configlab::harness {
namespace {

using diffusion::DiffusionSpec;
using diffusion::EventSet;

// ---------------------------------------------------------------------------
// Formatting.  CSV floats are printed with 17 significant digits so that
// parsing them back recovers the exact double. JSON numbers rely on the
// serializer's shortest round-trip encoding.

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(std::int64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  return buf;
}

const char* fmt(bool v) { return v ? "true" : "false"; }

// Free-text CSV cells must not introduce extra columns.
std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string fnv1a64_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// Strict config access.

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    fail(where, std::string("missing key '") + key + "'");
  }
  return j.at(key);
}

double get_double(const Json& j, const char* key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t get_int(const Json& j, const char* key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (v.is_number_unsigned()) {
    auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      fail(where, std::string("'") + key + "' is out of range");
    }
    return static_cast<std::int64_t>(u);
  }
  if (!v.is_number_integer()) {
    fail(where, std::string("'") + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t get_seed(const Json& j, const std::string& where) {
  const Json& v = need(j, "seed", where);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  fail(where, "'seed' must be a nonnegative integer");
}

std::string get_string(const Json& j, const char* key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const Json& j, const char* key, const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_boolean()) fail(where, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

void check_schema_version(const Json& cfg, const std::string& where) {
  const Json& v = need(cfg, "schema_version", where);
  if (!(v.is_number_integer() || v.is_number_unsigned()) ||
      v.get<std::int64_t>() != 1) {
    fail(where, "'schema_version' must be the integer 1");
  }
}

std::int64_t parse_workers(const Json& cfg, const std::string& where) {
  if (!cfg.contains("workers")) return 1;
  auto w = get_int(cfg, "workers", where);
  if (w < 1) fail(where, "'workers' must be >= 1");
  return w;
}

const Json& params_of(const Json& j, const std::string& where) {
  static const Json kEmpty = Json::object();
  if (!j.contains("params")) return kEmpty;
  const Json& p = j.at("params");
  if (!p.is_object()) fail(where, "'params' must be an object");
  return p;
}

// ---------------------------------------------------------------------------
// Registries.  Each parser returns the constructed object together with its
// canonical JSON (defaults materialized), so the emitted config re-runs to
// identical bytes.

struct ParsedSmooth {
  SmoothTestFunction fn;
  Json canon;
};

ParsedSmooth parse_smooth_fn(const Json& j, const std::string& where) {
  require_keys(j, {"name"}, {"params"}, where);
  const std::string name = get_string(j, "name", where);
  const Json& p = params_of(j, where);
  const std::string pw = where + ".params";
  if (name == "smooth_bump") {
    require_keys(p, {"center", "radius"}, {"height"}, pw);
    Point center{double_vector_from_json(need(p, "center", pw), pw + ".center")};
    double radius = get_double(p, "radius", pw);
    double height = p.contains("height") ? get_double(p, "height", pw) : 1.0;
    Json canon{{"name", name},
               {"params",
                {{"center", center.x}, {"radius", radius}, {"height", height}}}};
    return {smooth_bump(center, radius, height), std::move(canon)};
  }
  if (name == "gaussian_bump") {
    require_keys(p, {"center", "sigma", "radius"}, {"height"}, pw);
    Point center{double_vector_from_json(need(p, "center", pw), pw + ".center")};
    double sigma = get_double(p, "sigma", pw);
    double radius = get_double(p, "radius", pw);
    double height = p.contains("height") ? get_double(p, "height", pw) : 1.0;
    Json canon{{"name", name},
               {"params",
                {{"center", center.x},
                 {"sigma", sigma},
                 {"radius", radius},
                 {"height", height}}}};
    return {gaussian_bump(center, sigma, radius, height), std::move(canon)};
  }
  if (name == "nonlip_tent") {
    require_keys(p, {}, {}, pw);
    Json canon{{"name", name}, {"params", Json::object()}};
    return {mollified_tent(), std::move(canon)};
  }
  if (name == "coordinate_taper") {
    require_keys(p, {"axis", "lo", "hi", "margin"}, {}, pw);
    auto axis = get_int(p, "axis", pw);
    Point lo{double_vector_from_json(need(p, "lo", pw), pw + ".lo")};
    Point hi{double_vector_from_json(need(p, "hi", pw), pw + ".hi")};
    double margin = get_double(p, "margin", pw);
    Json canon{{"name", name},
               {"params",
                {{"axis", axis}, {"lo", lo.x}, {"hi", hi.x}, {"margin", margin}}}};
    return {coordinate_taper(static_cast<int>(axis), lo, hi, margin),
            std::move(canon)};
  }
  fail(where, "unknown test function '" + name + "'");
}

struct ParsedOuter {
  OuterFunction fn;
  Json canon;
};

ParsedOuter parse_outer(const Json& j, const std::string& where) {
  require_keys(j, {"name"}, {"params"}, where);
  const std::string name = get_string(j, "name", where);
  const Json& p = params_of(j, where);
  const std::string pw = where + ".params";
  if (name == "identity") {
    require_keys(p, {}, {}, pw);
    return {OuterFunction::identity(),
            Json{{"name", name}, {"params", Json::object()}}};
  }
  if (name == "arc_tangent") {
    require_keys(p, {}, {}, pw);
    return {OuterFunction::arc_tangent(),
            Json{{"name", name}, {"params", Json::object()}}};
  }
  if (name == "constant") {
    require_keys(p, {"value"}, {}, pw);
    double c = get_double(p, "value", pw);
    return {OuterFunction::constant(c),
            Json{{"name", name}, {"params", {{"value", c}}}}};
  }
  if (name == "linear") {
    require_keys(p, {"coefficients"}, {}, pw);
    auto coeff =
        double_vector_from_json(need(p, "coefficients", pw), pw + ".coefficients");
    return {OuterFunction::linear(coeff),
            Json{{"name", name}, {"params", {{"coefficients", coeff}}}}};
  }
  fail(where, "unknown outer function '" + name + "'");
}

struct ParsedCylinder {
  CylinderFunction fn;
  Json canon;
};

ParsedCylinder parse_cylinder(const Json& j, const std::string& where) {
  require_keys(j, {"outer", "inner"}, {}, where);
  auto outer = parse_outer(j.at("outer"), where + ".outer");
  const Json& inner = j.at("inner");
  if (!inner.is_array()) fail(where, "'inner' must be an array");
  std::vector<SmoothTestFunction> fns;
  Json inner_canon = Json::array();
  for (std::size_t i = 0; i < inner.size(); ++i) {
    auto f = parse_smooth_fn(inner[i],
                             where + ".inner[" + std::to_string(i) + "]");
    fns.push_back(std::move(f.fn));
    inner_canon.push_back(std::move(f.canon));
  }
  Json canon{{"outer", std::move(outer.canon)}, {"inner", std::move(inner_canon)}};
  return {CylinderFunction(std::move(outer.fn), std::move(fns)), std::move(canon)};
}

struct ParsedFree {
  FreePotentialFn fn;
  Json canon;
};

ParsedFree parse_free_potential(const Json& j, const std::string& where) {
  require_keys(j, {"name"}, {"params"}, where);
  const std::string name = get_string(j, "name", where);
  const Json& p = params_of(j, where);
  const std::string pw = where + ".params";
  if (name == "zero") {
    require_keys(p, {}, {}, pw);
    return {[](const Point&) { return 0.0; },
            Json{{"name", name}, {"params", Json::object()}}};
  }
  if (name == "quadratic") {
    require_keys(p, {"strength", "center"}, {}, pw);
    double a = get_double(p, "strength", pw);
    auto center = double_vector_from_json(need(p, "center", pw), pw + ".center");
    Json canon{{"name", name},
               {"params", {{"strength", a}, {"center", center}}}};
    return {[a, center](const Point& x) {
              double s = 0.0;
              for (std::size_t k = 0; k < center.size(); ++k) {
                double d = x[static_cast<int>(k)] - center[k];
                s += d * d;
              }
              return a * s;
            },
            std::move(canon)};
  }
  if (name == "linear") {
    require_keys(p, {"slope"}, {}, pw);
    auto slope = double_vector_from_json(need(p, "slope", pw), pw + ".slope");
    Json canon{{"name", name}, {"params", {{"slope", slope}}}};
    return {[slope](const Point& x) {
              double s = 0.0;
              for (std::size_t k = 0; k < slope.size(); ++k) {
                s += slope[k] * x[static_cast<int>(k)];
              }
              return s;
            },
            std::move(canon)};
  }
  if (name == "cosine_1d") {
    require_keys(p, {"amplitude", "frequency"}, {}, pw);
    double amp = get_double(p, "amplitude", pw);
    double freq = get_double(p, "frequency", pw);
    Json canon{{"name", name},
               {"params", {{"amplitude", amp}, {"frequency", freq}}}};
    return {[amp, freq](const Point& x) {
              return amp * std::cos(2.0 * M_PI * freq * x[0]);
            },
            std::move(canon)};
  }
  fail(where, "unknown free potential '" + name + "'");
}

struct ParsedPair {
  PairPotentialFn fn;
  Json canon;
};

double sq_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

ParsedPair parse_pair_potential(const Json& j, const std::string& where) {
  require_keys(j, {"name"}, {"params"}, where);
  const std::string name = get_string(j, "name", where);
  const Json& p = params_of(j, where);
  const std::string pw = where + ".params";
  if (name == "zero") {
    require_keys(p, {}, {}, pw);
    return {[](const Point&, const Point&) { return 0.0; },
            Json{{"name", name}, {"params", Json::object()}}};
  }
  if (name == "inverse_quadratic") {
    require_keys(p, {"strength", "epsilon"}, {}, pw);
    double s = get_double(p, "strength", pw);
    double eps = get_double(p, "epsilon", pw);
    if (!(eps > 0.0)) fail(pw, "'epsilon' must be positive");
    Json canon{{"name", name}, {"params", {{"strength", s}, {"epsilon", eps}}}};
    return {[s, eps](const Point& a, const Point& b) {
              return s / (eps + sq_dist(a, b));
            },
            std::move(canon)};
  }
  if (name == "gaussian_pair") {
    require_keys(p, {"strength", "range"}, {}, pw);
    double s = get_double(p, "strength", pw);
    double r = get_double(p, "range", pw);
    if (!(r > 0.0)) fail(pw, "'range' must be positive");
    Json canon{{"name", name}, {"params", {{"strength", s}, {"range", r}}}};
    return {[s, r](const Point& a, const Point& b) {
              return s * std::exp(-sq_dist(a, b) / (2.0 * r * r));
            },
            std::move(canon)};
  }
  if (name == "hard_core") {
    require_keys(p, {"radius"}, {}, pw);
    double r = get_double(p, "radius", pw);
    if (!(r > 0.0)) fail(pw, "'radius' must be positive");
    Json canon{{"name", name}, {"params", {{"radius", r}}}};
    return {[r2 = r * r](const Point& a, const Point& b) {
              return sq_dist(a, b) < r2
                         ? std::numeric_limits<double>::infinity()
                         : 0.0;
            },
            std::move(canon)};
  }
  fail(where, "unknown pair potential '" + name + "'");
}

McmcParams parse_mcmc(const Json& j, Json* canon, const std::string& where) {
  McmcParams m;
  require_keys(j, {},
               {"burn_in", "thinning", "p_birth", "p_death", "p_move",
                "move_scale"},
               where);
  if (j.contains("burn_in")) m.burn_in = get_int(j, "burn_in", where);
  if (j.contains("thinning")) m.thinning = get_int(j, "thinning", where);
  if (j.contains("p_birth")) m.p_birth = get_double(j, "p_birth", where);
  if (j.contains("p_death")) m.p_death = get_double(j, "p_death", where);
  if (j.contains("p_move")) m.p_move = get_double(j, "p_move", where);
  if (j.contains("move_scale")) m.move_scale = get_double(j, "move_scale", where);
  *canon = Json{{"burn_in", m.burn_in},     {"thinning", m.thinning},
                {"p_birth", m.p_birth},     {"p_death", m.p_death},
                {"p_move", m.p_move},       {"move_scale", m.move_scale}};
  return m;
}

struct ParsedModel {
  PointProcessModel model;
  Json canon;
};

ParsedModel parse_model(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object");
  if (!j.contains("kind")) fail(where, "missing key 'kind'");
  const std::string kind = get_string(j, "kind", where);
  if (kind == "poisson") {
    require_keys(j, {"kind", "window", "rate"}, {}, where);
    Window w = window_from_json(j.at("window"));
    double rate = get_double(j, "rate", where);
    Json canon{{"kind", kind}, {"window", window_to_json(w)}, {"rate", rate}};
    return {PointProcessModel{PoissonModel{IntensityMeasure::uniform(w, rate)}},
            std::move(canon)};
  }
  if (kind == "mixed_poisson") {
    require_keys(j, {"kind", "window", "rate", "mixing"}, {}, where);
    Window w = window_from_json(j.at("window"));
    double rate = get_double(j, "rate", where);
    const Json& mix = j.at("mixing");
    if (!mix.is_array() || mix.empty()) {
      fail(where, "'mixing' must be a nonempty array");
    }
    MixingLaw law;
    Json mix_canon = Json::array();
    for (std::size_t i = 0; i < mix.size(); ++i) {
      const std::string mw = where + ".mixing[" + std::to_string(i) + "]";
      require_keys(mix[i], {"scale", "weight"}, {}, mw);
      MixingAtom atom{get_double(mix[i], "scale", mw),
                      get_double(mix[i], "weight", mw)};
      law.push_back(atom);
      mix_canon.push_back(Json{{"scale", atom.scale}, {"weight", atom.weight}});
    }
    Json canon{{"kind", kind},
               {"window", window_to_json(w)},
               {"rate", rate},
               {"mixing", std::move(mix_canon)}};
    return {PointProcessModel{
                MixedPoissonModel{IntensityMeasure::uniform(w, rate), law}},
            std::move(canon)};
  }
  if (kind == "gibbs") {
    require_keys(j, {"kind", "window", "rate", "phi", "psi"},
                 {"mcmc", "initial"}, where);
    Window w = window_from_json(j.at("window"));
    double rate = get_double(j, "rate", where);
    auto phi = parse_free_potential(j.at("phi"), where + ".phi");
    auto psi = parse_pair_potential(j.at("psi"), where + ".psi");
    Json mcmc_canon;
    McmcParams mcmc = parse_mcmc(
        j.contains("mcmc") ? j.at("mcmc") : Json::object(), &mcmc_canon,
        where + ".mcmc");
    std::optional<Configuration> initial;
    Json canon{{"kind", kind},
               {"window", window_to_json(w)},
               {"rate", rate},
               {"phi", std::move(phi.canon)},
               {"psi", std::move(psi.canon)},
               {"mcmc", std::move(mcmc_canon)}};
    if (j.contains("initial")) {
      initial = configuration_from_json(j.at("initial"));
      canon["initial"] = configuration_to_json(*initial);
    }
    return {PointProcessModel{GibbsModel{IntensityMeasure::uniform(w, rate),
                                         std::move(phi.fn), std::move(psi.fn),
                                         mcmc, std::move(initial)}},
            std::move(canon)};
  }
  if (kind == "ginibre") {
    require_keys(j, {"kind", "matrix_size"}, {}, where);
    auto n = get_int(j, "matrix_size", where);
    Json canon{{"kind", kind}, {"matrix_size", n}};
    return {PointProcessModel{GinibreModel{static_cast<int>(n)}},
            std::move(canon)};
  }
  fail(where, "unknown model kind '" + kind + "'");
}

const IntensityMeasure& poisson_intensity(const ParsedModel& pm,
                                          const std::string& where) {
  const auto* p = std::get_if<PoissonModel>(&pm.model);
  if (p == nullptr) fail(where, "this subcommand requires a poisson model");
  return p->intensity;
}

struct ParsedGeometry {
  diffusion::Geometry geometry;
  Json canon;
};

ParsedGeometry parse_geometry(const Json& j, const Json& model_canon,
                              const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object");
  if (!j.contains("kind")) fail(where, "missing key 'kind'");
  const std::string kind = get_string(j, "kind", where);
  if (kind == "reflecting_box") {
    require_keys(j, {"kind"}, {}, where);
    if (!model_canon.contains("window")) {
      fail(where, "reflecting_box requires a windowed model");
    }
    Window w = window_from_json(model_canon.at("window"));
    return {diffusion::ReflectingBox{std::move(w)}, Json{{"kind", kind}}};
  }
  if (kind == "torus") {
    require_keys(j, {"kind", "period"}, {}, where);
    auto period = double_vector_from_json(j.at("period"), where + ".period");
    Json canon{{"kind", kind}, {"period", period}};
    return {diffusion::Torus{std::move(period)}, std::move(canon)};
  }
  fail(where, "unknown geometry kind '" + kind + "'");
}

struct ParsedEvent {
  EventSet event;
  Json canon;
};

ParsedEvent parse_event(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object");
  if (!j.contains("kind")) fail(where, "missing key 'kind'");
  const std::string kind = get_string(j, "kind", where);
  if (kind == "concentration") {
    require_keys(j, {"kind", "region", "n", "mode"}, {}, where);
    Window region = window_from_json(j.at("region"));
    auto n = get_int(j, "n", where);
    const std::string mode = get_string(j, "mode", where);
    CountMode m;
    if (mode == "eq") {
      m = CountMode::Eq;
    } else if (mode == "geq") {
      m = CountMode::Geq;
    } else if (mode == "leq") {
      m = CountMode::Leq;
    } else {
      fail(where, "'mode' must be one of eq, geq, leq");
    }
    Json canon{{"kind", kind},
               {"region", window_to_json(region)},
               {"n", n},
               {"mode", mode}};
    return {EventSet{diffusion::Concentration{std::move(region), n, m}},
            std::move(canon)};
  }
  if (kind == "restriction_set") {
    require_keys(j, {"kind", "gamma_ref", "u_window"}, {"tolerance"}, where);
    Configuration ref = configuration_from_json(j.at("gamma_ref"));
    Window u = window_from_json(j.at("u_window"));
    double tol =
        j.contains("tolerance") ? get_double(j, "tolerance", where) : 0.0;
    Json canon{{"kind", kind},
               {"gamma_ref", configuration_to_json(ref)},
               {"u_window", window_to_json(u)},
               {"tolerance", tol}};
    return {EventSet{diffusion::LambdaSet{std::move(ref), std::move(u), tol}},
            std::move(canon)};
  }
  if (kind == "distance_ball") {
    require_keys(j, {"kind", "center", "radius"}, {}, where);
    Configuration center = configuration_from_json(j.at("center"));
    double radius = get_double(j, "radius", where);
    Json canon{{"kind", kind},
               {"center", configuration_to_json(center)},
               {"radius", radius}};
    return {EventSet{diffusion::DistanceBall{std::move(center), radius}},
            std::move(canon)};
  }
  if (kind == "whole_space") {
    require_keys(j, {"kind"}, {}, where);
    return {diffusion::whole_space(), Json{{"kind", kind}}};
  }
  fail(where, "unknown event kind '" + kind + "'");
}

struct ParsedFunctional {
  std::function<double(const Configuration&, const Point&)> u;
  Json canon;
  std::string name;
  std::optional<double> expected;
};

ParsedFunctional parse_functional(const Json& j, const std::string& where) {
  require_keys(j, {"name"}, {"params", "expected"}, where);
  const std::string name = get_string(j, "name", where);
  const Json& p = params_of(j, where);
  const std::string pw = where + ".params";
  ParsedFunctional out;
  out.name = name;
  if (j.contains("expected")) {
    const Json& e = j.at("expected");
    if (!e.is_number()) fail(where, "'expected' must be a number");
    out.expected = e.get<double>();
  }
  if (name == "indicator_in") {
    require_keys(p, {"region"}, {}, pw);
    Window region = window_from_json(p.at("region"));
    out.canon = Json{{"name", name},
                     {"params", {{"region", window_to_json(region)}}}};
    out.u = [region](const Configuration&, const Point& x) {
      return region.contains(x) ? 1.0 : 0.0;
    };
  } else if (name == "indicator_count_eq") {
    require_keys(p, {"region", "n"}, {}, pw);
    Window region = window_from_json(p.at("region"));
    auto n = get_int(p, "n", pw);
    out.canon = Json{
        {"name", name},
        {"params", {{"region", window_to_json(region)}, {"n", n}}}};
    out.u = [region, n](const Configuration& g, const Point& x) {
      return region.contains(x) && count(g, region) == n ? 1.0 : 0.0;
    };
  } else if (name == "indicator_other_geq") {
    require_keys(p, {"region", "other", "n"}, {}, pw);
    Window region = window_from_json(p.at("region"));
    Window other = window_from_json(p.at("other"));
    auto n = get_int(p, "n", pw);
    out.canon = Json{{"name", name},
                     {"params",
                      {{"region", window_to_json(region)},
                       {"other", window_to_json(other)},
                       {"n", n}}}};
    out.u = [region, other, n](const Configuration& g, const Point& x) {
      return region.contains(x) && count(g, other) >= n ? 1.0 : 0.0;
    };
  } else if (name == "neighbor_count") {
    require_keys(p, {"range"}, {}, pw);
    double range = get_double(p, "range", pw);
    if (!(range > 0.0)) fail(pw, "'range' must be positive");
    out.canon = Json{{"name", name}, {"params", {{"range", range}}}};
    double r2 = range * range;
    out.u = [r2](const Configuration& g, const Point& x) {
      double c = 0.0;
      for (const auto& y : g.expanded()) {
        if (sq_dist(x, y) <= r2) c += 1.0;
      }
      return c - 1.0;
    };
  } else if (name == "smooth_weight") {
    require_keys(p, {"fn"}, {}, pw);
    auto f = parse_smooth_fn(p.at("fn"), pw + ".fn");
    out.canon = Json{{"name", name}, {"params", {{"fn", f.canon}}}};
    out.u = [fn = f.fn](const Configuration&, const Point& x) {
      return fn.value(x);
    };
  } else {
    fail(where, "unknown functional '" + name + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verdict assembly.

RunResult finish(const std::string& sub, const Json& canonical, std::string csv,
                 Json results, bool pass) {
  Json verdict{{"artifact_version", CONFIGLAB_VERSION},
               {"subcommand", sub},
               {"config", canonical},
               {"digest", fnv1a64_hex(canonical.dump())},
               {"pass", pass},
               {"results", std::move(results)}};
  return RunResult{std::move(csv), verdict.dump(2) + "\n", pass};
}

std::int64_t positive_count(const Json& cfg, const char* key,
                            const std::string& where) {
  auto n = get_int(cfg, key, where);
  if (n < 1) fail(where, std::string("'") + key + "' must be >= 1");
  return n;
}

std::vector<double> grid_from(const Json& cfg, const char* key,
                              const std::string& where) {
  const Json& v = need(cfg, key, where);
  auto grid = double_vector_from_json(v, where + "." + key);
  if (grid.empty()) fail(where, std::string("'") + key + "' must be nonempty");
  return grid;
}

// Diffusion plumbing shared by the four dynamics subcommands.
struct ParsedDiffusion {
  DiffusionSpec spec;
  Json model_canon;
  Json geometry_canon;
  double dt = 0.0;
  double horizon = 0.0;
};

ParsedDiffusion parse_diffusion(const Json& cfg, const std::string& where,
                                double min_horizon = 0.0) {
  auto pm = parse_model(cfg.at("model"), where + ".model");
  auto geom =
      parse_geometry(cfg.at("geometry"), pm.canon, where + ".geometry");
  double dt = get_double(cfg, "dt", where);
  double horizon = get_double(cfg, "horizon", where);
  ParsedDiffusion out{
      DiffusionSpec{std::move(pm.model), std::move(geom.geometry), dt,
                    std::max(horizon, min_horizon)},
      std::move(pm.canon), std::move(geom.canon), dt, horizon};
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands.

RunResult run_sample(const Json& cfg) {
  const std::string where = "sample";
  require_keys(cfg, {"schema_version", "model", "n_samples", "seed"},
               {"workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto pm = parse_model(cfg.at("model"), where + ".model");
  auto n = positive_count(cfg, "n_samples", where);
  auto seed = get_seed(cfg, where);

  ModelSampler sampler(pm.model, seed);
  std::string lines;
  for (std::int64_t i = 0; i < n; ++i) {
    lines += configuration_to_json(sampler.next()).dump();
    lines += '\n';
  }
  Json canonical{{"schema_version", 1},
                 {"model", std::move(pm.canon)},
                 {"n_samples", n},
                 {"seed", seed},
                 {"workers", workers}};
  return finish(where, canonical, std::move(lines),
                Json{{"n_samples", n}}, true);
}

RunResult run_distance(const Json& cfg) {
  const std::string where = "distance";
  require_keys(cfg, {"schema_version", "a", "b"}, {"workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  Configuration a = configuration_from_json(cfg.at("a"));
  Configuration b = configuration_from_json(cfg.at("b"));
  auto d = transport::d_upsilon(a, b);

  std::string csv = "d\n";
  Json results;
  if (d.is_infinite()) {
    csv += "infinite\n";
    results = Json{{"d", nullptr}, {"infinite", true}};
  } else {
    csv += fmt(d.value());
    csv += '\n';
    results = Json{{"d", d.value()}, {"infinite", false}};
  }
  Json canonical{{"schema_version", 1},
                 {"a", configuration_to_json(a)},
                 {"b", configuration_to_json(b)},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv), std::move(results), true);
}

RunResult run_mecke(const Json& cfg) {
  const std::string where = "mecke-check";
  require_keys(cfg,
               {"schema_version", "model", "functionals", "n_samples", "seed"},
               {"strata_per_axis", "workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto pm = parse_model(cfg.at("model"), where + ".model");
  const IntensityMeasure& intensity = poisson_intensity(pm, where);
  auto n = positive_count(cfg, "n_samples", where);
  auto seed = get_seed(cfg, where);
  std::int64_t strata = cfg.contains("strata_per_axis")
                            ? positive_count(cfg, "strata_per_axis", where)
                            : 64;
  const Json& fns = need(cfg, "functionals", where);
  if (!fns.is_array() || fns.empty()) {
    fail(where, "'functionals' must be a nonempty array");
  }

  std::string csv = "name,lhs,rhs,se,n_samples,pass\n";
  Json rows = Json::array();
  Json fns_canon = Json::array();
  bool pass = true;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    auto f = parse_functional(
        fns[i], where + ".functionals[" + std::to_string(i) + "]");
    auto chk = check_mecke(intensity, f.u, n, seed, static_cast<int>(strata));
    bool ok = std::abs(chk.lhs - chk.rhs) <= 3.0 * chk.se + 1e-12;
    Json row{{"name", f.name}, {"lhs", chk.lhs},       {"rhs", chk.rhs},
             {"se", chk.se},   {"n_samples", chk.n_samples}, {"pass", ok}};
    if (f.expected.has_value()) {
      bool ok_exp = std::abs(chk.lhs - *f.expected) <= 3.0 * chk.se + 1e-12;
      row["expected"] = *f.expected;
      row["pass_expected"] = ok_exp;
      ok = ok && ok_exp;
      row["pass"] = ok;
      f.canon["expected"] = *f.expected;
    }
    pass = pass && ok;
    csv += csv_safe(f.name) + "," + fmt(chk.lhs) + "," + fmt(chk.rhs) + "," +
           fmt(chk.se) + "," + fmt(chk.n_samples) + "," + fmt(ok) + "\n";
    rows.push_back(std::move(row));
    fns_canon.push_back(std::move(f.canon));
  }
  Json canonical{{"schema_version", 1},
                 {"model", std::move(pm.canon)},
                 {"functionals", std::move(fns_canon)},
                 {"n_samples", n},
                 {"seed", seed},
                 {"strata_per_axis", strata},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"functionals", std::move(rows)}, {"pass", pass}}, pass);
}

RunResult run_laplace(const Json& cfg) {
  const std::string where = "laplace-check";
  require_keys(cfg,
               {"schema_version", "model", "functions", "n_samples", "seed"},
               {"tolerance", "quad_points_per_axis", "workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto pm = parse_model(cfg.at("model"), where + ".model");
  const IntensityMeasure& intensity = poisson_intensity(pm, where);
  auto n = positive_count(cfg, "n_samples", where);
  auto seed = get_seed(cfg, where);
  double tol =
      cfg.contains("tolerance") ? get_double(cfg, "tolerance", where) : 0.02;
  if (!(tol > 0.0)) fail(where, "'tolerance' must be positive");
  std::int64_t quad = cfg.contains("quad_points_per_axis")
                          ? positive_count(cfg, "quad_points_per_axis", where)
                          : 257;
  const Json& fns = need(cfg, "functions", where);
  if (!fns.is_array() || fns.empty()) {
    fail(where, "'functions' must be a nonempty array");
  }

  std::string csv = "name,empirical,se,closed_form,rel_error,pass\n";
  Json rows = Json::array();
  Json fns_canon = Json::array();
  bool pass = true;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const std::string fw = where + ".functions[" + std::to_string(i) + "]";
    require_keys(fns[i], {"fn"}, {"exact_exp_integral"}, fw);
    auto f = parse_smooth_fn(fns[i].at("fn"), fw + ".fn");
    BoundedTestFunction btf;
    btf.value = [fn = f.fn](const Point& x) { return fn.value(x); };
    Json entry{{"fn", std::move(f.canon)}};
    if (fns[i].contains("exact_exp_integral")) {
      const Json& e = fns[i].at("exact_exp_integral");
      if (!e.is_number()) fail(fw, "'exact_exp_integral' must be a number");
      btf.exact_exp_integral = e.get<double>();
      entry["exact_exp_integral"] = *btf.exact_exp_integral;
    }
    auto chk = check_laplace(intensity, btf, n, seed, static_cast<int>(quad));
    double denom = std::max(std::abs(chk.closed_form), 1e-300);
    double rel = std::abs(chk.empirical - chk.closed_form) / denom;
    bool ok = rel <= tol;
    pass = pass && ok;
    csv += csv_safe(f.fn.name()) + "," + fmt(chk.empirical) + "," +
           fmt(chk.se) + "," + fmt(chk.closed_form) + "," + fmt(rel) + "," +
           fmt(ok) + "\n";
    rows.push_back(Json{{"name", f.fn.name()},
                        {"empirical", chk.empirical},
                        {"se", chk.se},
                        {"closed_form", chk.closed_form},
                        {"rel_error", rel},
                        {"pass", ok}});
    fns_canon.push_back(std::move(entry));
  }
  Json canonical{{"schema_version", 1},
                 {"model", std::move(pm.canon)},
                 {"functions", std::move(fns_canon)},
                 {"n_samples", n},
                 {"seed", seed},
                 {"tolerance", tol},
                 {"quad_points_per_axis", quad},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"functions", std::move(rows)}, {"pass", pass}}, pass);
}

RunResult run_tightness(const Json& cfg) {
  const std::string where = "tightness";
  require_keys(
      cfg, {"schema_version", "model", "region", "n_max", "n_samples", "seed"},
      {"workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto pm = parse_model(cfg.at("model"), where + ".model");
  Window region = window_from_json(cfg.at("region"));
  auto n_max = positive_count(cfg, "n_max", where);
  auto n = positive_count(cfg, "n_samples", where);
  auto seed = get_seed(cfg, where);

  auto profile = tightness_profile(pm.model, region, static_cast<int>(n_max),
                                   n, seed);
  std::string csv = "n,empirical,exact,sigma,pass\n";
  Json rows = Json::array();
  bool pass = true;
  std::int64_t checked = 0;
  for (const auto& row : profile) {
    Json jrow{{"n", row.n}, {"empirical", row.empirical}};
    if (row.has_exact && row.n > 0) {
      double p = row.exact / row.n;
      double sigma = row.n * std::sqrt(std::max(p * (1.0 - p), 0.0) /
                                       static_cast<double>(n));
      bool ok = std::abs(row.empirical - row.exact) <= 3.0 * sigma + 1e-12;
      pass = pass && ok;
      ++checked;
      jrow["exact"] = row.exact;
      jrow["sigma"] = sigma;
      jrow["pass"] = ok;
      csv += fmt(static_cast<std::int64_t>(row.n)) + "," +
             fmt(row.empirical) + "," + fmt(row.exact) + "," + fmt(sigma) +
             "," + fmt(ok) + "\n";
    } else {
      csv += fmt(static_cast<std::int64_t>(row.n)) + "," +
             fmt(row.empirical) + ",,,true\n";
    }
    rows.push_back(std::move(jrow));
  }
  Json canonical{{"schema_version", 1},
                 {"model", std::move(pm.canon)},
                 {"region", window_to_json(region)},
                 {"n_max", n_max},
                 {"n_samples", n},
                 {"seed", seed},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"rows", std::move(rows)},
                     {"checked", checked},
                     {"pass", pass}},
                pass);
}

RunResult run_energy(const Json& cfg) {
  const std::string where = "energy";
  require_keys(cfg, {"schema_version", "model", "u", "n_samples", "seed"},
               {"v", "workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto pm = parse_model(cfg.at("model"), where + ".model");
  auto u = parse_cylinder(cfg.at("u"), where + ".u");
  auto n = positive_count(cfg, "n_samples", where);
  auto seed = get_seed(cfg, where);

  Json v_canon = u.canon;
  EnergyEstimate est;
  std::string v_name;
  if (cfg.contains("v")) {
    auto v = parse_cylinder(cfg.at("v"), where + ".v");
    v_canon = v.canon;
    v_name = v.fn.name();
    est = energy_monte_carlo(u.fn, v.fn, pm.model, n, seed);
  } else {
    v_name = u.fn.name();
    est = energy_monte_carlo(u.fn, u.fn, pm.model, n, seed);
  }

  const std::string model_kind = pm.canon.at("kind").get<std::string>();
  std::string csv = "u_name,model,estimate,se,n_samples,seed\n";
  csv += csv_safe(u.fn.name()) + "," + model_kind + "," + fmt(est.estimate) +
         "," + fmt(est.se) + "," + fmt(est.n_samples) + "," +
         fmt(static_cast<std::int64_t>(seed)) + "\n";
  Json canonical{{"schema_version", 1},
                 {"model", std::move(pm.canon)},
                 {"u", std::move(u.canon)},
                 {"v", std::move(v_canon)},
                 {"n_samples", n},
                 {"seed", seed},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"u_name", u.fn.name()},
                     {"v_name", v_name},
                     {"estimate", est.estimate},
                     {"se", est.se},
                     {"n_samples", est.n_samples}},
                true);
}

RunResult run_semigroup(const Json& cfg) {
  const std::string where = "semigroup";
  require_keys(cfg,
               {"schema_version", "model", "geometry", "dt", "horizon", "xi",
                "lambda", "t_grid", "n_paths", "seed"},
               {"workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto d = parse_diffusion(cfg, where);
  auto xi = parse_event(cfg.at("xi"), where + ".xi");
  auto lambda = parse_event(cfg.at("lambda"), where + ".lambda");
  auto grid = grid_from(cfg, "t_grid", where);
  auto n_paths = positive_count(cfg, "n_paths", where);
  auto seed = get_seed(cfg, where);

  std::string csv = "t,estimate,se,n_paths,hits,lambda_hits\n";
  Json rows = Json::array();
  for (double t : grid) {
    auto est = diffusion::semigroup_estimate(xi.event, lambda.event, t, d.spec,
                                             n_paths, seed);
    csv += fmt(t) + "," + fmt(est.estimate) + "," + fmt(est.se) + "," +
           fmt(est.n_paths) + "," + fmt(est.hits) + "," +
           fmt(est.lambda_hits) + "\n";
    rows.push_back(Json{{"t", t},
                        {"estimate", est.estimate},
                        {"se", est.se},
                        {"n_paths", est.n_paths},
                        {"hits", est.hits},
                        {"lambda_hits", est.lambda_hits}});
  }
  Json canonical{{"schema_version", 1},
                 {"model", std::move(d.model_canon)},
                 {"geometry", std::move(d.geometry_canon)},
                 {"dt", d.dt},
                 {"horizon", d.horizon},
                 {"xi", std::move(xi.canon)},
                 {"lambda", std::move(lambda.canon)},
                 {"t_grid", grid},
                 {"n_paths", n_paths},
                 {"seed", seed},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"rows", std::move(rows)}}, true);
}

RunResult run_varadhan(const Json& cfg) {
  const std::string where = "varadhan";
  require_keys(cfg,
               {"schema_version", "model", "geometry", "dt", "horizon", "xi",
                "lambda", "t_grid", "n_paths", "seed"},
               {"tolerance", "workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto d = parse_diffusion(cfg, where);
  auto xi = parse_event(cfg.at("xi"), where + ".xi");
  auto lambda = parse_event(cfg.at("lambda"), where + ".lambda");
  auto grid = grid_from(cfg, "t_grid", where);
  auto n_paths = positive_count(cfg, "n_paths", where);
  auto seed = get_seed(cfg, where);
  std::optional<double> tol;
  if (cfg.contains("tolerance")) {
    tol = get_double(cfg, "tolerance", where);
    if (!(*tol > 0.0)) fail(where, "'tolerance' must be positive");
  }

  auto rep = diffusion::varadhan_profile(xi.event, lambda.event, grid, d.spec,
                                         n_paths, seed);
  std::string csv = "t,estimate,se,rate,rate_se\n";
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    csv += fmt(row.t) + "," + fmt(row.estimate) + "," + fmt(row.se) + "," +
           fmt(row.rate) + "," + fmt(row.rate_se) + "\n";
    rows.push_back(Json{{"t", row.t},
                        {"estimate", row.estimate},
                        {"se", row.se},
                        {"rate", row.rate},
                        {"rate_se", row.rate_se}});
  }
  bool pass = true;
  Json results{{"rows", std::move(rows)},
               {"extrapolated", rep.extrapolated},
               {"extrapolated_se", rep.extrapolated_se},
               {"lambda_mass", rep.lambda_mass},
               {"openness_note", rep.openness_note}};
  if (rep.reference.has_value()) {
    results["reference"] = *rep.reference;
  } else {
    results["reference"] = nullptr;
  }
  if (tol.has_value()) {
    if (!rep.reference.has_value()) {
      fail(where,
           "'tolerance' needs a reference-capable xi "
           "(distance_ball or restriction_set)");
    }
    double rel = std::abs(rep.extrapolated - *rep.reference) /
                 std::max(std::abs(*rep.reference), 1e-300);
    results["rel_error"] = rel;
    pass = rel <= *tol;
  }
  results["pass"] = pass;

  Json canonical{{"schema_version", 1},
                 {"model", std::move(d.model_canon)},
                 {"geometry", std::move(d.geometry_canon)},
                 {"dt", d.dt},
                 {"horizon", d.horizon},
                 {"xi", std::move(xi.canon)},
                 {"lambda", std::move(lambda.canon)},
                 {"t_grid", grid},
                 {"n_paths", n_paths},
                 {"seed", seed},
                 {"workers", workers}};
  if (tol.has_value()) canonical["tolerance"] = *tol;
  return finish(where, canonical, std::move(csv), std::move(results), pass);
}

RunResult run_gaussian_bound(const Json& cfg) {
  const std::string where = "gaussian-bound";
  require_keys(cfg,
               {"schema_version", "model", "geometry", "dt", "horizon",
                "lambda_a", "lambda_b", "t_grid", "n_paths", "seed"},
               {"workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto d = parse_diffusion(cfg, where);
  auto a = parse_event(cfg.at("lambda_a"), where + ".lambda_a");
  auto b = parse_event(cfg.at("lambda_b"), where + ".lambda_b");
  auto grid = grid_from(cfg, "t_grid", where);
  auto n_paths = positive_count(cfg, "n_paths", where);
  auto seed = get_seed(cfg, where);

  auto rep = diffusion::gaussian_bound_check(a.event, b.event, grid, d.spec,
                                             n_paths, seed);
  std::string csv = "t,estimate,se,bound,violation\n";
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    csv += fmt(row.t) + "," + fmt(row.estimate) + "," + fmt(row.se) + "," +
           fmt(row.bound) + "," + fmt(row.violation) + "\n";
    rows.push_back(Json{{"t", row.t},
                        {"estimate", row.estimate},
                        {"se", row.se},
                        {"bound", row.bound},
                        {"violation", row.violation}});
  }
  Json canonical{{"schema_version", 1},
                 {"model", std::move(d.model_canon)},
                 {"geometry", std::move(d.geometry_canon)},
                 {"dt", d.dt},
                 {"horizon", d.horizon},
                 {"lambda_a", std::move(a.canon)},
                 {"lambda_b", std::move(b.canon)},
                 {"t_grid", grid},
                 {"n_paths", n_paths},
                 {"seed", seed},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"rows", std::move(rows)},
                     {"mass_a", rep.mass_a},
                     {"mass_a_se", rep.mass_a_se},
                     {"mass_b", rep.mass_b},
                     {"mass_b_se", rep.mass_b_se},
                     {"distance_lower", rep.distance_lower},
                     {"pass", rep.pass}},
                rep.pass);
}

RunResult run_rademacher(const Json& cfg) {
  const std::string where = "rademacher";
  require_keys(cfg,
               {"schema_version", "model", "geometry", "dt", "horizon", "u",
                "n_pairs", "seed"},
               {"options", "workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  auto d = parse_diffusion(cfg, where);
  const Json& uj = need(cfg, "u", where);
  require_keys(uj, {"gamma_ref", "u_window"}, {"cap", "scale"}, where + ".u");
  diffusion::LipschitzFunctionSpec u{
      configuration_from_json(uj.at("gamma_ref")),
      window_from_json(uj.at("u_window")),
      uj.contains("cap") ? get_double(uj, "cap", where + ".u") : 1.0,
      uj.contains("scale") ? get_double(uj, "scale", where + ".u") : 1.0};
  auto n_pairs = positive_count(cfg, "n_pairs", where);
  auto seed = get_seed(cfg, where);

  diffusion::RademacherOptions opt;
  Json opt_canon;
  {
    const Json oj = cfg.contains("options") ? cfg.at("options") : Json::object();
    const std::string ow = where + ".options";
    require_keys(oj, {},
                 {"n_cdc_gammas", "cdc_t_grid", "cdc_n_paths",
                  "max_attempt_factor"},
                 ow);
    if (oj.contains("n_cdc_gammas")) {
      opt.n_cdc_gammas = get_int(oj, "n_cdc_gammas", ow);
    }
    if (oj.contains("cdc_t_grid")) {
      opt.cdc_t_grid = double_vector_from_json(oj.at("cdc_t_grid"),
                                               ow + ".cdc_t_grid");
    }
    if (oj.contains("cdc_n_paths")) {
      opt.cdc_n_paths = get_int(oj, "cdc_n_paths", ow);
    }
    if (oj.contains("max_attempt_factor")) {
      opt.max_attempt_factor = get_int(oj, "max_attempt_factor", ow);
    }
    opt_canon = Json{{"n_cdc_gammas", opt.n_cdc_gammas},
                     {"cdc_t_grid", opt.cdc_t_grid},
                     {"cdc_n_paths", opt.cdc_n_paths},
                     {"max_attempt_factor", opt.max_attempt_factor}};
  }

  auto rep = diffusion::rademacher_check(u, d.spec, n_pairs, seed, opt);
  std::string csv =
      "lipschitz_constant,max_ratio,finite_pairs,max_cdc,cdc_gammas,pass\n";
  csv += fmt(rep.lipschitz_constant) + "," + fmt(rep.max_ratio) + "," +
         fmt(rep.finite_pairs) + "," + fmt(rep.max_cdc) + "," +
         fmt(rep.cdc_gammas) + "," + fmt(rep.pass) + "\n";
  Json canonical{{"schema_version", 1},
                 {"model", std::move(d.model_canon)},
                 {"geometry", std::move(d.geometry_canon)},
                 {"dt", d.dt},
                 {"horizon", d.horizon},
                 {"u",
                  {{"gamma_ref", configuration_to_json(u.gamma_ref)},
                   {"u_window", window_to_json(u.u_window)},
                   {"cap", u.cap},
                   {"scale", u.scale}}},
                 {"n_pairs", n_pairs},
                 {"seed", seed},
                 {"options", std::move(opt_canon)},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"lipschitz_constant", rep.lipschitz_constant},
                     {"max_ratio", rep.max_ratio},
                     {"finite_pairs", rep.finite_pairs},
                     {"max_cdc", rep.max_cdc},
                     {"cdc_gammas", rep.cdc_gammas},
                     {"pass", rep.pass}},
                rep.pass);
}

RunResult run_stationarity(const Json& cfg) {
  const std::string where = "stationarity";
  require_keys(cfg,
               {"schema_version", "model", "geometry", "dt", "horizon",
                "statistics", "n_chains", "seed"},
               {"negate_drift", "workers"}, where);
  check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);
  // The integrator horizon must dominate the step size scale even for short
  // test horizons, so it is floored at 100 steps.
  auto d = parse_diffusion(cfg, where,
                           100.0 * get_double(cfg, "dt", where));
  const Json& stats_j = need(cfg, "statistics", where);
  if (!stats_j.is_array() || stats_j.empty()) {
    fail(where, "'statistics' must be a nonempty array of windows");
  }
  std::vector<Window> windows;
  Json stats_canon = Json::array();
  for (const auto& wj : stats_j) {
    windows.push_back(window_from_json(wj));
    stats_canon.push_back(window_to_json(windows.back()));
  }
  auto n_chains = positive_count(cfg, "n_chains", where);
  auto seed = get_seed(cfg, where);
  bool negate = cfg.contains("negate_drift")
                    ? get_bool(cfg, "negate_drift", where)
                    : false;

  auto rep = diffusion::stationarity_test(d.spec, d.horizon, windows, n_chains,
                                          seed, negate);
  std::string csv = "window_index,p_value,alpha,pass\n";
  Json p_values = Json::array();
  for (std::size_t i = 0; i < rep.p_values.size(); ++i) {
    bool ok = rep.p_values[i] > rep.alpha;
    csv += fmt(static_cast<std::int64_t>(i)) + "," + fmt(rep.p_values[i]) +
           "," + fmt(rep.alpha) + "," + fmt(ok) + "\n";
    p_values.push_back(rep.p_values[i]);
  }
  Json canonical{{"schema_version", 1},
                 {"model", std::move(d.model_canon)},
                 {"geometry", std::move(d.geometry_canon)},
                 {"dt", d.dt},
                 {"horizon", d.horizon},
                 {"statistics", std::move(stats_canon)},
                 {"n_chains", n_chains},
                 {"seed", seed},
                 {"negate_drift", negate},
                 {"workers", workers}};
  return finish(where, canonical, std::move(csv),
                Json{{"p_values", std::move(p_values)},
                     {"alpha", rep.alpha},
                     {"pass", rep.pass}},
                rep.pass);
}

Json catalog_object() {
  auto entry = [](const char* name, Json required, Json optional) {
    return Json{{"name", name},
                {"required", std::move(required)},
                {"optional", std::move(optional)}};
  };
  Json c;
  c["artifact_version"] = CONFIGLAB_VERSION;
  c["schema_version"] = 1;
  c["subcommands"] = subcommand_names();
  c["models"] = Json::array({
      entry("poisson", {"window", "rate"}, Json::array()),
      entry("mixed_poisson", {"window", "rate", "mixing"}, Json::array()),
      entry("gibbs", {"window", "rate", "phi", "psi"}, {"mcmc", "initial"}),
      entry("ginibre", {"matrix_size"}, Json::array()),
  });
  c["geometries"] = Json::array({
      entry("reflecting_box", Json::array(), Json::array()),
      entry("torus", {"period"}, Json::array()),
  });
  c["events"] = Json::array({
      entry("concentration", {"region", "n", "mode"}, Json::array()),
      entry("restriction_set", {"gamma_ref", "u_window"}, {"tolerance"}),
      entry("distance_ball", {"center", "radius"}, Json::array()),
      entry("whole_space", Json::array(), Json::array()),
  });
  c["test_functions"] = Json::array({
      entry("smooth_bump", {"center", "radius"}, {"height"}),
      entry("gaussian_bump", {"center", "sigma", "radius"}, {"height"}),
      entry("nonlip_tent", Json::array(), Json::array()),
      entry("coordinate_taper", {"axis", "lo", "hi", "margin"}, Json::array()),
  });
  c["outer_functions"] = Json::array({
      entry("identity", Json::array(), Json::array()),
      entry("arc_tangent", Json::array(), Json::array()),
      entry("constant", {"value"}, Json::array()),
      entry("linear", {"coefficients"}, Json::array()),
  });
  c["free_potentials"] = Json::array({
      entry("zero", Json::array(), Json::array()),
      entry("quadratic", {"strength", "center"}, Json::array()),
      entry("linear", {"slope"}, Json::array()),
      entry("cosine_1d", {"amplitude", "frequency"}, Json::array()),
  });
  c["pair_potentials"] = Json::array({
      entry("zero", Json::array(), Json::array()),
      entry("inverse_quadratic", {"strength", "epsilon"}, Json::array()),
      entry("gaussian_pair", {"strength", "range"}, Json::array()),
      entry("hard_core", {"radius"}, Json::array()),
  });
  c["mecke_functionals"] = Json::array({
      entry("indicator_in", {"region"}, Json::array()),
      entry("indicator_count_eq", {"region", "n"}, Json::array()),
      entry("indicator_other_geq", {"region", "other", "n"}, Json::array()),
      entry("neighbor_count", {"range"}, Json::array()),
      entry("smooth_weight", {"fn"}, Json::array()),
  });
  c["lipschitz_families"] = Json::array({
      entry("rho_gamma_U", {"gamma_ref", "u_window"}, {"cap", "scale"}),
  });
  return c;
}

RunResult run_list_builtins(const Json& cfg) {
  const std::string where = "list-builtins";
  require_keys(cfg, {}, {"schema_version", "workers"}, where);
  if (cfg.contains("schema_version")) check_schema_version(cfg, where);
  auto workers = parse_workers(cfg, where);

  Json cat = catalog_object();
  std::string csv = "kind,name\n";
  const char* sections[] = {"models",          "geometries",
                            "events",          "test_functions",
                            "outer_functions", "free_potentials",
                            "pair_potentials", "mecke_functionals",
                            "lipschitz_families"};
  for (const char* section : sections) {
    for (const auto& e : cat.at(section)) {
      csv += std::string(section) + "," + e.at("name").get<std::string>() +
             "\n";
    }
  }
  Json canonical{{"schema_version", 1}, {"workers", workers}};
  return finish(where, canonical, std::move(csv), std::move(cat), true);
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{
      "sample",         "distance",   "mecke-check", "laplace-check",
      "tightness",      "energy",     "semigroup",   "varadhan",
      "gaussian-bound", "rademacher", "stationarity", "list-builtins"};
  return names;
}

RunResult run_subcommand(const std::string& subcommand,
                         const std::string& config_json) {
  using Handler = RunResult (*)(const Json&);
  static const std::map<std::string, Handler> table{
      {"sample", run_sample},
      {"distance", run_distance},
      {"mecke-check", run_mecke},
      {"laplace-check", run_laplace},
      {"tightness", run_tightness},
      {"energy", run_energy},
      {"semigroup", run_semigroup},
      {"varadhan", run_varadhan},
      {"gaussian-bound", run_gaussian_bound},
      {"rademacher", run_rademacher},
      {"stationarity", run_stationarity},
      {"list-builtins", run_list_builtins},
  };
  auto it = table.find(subcommand);
  if (it == table.end()) {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  Json cfg;
  try {
    cfg = Json::parse(config_json);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  return it->second(cfg);
}

std::string catalog_json() { return catalog_object().dump(2) + "\n"; }

const char* artifact_version() { return CONFIGLAB_VERSION; }

}  // namespace configlab::harness
