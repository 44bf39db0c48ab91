// Copyright 2026 The Dicke Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Run configuration, read from JSON. Rates are given as f = omega / 2pi in
// kHz, times in ms, lengths in um, phases in rad. Every section except
// "model" may be omitted; resolved_json() echoes the fully explicit form.

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "dicke/basis.hpp"
#include "dicke/crystal.hpp"
#include "dicke/error.hpp"
#include "dicke/model.hpp"
#include "dicke/rotation.hpp"
#include "dicke/state.hpp"
#include "dicke/units.hpp"

namespace dicke {

using json = nlohmann::ordered_json;

/// Gaussian beam: Omega_i = peak exp(-dx^2/wx^2 - dz^2/wz^2) (a zero waist
/// means flat along that axis); phase_i = gx dx + gz dz + c (dx^2 + dz^2).
struct LaserProfile {
  double peak_khz = 0.2;
  std::array<double, 2> center_um{0.0, 0.0};
  std::array<double, 2> waist_um{0.0, 0.0};
  std::array<double, 2> phase_gradient_rad_per_um{0.0, 0.0};
  double phase_curvature_rad_per_um2 = 0.0;
};

struct CrystalSection {
  std::array<double, 3> trap_khz{540.0, 1960.0, 100.0};
  int n_ions = 16;
  std::uint64_t seed = 0;
  std::string mode_file;  ///< use a precomputed table instead of solving
};

struct SiteEntry {
  double omega_khz = 0.0;
  double b = 0.0;
  double phi_rad = 0.0;
};

struct ModelSection {
  double eta = 1.0;
  double delta_khz = 0.0;
  double b_khz = 0.0;
  std::optional<int> n_max;  ///< empty: adapt_truncation
  double truncation_tolerance = 1e-8;
  std::vector<SiteEntry> sites;  ///< explicit table; empty selects the crystal source
  ModeSelector mode = ModeSelector::center_of_mass();
  LaserProfile laser;
  bool allow_large = false;  ///< required above kLargeSystemSites spins
};

struct RepresentationSection {
  BasisKind kind = BasisKind::kSubensemble;
  int groups = 2;
};

struct EvolutionSection {
  double t_max_ms = 4.0;
  double dt_ms = 0.25;
  bool echo = true;
  Axis pivot = Axis::kX;
  bool restore_frame = true;
  int krylov_dim = 30;
  double step_tolerance = 1e-10;
  SpinDirection initial = SpinDirection::kPlusX;
  double boson_nbar = 0.0;
  int boson_fock = 0;
  int trajectories = 32;  ///< used only when boson_nbar > 0
  bool dual_check = false;
};

struct MeasurementSection {
  std::vector<Axis> axes{Axis::kX, Axis::kY, Axis::kZ};
  int directions = 25;
  int shots = 50;
  int samples_per_time = 200;
  std::vector<std::vector<int>> site_groups;  ///< empty: four sites nearest the crystal center
};

enum class TomoMethod { kDicke, kFull, kBoth };

struct TomographySection {
  TomoMethod method = TomoMethod::kBoth;
  std::vector<int> k_values{1, 2, 3, 4};
  int full_k_max = 2;
  double fit_time_ms = 4.5;
  int max_iterations = 10000;
  double tolerance = 1e-10;
};

struct EngineeredSection {
  int mode_index = 2;
  int pairs_per_class = 2;
};

struct RunConfig {
  ModelSection model;
  CrystalSection crystal;
  RepresentationSection representation;
  EvolutionSection evolution;
  MeasurementSection measurement;
  TomographySection tomography;
  EngineeredSection engineered;
  std::size_t dimension_cap = std::size_t{1} << 22;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  unsigned threads = 0;  ///< 0: hardware concurrency
};

inline constexpr int kLargeSystemSites = 20;

inline unsigned resolved_threads(const RunConfig& c) {
  return c.threads > 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
}

inline const char* to_string(TomoMethod m) {
  switch (m) {
    case TomoMethod::kDicke: return "dicke";
    case TomoMethod::kFull: return "full";
    default: return "both";
  }
}

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require(j.is_object(), ErrorKind::kConfigError, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    require(ok.count(it.key()) > 0, ErrorKind::kConfigError, "unknown key " + where + "." + it.key());
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::kX;
  if (s == "y") return Axis::kY;
  if (s == "z") return Axis::kZ;
  throw Error(ErrorKind::kConfigError, "axis must be x, y or z: " + s);
}

inline ModeSelector parse_mode(const json& j) {
  if (j.is_string()) {
    require(j.get<std::string>() == "com", ErrorKind::kConfigError, "mode must be \"com\" or an index");
    return ModeSelector::center_of_mass();
  }
  return ModeSelector::at(j.get<int>());
}

inline void parse_model(const json& j, ModelSection& m) {
  check_keys(j, "model", {"eta", "delta_khz", "b_khz", "n_max", "truncation_tolerance", "sites", "mode", "laser",
                          "allow_large"});
  require(j.contains("delta_khz"), ErrorKind::kConfigError, "model.delta_khz is required");
  read(j, "eta", m.eta);
  read(j, "delta_khz", m.delta_khz);
  read(j, "b_khz", m.b_khz);
  read(j, "truncation_tolerance", m.truncation_tolerance);
  read(j, "allow_large", m.allow_large);
  if (j.contains("n_max")) {
    const auto& n = j.at("n_max");
    if (n.is_string()) {
      require(n.get<std::string>() == "auto", ErrorKind::kConfigError, "n_max must be an integer or \"auto\"");
      m.n_max.reset();
    } else {
      m.n_max = n.get<int>();
    }
  }
  if (j.contains("sites")) {
    for (const auto& s : j.at("sites")) {
      check_keys(s, "model.sites[]", {"omega_khz", "b", "phi_rad"});
      SiteEntry e;
      read(s, "omega_khz", e.omega_khz);
      read(s, "b", e.b);
      read(s, "phi_rad", e.phi_rad);
      m.sites.push_back(e);
    }
  }
  if (j.contains("mode")) m.mode = parse_mode(j.at("mode"));
  if (j.contains("laser")) {
    const auto& l = j.at("laser");
    check_keys(l, "model.laser", {"peak_khz", "center_um", "waist_um", "phase_gradient_rad_per_um",
                                  "phase_curvature_rad_per_um2"});
    read(l, "peak_khz", m.laser.peak_khz);
    read(l, "center_um", m.laser.center_um);
    read(l, "waist_um", m.laser.waist_um);
    read(l, "phase_gradient_rad_per_um", m.laser.phase_gradient_rad_per_um);
    read(l, "phase_curvature_rad_per_um2", m.laser.phase_curvature_rad_per_um2);
  }
}

}  // namespace detail

/// Parses and validates a configuration document.
inline RunConfig parse_run_config(const json& j) {
  RunConfig c;
  try {
    detail::check_keys(j, "config", {"model", "crystal", "representation", "evolution", "measurement", "tomography",
                                     "engineered", "dimension_cap", "seed", "output_dir", "threads"});
    if (j.contains("model")) detail::parse_model(j.at("model"), c.model);
    if (j.contains("crystal")) {
      const auto& s = j.at("crystal");
      detail::check_keys(s, "crystal", {"trap_khz", "n_ions", "seed", "mode_file"});
      detail::read(s, "trap_khz", c.crystal.trap_khz);
      detail::read(s, "n_ions", c.crystal.n_ions);
      detail::read(s, "seed", c.crystal.seed);
      detail::read(s, "mode_file", c.crystal.mode_file);
    }
    if (j.contains("representation")) {
      const auto& s = j.at("representation");
      detail::check_keys(s, "representation", {"kind", "groups"});
      if (s.contains("kind")) {
        const auto k = s.at("kind").get<std::string>();
        require(k == "full" || k == "subensemble", ErrorKind::kConfigError, "representation.kind: " + k);
        c.representation.kind = k == "full" ? BasisKind::kFull : BasisKind::kSubensemble;
      }
      detail::read(s, "groups", c.representation.groups);
    }
    if (j.contains("evolution")) {
      const auto& s = j.at("evolution");
      detail::check_keys(s, "evolution", {"t_max_ms", "dt_ms", "echo", "pivot", "restore_frame", "krylov_dim",
                                          "step_tolerance", "initial", "boson_nbar", "boson_fock", "trajectories",
                                          "dual_check"});
      auto& e = c.evolution;
      detail::read(s, "t_max_ms", e.t_max_ms);
      detail::read(s, "dt_ms", e.dt_ms);
      detail::read(s, "echo", e.echo);
      if (s.contains("pivot")) e.pivot = detail::parse_axis(s.at("pivot").get<std::string>());
      detail::read(s, "restore_frame", e.restore_frame);
      detail::read(s, "krylov_dim", e.krylov_dim);
      detail::read(s, "step_tolerance", e.step_tolerance);
      if (s.contains("initial")) {
        try {
          e.initial = parse_spin_direction(s.at("initial").get<std::string>());
        } catch (const Error& err) {
          throw Error(ErrorKind::kConfigError, err.what());
        }
      }
      detail::read(s, "boson_nbar", e.boson_nbar);
      detail::read(s, "boson_fock", e.boson_fock);
      detail::read(s, "trajectories", e.trajectories);
      detail::read(s, "dual_check", e.dual_check);
    }
    if (j.contains("measurement")) {
      const auto& s = j.at("measurement");
      detail::check_keys(s, "measurement", {"axes", "directions", "shots", "samples_per_time", "site_groups"});
      auto& m = c.measurement;
      if (s.contains("axes")) {
        m.axes.clear();
        for (const auto& a : s.at("axes")) m.axes.push_back(detail::parse_axis(a.get<std::string>()));
      }
      detail::read(s, "directions", m.directions);
      detail::read(s, "shots", m.shots);
      detail::read(s, "samples_per_time", m.samples_per_time);
      detail::read(s, "site_groups", m.site_groups);
    }
    if (j.contains("tomography")) {
      const auto& s = j.at("tomography");
      detail::check_keys(s, "tomography", {"method", "k_values", "full_k_max", "fit_time_ms", "max_iterations",
                                           "tolerance"});
      auto& t = c.tomography;
      if (s.contains("method")) {
        const auto mth = s.at("method").get<std::string>();
        if (mth == "dicke") t.method = TomoMethod::kDicke;
        else if (mth == "full") t.method = TomoMethod::kFull;
        else if (mth == "both") t.method = TomoMethod::kBoth;
        else throw Error(ErrorKind::kConfigError, "tomography.method: " + mth);
      }
      detail::read(s, "k_values", t.k_values);
      detail::read(s, "full_k_max", t.full_k_max);
      detail::read(s, "fit_time_ms", t.fit_time_ms);
      detail::read(s, "max_iterations", t.max_iterations);
      detail::read(s, "tolerance", t.tolerance);
    }
    if (j.contains("engineered")) {
      const auto& s = j.at("engineered");
      detail::check_keys(s, "engineered", {"mode_index", "pairs_per_class"});
      detail::read(s, "mode_index", c.engineered.mode_index);
      detail::read(s, "pairs_per_class", c.engineered.pairs_per_class);
    }
    detail::read(j, "dimension_cap", c.dimension_cap);
    detail::read(j, "seed", c.seed);
    detail::read(j, "output_dir", c.output_dir);
    detail::read(j, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, std::string("config: ") + e.what());
  }
  return c;
}

/// Range checks that do not need the model to be built.
inline void validate_run_config(const RunConfig& c) {
  auto cfg = [](bool ok, const std::string& msg) { require(ok, ErrorKind::kConfigError, msg); };
  cfg(c.model.eta >= 0.0, "model.eta must be >= 0");
  cfg(!c.model.n_max || *c.model.n_max >= 0, "model.n_max must be >= 0");
  cfg(c.model.truncation_tolerance > 0.0 && c.model.truncation_tolerance < 1.0, "model.truncation_tolerance");
  cfg(c.crystal.n_ions >= 1, "crystal.n_ions must be >= 1");
  cfg(c.representation.groups >= 1, "representation.groups must be >= 1");
  cfg(c.evolution.t_max_ms >= 0.0 && c.evolution.dt_ms > 0.0, "evolution.t_max_ms >= 0 and dt_ms > 0");
  cfg(c.evolution.krylov_dim >= 2, "evolution.krylov_dim must be >= 2");
  cfg(c.evolution.step_tolerance > 0.0, "evolution.step_tolerance must be > 0");
  cfg(c.evolution.boson_nbar >= 0.0 && c.evolution.boson_fock >= 0, "evolution boson occupation must be >= 0");
  cfg(c.evolution.trajectories >= 1, "evolution.trajectories must be >= 1");
  cfg(c.measurement.directions >= 1 && c.measurement.shots >= 1, "measurement.directions and shots must be >= 1");
  cfg(c.measurement.samples_per_time >= 0, "measurement.samples_per_time must be >= 0");
  for (const auto& g : c.measurement.site_groups) cfg(!g.empty(), "measurement.site_groups entries must be non-empty");
  for (int k : c.tomography.k_values) cfg(k >= 1 && k <= 8, "tomography.k_values must lie in [1, 8]");
  cfg(!c.tomography.k_values.empty(), "tomography.k_values must be non-empty");
  cfg(c.tomography.full_k_max >= 1 && c.tomography.full_k_max <= 4, "tomography.full_k_max must lie in [1, 4]");
  cfg(c.tomography.max_iterations >= 1 && c.tomography.tolerance > 0.0, "tomography iteration limits");
  cfg(c.engineered.pairs_per_class >= 1, "engineered.pairs_per_class must be >= 1");
  cfg(c.dimension_cap >= 1, "dimension_cap must be >= 1");
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kConfigError, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kConfigError, std::string("config: ") + e.what());
  }
  RunConfig c = parse_run_config(j);
  validate_run_config(c);
  return c;
}

/// The fully explicit configuration.
inline json resolved_json(const RunConfig& c) {
  json j;
  json model;
  model["eta"] = c.model.eta;
  model["delta_khz"] = c.model.delta_khz;
  model["b_khz"] = c.model.b_khz;
  model["n_max"] = c.model.n_max ? json(*c.model.n_max) : json("auto");
  model["truncation_tolerance"] = c.model.truncation_tolerance;
  if (!c.model.sites.empty()) {
    json sites = json::array();
    for (const auto& s : c.model.sites) sites.push_back({{"omega_khz", s.omega_khz}, {"b", s.b}, {"phi_rad", s.phi_rad}});
    model["sites"] = sites;
  } else {
    model["mode"] = c.model.mode.com ? json("com") : json(c.model.mode.index);
    const auto& l = c.model.laser;
    model["laser"] = {{"peak_khz", l.peak_khz},
                      {"center_um", l.center_um},
                      {"waist_um", l.waist_um},
                      {"phase_gradient_rad_per_um", l.phase_gradient_rad_per_um},
                      {"phase_curvature_rad_per_um2", l.phase_curvature_rad_per_um2}};
  }
  model["allow_large"] = c.model.allow_large;
  j["model"] = model;
  j["crystal"] = {{"trap_khz", c.crystal.trap_khz},
                  {"n_ions", c.crystal.n_ions},
                  {"seed", c.crystal.seed},
                  {"mode_file", c.crystal.mode_file}};
  j["representation"] = {{"kind", c.representation.kind == BasisKind::kFull ? "full" : "subensemble"}, {"groups", c.representation.groups}};
  const auto& e = c.evolution;
  j["evolution"] = {{"t_max_ms", e.t_max_ms},
                    {"dt_ms", e.dt_ms},
                    {"echo", e.echo},
                    {"pivot", std::string(1, axis_name(e.pivot))},
                    {"restore_frame", e.restore_frame},
                    {"krylov_dim", e.krylov_dim},
                    {"step_tolerance", e.step_tolerance},
                    {"initial", to_string(e.initial)},
                    {"boson_nbar", e.boson_nbar},
                    {"boson_fock", e.boson_fock},
                    {"trajectories", e.trajectories},
                    {"dual_check", e.dual_check}};
  json axes = json::array();
  for (Axis a : c.measurement.axes) axes.push_back(std::string(1, axis_name(a)));
  j["measurement"] = {{"axes", axes},
                      {"directions", c.measurement.directions},
                      {"shots", c.measurement.shots},
                      {"samples_per_time", c.measurement.samples_per_time},
                      {"site_groups", c.measurement.site_groups}};
  const auto& t = c.tomography;
  j["tomography"] = {{"method", to_string(t.method)},         {"k_values", t.k_values},
                     {"full_k_max", t.full_k_max},            {"fit_time_ms", t.fit_time_ms},
                     {"max_iterations", t.max_iterations},    {"tolerance", t.tolerance}};
  j["engineered"] = {{"mode_index", c.engineered.mode_index}, {"pairs_per_class", c.engineered.pairs_per_class}};
  j["dimension_cap"] = c.dimension_cap;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  return j;
}

}  // namespace dicke
