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

// Experiment pipelines behind the dicke_lab subcommands. Each cmd_* writes
// plain CSV data files plus manifest.json into the output directory and
// returns the same numbers in memory.
//
// Models with delta < 0 are simulated through their sign-normalized partner
// (complex-conjugate dynamics). Reported <sigma_y> and S_y histograms are
// mapped back; entropies are conjugation invariant, so tomography runs on the
// normalized state directly.
//
// Random streams, all derived from the run seed with derive_seed:
//   1 thermal boson trajectories, 2 tomography directions,
//   3 tomography shots, 4 histogram samples.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dicke/checkpoint.hpp"
#include "dicke/config.hpp"
#include "dicke/crystal.hpp"
#include "dicke/density_matrix.hpp"
#include "dicke/engine.hpp"
#include "dicke/measure.hpp"
#include "dicke/mode_file.hpp"
#include "dicke/model.hpp"
#include "dicke/parallel.hpp"
#include "dicke/shots_io.hpp"
#include "dicke/tomo.hpp"

namespace dicke {

inline constexpr const char* kArtifactVersion = "0.1.0";

namespace stream {
inline constexpr std::uint64_t kBoson = 1;
inline constexpr std::uint64_t kDirections = 2;
inline constexpr std::uint64_t kShots = 3;
inline constexpr std::uint64_t kHistogram = 4;
}  // namespace stream

// ---------------------------------------------------------------------------
// manifest and output files

struct FileEntry {
  std::string name;
  std::uint32_t crc32 = 0;
  std::size_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string version = kArtifactVersion;
  json config;
  std::vector<std::pair<std::string, double>> timings_s;
  std::vector<FileEntry> files;
  std::vector<std::string> warnings;
  bool complete = false;
  std::string error;
};

inline json to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["complete"] = m.complete;
  if (!m.error.empty()) j["error"] = m.error;
  j["config"] = m.config;
  json t = json::object();
  for (const auto& [k, v] : m.timings_s) t[k] = v;
  j["timings_s"] = t;
  json files = json::array();
  for (const auto& f : m.files) {
    char crc[16];
    std::snprintf(crc, sizeof(crc), "%08x", f.crc32);
    files.push_back({{"name", f.name}, {"crc32", crc}, {"bytes", f.bytes}});
  }
  j["files"] = files;
  j["warnings"] = m.warnings;
  return j;
}

/// Output directory that records every file it writes in the manifest.
class OutputDir {
 public:
  OutputDir(std::string path, RunManifest& manifest) : path_(std::move(path)), manifest_(manifest) {
    std::error_code ec;
    std::filesystem::create_directories(path_, ec);
    require(!ec, ErrorKind::kIOError, "cannot create output directory " + path_);
  }

  const std::string& path() const { return path_; }

  void write(const std::string& name, const std::string& content) {
    const std::string full = (std::filesystem::path(path_) / name).string();
    std::filesystem::create_directories(std::filesystem::path(full).parent_path());
    std::ofstream out(full, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::kIOError, "cannot write " + full);
    out << content;
    require(static_cast<bool>(out), ErrorKind::kIOError, "write failed: " + full);
    manifest_.files.push_back(
        {name, detail::crc32_of(reinterpret_cast<const unsigned char*>(content.data()), content.size()),
         content.size()});
  }

  void write_manifest() const {
    std::ofstream out(std::filesystem::path(path_) / "manifest.json");
    out << to_json(manifest_).dump(2) << '\n';
  }

 private:
  std::string path_;
  RunManifest& manifest_;
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.15g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Runs `body(out, manifest)`; the manifest is written whether or not the
/// body succeeds, marked incomplete on failure, and the error is rethrown.
template <typename Body>
RunManifest run_pipeline(const std::string& command, const RunConfig& c, Body&& body) {
  validate_run_config(c);
  RunManifest m;
  m.command = command;
  m.config = resolved_json(c);
  OutputDir out(c.output_dir, m);
  Stopwatch total;
  try {
    body(out, m);
    m.complete = true;
  } catch (const std::exception& e) {
    m.error = e.what();
    m.timings_s.emplace_back("total", total.seconds());
    out.write_manifest();
    throw;
  }
  m.timings_s.emplace_back("total", total.seconds());
  out.write_manifest();
  return m;
}

// ---------------------------------------------------------------------------
// model resolution

inline TrapConfig trap_from(const CrystalSection& c) {
  return {khz_to_angular(c.trap_khz[0]), khz_to_angular(c.trap_khz[1]), khz_to_angular(c.trap_khz[2]), c.n_ions};
}

/// Mode table from the configured file, or solved from the trap.
inline ModeFile crystal_modes(const CrystalSection& c) {
  if (!c.mode_file.empty()) return load_mode_file(c.mode_file);
  const TrapConfig trap = trap_from(c);
  const CrystalSolution sol = solve_equilibrium(trap, c.seed);
  return make_mode_file(trap, sol, transverse_modes(trap, sol));
}

inline std::vector<SiteCoupling> laser_couplings(const LaserProfile& laser,
                                                 const std::vector<std::array<double, 2>>& positions_um,
                                                 const std::vector<double>& mode_vector) {
  std::vector<SiteCoupling> sites;
  for (std::size_t i = 0; i < positions_um.size(); ++i) {
    const double dx = positions_um[i][0] - laser.center_um[0];
    const double dz = positions_um[i][1] - laser.center_um[1];
    double e = 0.0;
    if (laser.waist_um[0] > 0.0) e += dx * dx / (laser.waist_um[0] * laser.waist_um[0]);
    if (laser.waist_um[1] > 0.0) e += dz * dz / (laser.waist_um[1] * laser.waist_um[1]);
    const double phase = laser.phase_gradient_rad_per_um[0] * dx + laser.phase_gradient_rad_per_um[1] * dz +
                         laser.phase_curvature_rad_per_um2 * (dx * dx + dz * dz);
    sites.push_back({khz_to_angular(laser.peak_khz) * std::exp(-e), mode_vector[i], wrap_phase(phase)});
  }
  return sites;
}

struct ResolvedModel {
  ModelParams params;  ///< SI units, sign as configured, n_max unset
  std::vector<std::array<double, 2>> positions_um;  ///< empty for explicit site tables
  double mode_frequency = 0.0;  ///< rad/s, crystal source only
};

inline ResolvedModel resolve_model(const RunConfig& c, std::optional<ModeSelector> mode_override = std::nullopt,
                                   std::vector<std::string>* warnings = nullptr) {
  ResolvedModel r;
  ModelParams& p = r.params;
  p.eta = c.model.eta;
  p.delta = khz_to_angular(c.model.delta_khz);
  p.b_field = khz_to_angular(c.model.b_khz);
  if (!c.model.sites.empty() && !mode_override) {
    for (const auto& s : c.model.sites) p.sites.push_back({khz_to_angular(s.omega_khz), s.b, wrap_phase(s.phi_rad)});
  } else {
    const ModeFile mf = crystal_modes(c.crystal);
    require(static_cast<int>(mf.positions_um.size()) == mf.trap.n_ions, ErrorKind::kConfigError,
            "mode file has no ion positions");
    const SelectedMode sel = select_mode(mf.modes, mode_override.value_or(c.model.mode));
    p.sites = laser_couplings(c.model.laser, mf.positions_um, sel.vector);
    r.positions_um = mf.positions_um;
    r.mode_frequency = sel.frequency;
  }
  const int n = p.num_sites();
  require(n <= kLargeSystemSites || c.model.allow_large, ErrorKind::kResourceLimit,
          std::to_string(n) + " spins exceeds the desk-scale limit of " + std::to_string(kLargeSystemSites) +
              "; set model.allow_large to run it");
  if (n > kLargeSystemSites && warnings)
    warnings->push_back(std::to_string(n) + " spins: large run, expect long runtimes and large memory use");
  return r;
}

// ---------------------------------------------------------------------------
// simulated system

struct System {
  ModelParams params;  ///< sign-normalized, n_max resolved
  BasisRelabel relabel;
  std::optional<SubensembleSpec> spec;  ///< set for the SUBENSEMBLE representation
  EchoHamiltonians hamiltonians;

  const Basis& basis() const { return hamiltonians.first.basis(); }
};

/// Smallest n with thermal occupation tail P(> n) below 1e-6.
inline int thermal_cutoff(double nbar) {
  if (nbar <= 0.0) return 0;
  const double q = nbar / (1.0 + nbar);
  return static_cast<int>(std::ceil(std::log(1e-6) / std::log(q)));
}

inline int resolve_n_max(const RunConfig& c, const ModelParams& normalized, const std::optional<SubensembleSpec>& spec) {
  if (c.model.n_max) return *c.model.n_max;
  // the echo's second half can carry the displacement beyond the short-time bound
  const double t = c.evolution.echo ? std::numeric_limits<double>::infinity() : ms_to_s(c.evolution.t_max_ms);
  const double tol = c.model.truncation_tolerance;
  int n = spec ? adapt_truncation(*spec, normalized.delta, tol, t) : adapt_truncation(normalized, tol, t);
  return n + thermal_cutoff(c.evolution.boson_nbar) + c.evolution.boson_fock;
}

inline System prepare_system(const RunConfig& c, const ModelParams& raw, std::optional<BasisKind> kind = std::nullopt,
                             std::optional<int> n_max = std::nullopt, std::vector<std::string>* warnings = nullptr) {
  const SignNormalization norm = normalize_sign(raw);
  if (norm.zero_detuning && warnings) warnings->push_back("delta = 0: the boson is resonant, no sign normalization");
  ModelParams params = norm.params;
  std::optional<SubensembleSpec> spec;
  if (kind.value_or(c.representation.kind) == BasisKind::kSubensemble) {
    require(c.representation.groups <= params.num_sites(), ErrorKind::kConfigError,
            "representation.groups exceeds the number of spins");
    spec = group_into_subensembles(params.sites, params.eta, c.representation.groups);
  }
  params.n_max = n_max.value_or(resolve_n_max(c, params, spec));
  const BuildOptions opts{c.dimension_cap};
  EchoHamiltonians h = spec ? echo_hamiltonians(*spec, params.delta, params.b_field, params.n_max, opts)
                            : echo_hamiltonians(params, opts);
  return {std::move(params), norm.relabel, std::move(spec), std::move(h)};
}

inline EvolutionConfig evolution_config(const RunConfig& c) {
  EvolutionConfig e;
  e.krylov_dim = c.evolution.krylov_dim;
  e.step_tolerance = c.evolution.step_tolerance;
  e.output_grid = uniform_grid(ms_to_s(c.evolution.t_max_ms), ms_to_s(c.evolution.dt_ms));
  return e;
}

inline EchoSchedule echo_schedule(const RunConfig& c) {
  return {c.evolution.echo, c.evolution.pivot, c.evolution.restore_frame};
}

inline std::vector<BosonInit> boson_trajectories(const RunConfig& c) {
  if (c.evolution.boson_nbar <= 0.0) return {BosonInit{0.0, 0, c.evolution.boson_fock}};
  std::vector<BosonInit> out;
  const std::uint64_t base = derive_seed(c.seed, stream::kBoson);
  for (int r = 0; r < c.evolution.trajectories; ++r) out.push_back({c.evolution.boson_nbar, derive_seed(base, r), 0});
  return out;
}

inline StateVector initial_for(const RunConfig& c, const System& sys, const BosonInit& boson) {
  return initial_state(sys.basis(), relabel(c.evolution.initial, sys.relabel), boson);
}

/// Calls fn(k, state at grid[k]) for every output time. With the echo on,
/// each time point needs its own second half: the first halves are chained
/// in time order and the second halves run in parallel, so fn may be called
/// concurrently for different k.
template <typename Fn>
void for_each_output_state(const System& sys, const StateVector& psi0, const std::vector<double>& grid,
                           const EvolutionConfig& ec, const EchoSchedule& echo, unsigned threads, Fn&& fn) {
  if (!echo.enabled) {
    StateVector cur = psi0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      cur = evolve(cur, sys.hamiltonians.first, psi0.time + grid[k], ec);
      fn(k, cur);
    }
    return;
  }
  std::vector<StateVector> mids;
  mids.reserve(grid.size());
  StateVector cur = psi0;
  for (double t : grid) {
    cur = evolve(cur, sys.hamiltonians.first, psi0.time + 0.5 * t, ec);
    mids.push_back(cur);
  }
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    StateVector mid = std::move(mids[k]);
    apply_global_rotation(mid, pi_pulse(echo.pivot_axis));
    StateVector out = evolve(mid, sys.hamiltonians.second, psi0.time + grid[k], ec);
    if (echo.restore_frame) apply_global_rotation(out, pi_pulse(echo.pivot_axis));
    fn(k, out);
  });
}

inline std::vector<double> grid_ms(const std::vector<double>& grid_s) {
  std::vector<double> out;
  for (double t : grid_s) out.push_back(s_to_ms(t));
  return out;
}

// ---------------------------------------------------------------------------
// modes

struct ModesResult {
  RunManifest manifest;
  ModeFile modes;
};

inline ModesResult cmd_modes(const RunConfig& c) {
  ModesResult res;
  res.manifest = run_pipeline("modes", c, [&](OutputDir& out, RunManifest& m) {
    const TrapConfig trap = trap_from(c.crystal);
    Stopwatch sw;
    const CrystalSolution sol = solve_equilibrium(trap, c.crystal.seed);
    const ModeTable table = transverse_modes(trap, sol);
    m.timings_s.emplace_back("crystal", sw.seconds());
    res.modes = make_mode_file(trap, sol, table);
    out.write("modes.json", to_json(res.modes).dump(2) + "\n");
    std::ostringstream pos;
    pos << "ion,x_um,z_um\n";
    for (std::size_t i = 0; i < res.modes.positions_um.size(); ++i)
      pos << i << ',' << fmt(res.modes.positions_um[i][0]) << ',' << fmt(res.modes.positions_um[i][1]) << '\n';
    out.write("positions.csv", pos.str());
    std::ostringstream freq;
    freq << "mode,frequency_khz\n";
    for (int k = 0; k < table.size(); ++k) freq << k << ',' << fmt(angular_to_khz(table.frequencies[k])) << '\n';
    out.write("frequencies.csv", freq.str());
  });
  return res;
}

// ---------------------------------------------------------------------------
// evolve

struct EvolveResult {
  RunManifest manifest;
  std::vector<double> times;  ///< s
  std::array<std::vector<double>, 3> mean;        ///< <sigma_x,y,z> averaged over sites
  std::array<std::vector<double>, 3> cumulative;  ///< running time averages of `mean`
  int n_max = 0;
  int dimension = 0;
  std::optional<std::array<double, 3>> dual_max_deviation;
};

/// Site-averaged Pauli series, averaged over boson trajectories; sigma_y is
/// reported in the configured (not sign-normalized) frame.
inline std::array<std::vector<double>, 3> mean_pauli_series(const RunConfig& c, const System& sys,
                                                            const std::vector<double>& grid) {
  std::array<std::vector<double>, 3> acc;
  for (auto& a : acc) a.assign(grid.size(), 0.0);
  const auto bosons = boson_trajectories(c);
  const EvolutionConfig ec = evolution_config(c);
  const double ysign = sys.relabel.flip_y ? -1.0 : 1.0;
  for (const auto& boson : bosons) {
    std::vector<std::array<double, 3>> v(grid.size());
    for_each_output_state(sys, initial_for(c, sys, boson), grid, ec, echo_schedule(c), resolved_threads(c),
                          [&](std::size_t k, const StateVector& st) {
                            v[k] = {expect_pauli(st, Axis::kX), ysign * expect_pauli(st, Axis::kY),
                                    expect_pauli(st, Axis::kZ)};
                          });
    for (std::size_t k = 0; k < grid.size(); ++k)
      for (int a = 0; a < 3; ++a) acc[a][k] += v[k][a] / double(bosons.size());
  }
  return acc;
}

inline EvolveResult cmd_evolve(const RunConfig& c) {
  EvolveResult res;
  res.manifest = run_pipeline("evolve", c, [&](OutputDir& out, RunManifest& m) {
    const ResolvedModel model = resolve_model(c, std::nullopt, &m.warnings);
    const System sys = prepare_system(c, model.params, std::nullopt, std::nullopt, &m.warnings);
    res.n_max = sys.params.n_max;
    res.dimension = static_cast<int>(sys.basis().dimension());
    res.times = evolution_config(c).output_grid;
    Stopwatch sw;
    res.mean = mean_pauli_series(c, sys, res.times);
    m.timings_s.emplace_back("evolution", sw.seconds());
    for (int a = 0; a < 3; ++a)
      res.cumulative[a] = cumulative_time_average({res.times, res.mean[a], ""}).values;

    std::ostringstream s;
    s << "t_ms,sx,sy,sz,cum_sx,cum_sy,cum_sz\n";
    for (std::size_t k = 0; k < res.times.size(); ++k) {
      s << fmt(s_to_ms(res.times[k]));
      for (int a = 0; a < 3; ++a) s << ',' << fmt(res.mean[a][k]);
      for (int a = 0; a < 3; ++a) s << ',' << fmt(res.cumulative[a][k]);
      s << '\n';
    }
    out.write("series.csv", s.str());

    if (c.evolution.dual_check) {
      if (model.params.num_sites() > 6) {
        m.warnings.push_back("dual_check skipped: needs N <= 6");
      } else {
        const BasisKind other =
            c.representation.kind == BasisKind::kFull ? BasisKind::kSubensemble : BasisKind::kFull;
        RunConfig oc = c;
        oc.representation.groups = std::min(c.representation.groups, model.params.num_sites());
        const System twin = prepare_system(oc, model.params, other, sys.params.n_max);
        const auto series = mean_pauli_series(oc, twin, res.times);
        std::array<double, 3> dev{};
        for (int a = 0; a < 3; ++a)
          for (std::size_t k = 0; k < res.times.size(); ++k)
            dev[a] = std::max(dev[a], std::abs(series[a][k] - res.mean[a][k]));
        res.dual_max_deviation = dev;
        std::ostringstream d;
        d << "observable,max_abs_deviation\n";
        d << "sx," << fmt(dev[0]) << "\nsy," << fmt(dev[1]) << "\nsz," << fmt(dev[2]) << '\n';
        out.write("dual_check.csv", d.str());
      }
    }
  });
  return res;
}

// ---------------------------------------------------------------------------
// distributions

inline BlochDirection axis_direction(Axis a) {
  switch (a) {
    case Axis::kX: return {0.5 * kPi, 0.0};
    case Axis::kY: return {0.5 * kPi, 0.5 * kPi};
    default: return {0.0, 0.0};
  }
}

struct AxisDistributions {
  Axis axis = Axis::kX;
  std::vector<SpinHistogram> exact;           ///< per output time
  std::vector<SpinHistogram> exact_average;   ///< time average over [0, t_k]
  std::vector<SpinHistogram> sampled;         ///< empty when sampling is off
  std::vector<SpinHistogram> sampled_average;
};

struct DistributionsResult {
  RunManifest manifest;
  std::vector<double> times;  ///< s
  std::vector<AxisDistributions> axes;
};

inline DistributionsResult cmd_distributions(const RunConfig& c) {
  DistributionsResult res;
  res.manifest = run_pipeline("distributions", c, [&](OutputDir& out, RunManifest& m) {
    const ResolvedModel model = resolve_model(c, std::nullopt, &m.warnings);
    const System sys = prepare_system(c, model.params, std::nullopt, std::nullopt, &m.warnings);
    const int n = sys.params.num_sites();
    res.times = evolution_config(c).output_grid;
    const std::size_t nt = res.times.size(), na = c.measurement.axes.size();
    const auto bosons = boson_trajectories(c);
    const double w = 1.0 / double(bosons.size());
    const bool sampling = c.measurement.samples_per_time > 0;
    std::vector<std::vector<SpinHistogram>> exact(na, std::vector<SpinHistogram>(nt)),
        sampled(na, std::vector<SpinHistogram>(nt));
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t k = 0; k < nt; ++k) {
        exact[a][k] = {c.measurement.axes[a], n, std::vector<double>(n + 1, 0.0)};
        sampled[a][k] = exact[a][k];
      }
    const std::uint64_t hist_base = derive_seed(c.seed, stream::kHistogram);
    Stopwatch sw;
    for (std::size_t r = 0; r < bosons.size(); ++r) {
      // samples_per_time split as evenly as possible across trajectories
      const int samples = c.measurement.samples_per_time / int(bosons.size()) +
                          (int(r) < c.measurement.samples_per_time % int(bosons.size()) ? 1 : 0);
      for_each_output_state(
          sys, initial_for(c, sys, bosons[r]), res.times, evolution_config(c), echo_schedule(c), resolved_threads(c),
          [&](std::size_t k, const StateVector& st) {
            for (std::size_t a = 0; a < na; ++a) {
              const Axis axis = c.measurement.axes[a];
              const bool mirror = sys.relabel.flip_y && axis == Axis::kY;
              const SpinHistogram h = total_spin_distribution(st, axis);
              for (int q = 0; q <= n; ++q) exact[a][k].probabilities[mirror ? n - q : q] += w * h.probabilities[q];
              if (!sampling || samples == 0) continue;
              std::vector<int> all(n);
              std::iota(all.begin(), all.end(), 0);
              const std::uint64_t seed = derive_seed(hist_base, (k * na + a) * bosons.size() + r);
              const auto shots = sample_shots(st, {axis_direction(mirror ? Axis::kY : axis)}, samples, all, seed);
              for (const auto& shot : shots) {
                const int ones = static_cast<int>(std::count(shot.outcomes.begin(), shot.outcomes.end(), 1));
                sampled[a][k].probabilities[mirror ? n - ones : ones] += 1.0 / c.measurement.samples_per_time;
              }
            }
          });
    }
    m.timings_s.emplace_back("evolution", sw.seconds());

    for (std::size_t a = 0; a < na; ++a) {
      AxisDistributions d;
      d.axis = c.measurement.axes[a];
      d.exact = exact[a];
      for (std::size_t k = 0; k < nt; ++k)
        d.exact_average.push_back(
            time_averaged_distribution({exact[a].begin(), exact[a].begin() + static_cast<long>(k) + 1}));
      if (sampling) {
        d.sampled = sampled[a];
        for (std::size_t k = 0; k < nt; ++k)
          d.sampled_average.push_back(
              time_averaged_distribution({sampled[a].begin(), sampled[a].begin() + static_cast<long>(k) + 1}));
      }
      std::ostringstream s;
      s << "t_ms,kind,m,S,probability\n";
      auto emit = [&](const char* kind, const std::vector<SpinHistogram>& hs) {
        for (std::size_t k = 0; k < hs.size(); ++k)
          for (int q = 0; q <= n; ++q)
            s << fmt(s_to_ms(res.times[k])) << ',' << kind << ',' << q << ',' << fmt(hs[k].bin_value(q)) << ','
              << fmt(hs[k].probabilities[q]) << '\n';
      };
      emit("exact", d.exact);
      emit("exact_average", d.exact_average);
      emit("sampled", d.sampled);
      emit("sampled_average", d.sampled_average);
      out.write(std::string("distribution_") + axis_name(d.axis) + ".csv", s.str());
      res.axes.push_back(std::move(d));
    }
  });
  return res;
}

// ---------------------------------------------------------------------------
// entropy

struct EntropyRow {
  std::size_t time_index = 0;
  int group = 0;
  int k = 0;
  std::string method;  ///< exact | dicke | full
  double entropy = 0.0;
};

struct ScalingRow {
  int group = 0;
  std::string method;
  double time = 0.0;  ///< s
  EntropyScalingFit fit;
};

struct EntropySeries {
  std::vector<double> times;  ///< s
  std::vector<std::vector<int>> groups;
  std::vector<EntropyRow> rows;
  std::vector<ScalingRow> fits;
  std::size_t fit_index = 0;

  /// Entropy for one (time, group, k, method), NaN when absent.
  double at(std::size_t t, int group, int k, const std::string& method) const {
    for (const auto& r : rows)
      if (r.time_index == t && r.group == group && r.k == k && r.method == method) return r.entropy;
    return std::numeric_limits<double>::quiet_NaN();
  }

  std::optional<EntropyScalingFit> fit(int group, const std::string& method) const {
    for (const auto& f : fits)
      if (f.group == group && f.method == method) return f.fit;
    return std::nullopt;
  }
};

struct EntropyResult {
  RunManifest manifest;
  EntropySeries series;
};

namespace detail {

inline json dm_json(const DensityMatrix& dm) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < dm.rho.rows(); ++r) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index col = 0; col < dm.rho.cols(); ++col) {
      rr.push_back(dm.rho(r, col).real());
      ii.push_back(dm.rho(r, col).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  const Eigen::VectorXd lam = dm.eigenvalues();
  return {{"basis", dm.basis == DmBasis::kDicke ? "dicke" : "full"},
          {"real", re},
          {"imag", im},
          {"eigenvalues", std::vector<double>(lam.data(), lam.data() + lam.size())}};
}

/// Shared body of cmd_entropy and cmd_engineered: per output time and site
/// group, exact reduced-state entropies plus MLE reconstructions from
/// sampled shots.
inline EntropySeries entropy_series(const RunConfig& c, const System& sys, const std::vector<std::vector<int>>& groups,
                                    OutputDir& out, RunManifest& m) {
  EntropySeries res;
  res.times = evolution_config(c).output_grid;
  res.groups = groups;
  const std::size_t nt = res.times.size(), ng = groups.size();
  const auto& tomo = c.tomography;
  const bool use_dicke = tomo.method != TomoMethod::kFull;
  const bool use_full = tomo.method != TomoMethod::kDicke;
  const int n = sys.params.num_sites();
  for (const auto& g : groups)
    for (int s : g) require(s >= 0 && s < n, ErrorKind::kConfigError, "site group index out of range");

  std::vector<int> ks;
  for (int k : tomo.k_values) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  const auto bosons = boson_trajectories(c);
  const std::size_t nb = bosons.size();
  const auto dirs = random_directions(c.measurement.directions, derive_seed(c.seed, stream::kDirections));
  const std::uint64_t shot_base = derive_seed(c.seed, stream::kShots);

  // exact[t][g][ki] accumulates the trajectory-averaged reduced state
  std::vector<std::vector<std::vector<Eigen::MatrixXcd>>> exact(
      nt, std::vector<std::vector<Eigen::MatrixXcd>>(ng, std::vector<Eigen::MatrixXcd>(ks.size())));
  std::vector<std::vector<std::vector<ShotRecord>>> shots(nt, std::vector<std::vector<ShotRecord>>(ng));

  Stopwatch sw;
  for (std::size_t r = 0; r < nb; ++r) {
    const int per = c.measurement.shots / int(nb) + (int(r) < c.measurement.shots % int(nb) ? 1 : 0);
    for_each_output_state(
        sys, initial_for(c, sys, bosons[r]), res.times, evolution_config(c), echo_schedule(c), resolved_threads(c),
        [&](std::size_t t, const StateVector& st) {
          for (std::size_t g = 0; g < ng; ++g) {
            const auto& sites = groups[g];
            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
              const int k = ks[ki];
              if (k > static_cast<int>(sites.size())) continue;
              const std::vector<int> sub(sites.begin(), sites.begin() + k);
              const DensityMatrix dm = reduced_dm_full(st, sub, std::max(4, k));
              if (exact[t][g][ki].size() == 0) exact[t][g][ki] = Eigen::MatrixXcd::Zero(dm.dim(), dm.dim());
              exact[t][g][ki] += dm.rho / double(nb);
            }
            if (per == 0) continue;
            auto rec = sample_shots(st, dirs, per, sites, derive_seed(shot_base, (t * ng + g) * nb + r));
            auto& dst = shots[t][g];
            dst.insert(dst.end(), std::make_move_iterator(rec.begin()), std::make_move_iterator(rec.end()));
          }
        });
  }
  m.timings_s.emplace_back("evolution", sw.seconds());

  // fit time: nearest grid point
  const double t_fit = ms_to_s(tomo.fit_time_ms);
  res.fit_index = 0;
  for (std::size_t t = 1; t < nt; ++t)
    if (std::abs(res.times[t] - t_fit) < std::abs(res.times[res.fit_index] - t_fit)) res.fit_index = t;
  if (std::abs(res.times[res.fit_index] - t_fit) > 0.5 * ms_to_s(c.evolution.dt_ms) + 1e-12)
    m.warnings.push_back("fit_time_ms lies outside the output grid; fitting at t = " +
                         fmt(s_to_ms(res.times[res.fit_index])) + " ms");

  // reconstructions: one work item per (time, group)
  struct Item {
    std::vector<EntropyRow> rows;
    json report = json::array();
  };
  std::vector<Item> items(nt * ng);
  TomoOptions topts;
  topts.max_iterations = tomo.max_iterations;
  topts.tolerance = tomo.tolerance;
  std::vector<std::string> tomo_warnings(nt * ng);
  Stopwatch sw_tomo;
  parallel_for(nt * ng, resolved_threads(c), [&](std::size_t idx) {
    const std::size_t t = idx / ng, g = idx % ng;
    Item& item = items[idx];
    const bool report = t == res.fit_index;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const int k = ks[ki];
      if (k > static_cast<int>(groups[g].size())) continue;
      const DensityMatrix dm{DmBasis::kFull, normalized_hermitian(exact[t][g][ki])};
      item.rows.push_back({t, int(g), k, "exact", von_neumann_entropy(dm)});
      auto reconstruct = [&](const char* method, const TomoResult& tr) {
        item.rows.push_back({t, int(g), k, method, von_neumann_entropy(tr.rho)});
        if (tr.underdetermined && tomo_warnings[idx].empty())
          tomo_warnings[idx] = "underdetermined tomography data at t = " + fmt(s_to_ms(res.times[t])) + " ms";
        if (!report) return;
        json e = {{"group", g},
                  {"k", k},
                  {"method", method},
                  {"entropy", von_neumann_entropy(tr.rho)},
                  {"log_likelihood", tr.log_likelihood},
                  {"iterations", tr.iterations},
                  {"converged", tr.converged},
                  {"underdetermined", tr.underdetermined},
                  {"likelihood_history", tr.likelihood_history}};
        e["rho"] = dm_json(tr.rho);
        item.report.push_back(e);
      };
      if (shots[t][g].empty()) continue;
      if (use_dicke) reconstruct("dicke", mle_dicke(shots[t][g], k, topts));
      if (use_full && k <= tomo.full_k_max) reconstruct("full", mle_full(shots[t][g], k, topts, tomo.full_k_max));
    }
  });
  m.timings_s.emplace_back("tomography", sw_tomo.seconds());
  for (const auto& w : tomo_warnings)
    if (!w.empty() && std::find(m.warnings.begin(), m.warnings.end(), w) == m.warnings.end()) m.warnings.push_back(w);

  json reports = json::array();
  for (auto& item : items) {
    res.rows.insert(res.rows.end(), item.rows.begin(), item.rows.end());
    for (auto& e : item.report) reports.push_back(e);
  }

  for (std::size_t g = 0; g < ng; ++g)
    for (const char* method : {"exact", "dicke", "full"}) {
      std::vector<std::pair<int, double>> pts;
      for (const auto& r : res.rows)
        if (r.time_index == res.fit_index && r.group == int(g) && r.method == method) pts.emplace_back(r.k, r.entropy);
      if (pts.size() < 2) continue;
      res.fits.push_back({int(g), method, res.times[res.fit_index], fit_entropy_scaling(pts)});
    }

  std::ostringstream s;
  s << "t_ms,group,k,method,entropy\n";
  for (const auto& r : res.rows)
    s << fmt(s_to_ms(res.times[r.time_index])) << ',' << r.group << ',' << r.k << ',' << r.method << ','
      << fmt(r.entropy) << '\n';
  out.write("entropy.csv", s.str());

  std::ostringstream f;
  f << "group,method,t_ms,alpha,residual\n";
  for (const auto& r : res.fits)
    f << r.group << ',' << r.method << ',' << fmt(s_to_ms(r.time)) << ',' << fmt(r.fit.alpha) << ','
      << fmt(r.fit.residual) << '\n';
  out.write("scaling_fit.csv", f.str());

  std::ostringstream gr;
  gr << "group,sites\n";
  for (std::size_t g = 0; g < ng; ++g) gr << g << ',' << detail::join_sites(groups[g]) << '\n';
  out.write("site_groups.csv", gr.str());

  json rep;
  rep["t_ms"] = s_to_ms(res.times[res.fit_index]);
  rep["reconstructions"] = reports;
  out.write("reconstructions.json", rep.dump(2) + "\n");

  for (std::size_t g = 0; g < ng; ++g) {
    const auto& rec = shots[res.fit_index][g];
    if (rec.empty()) continue;
    std::ostringstream sh;
    write_shot_records(sh, {c.seed, c.measurement.directions, c.measurement.shots, groups[g]}, rec);
    out.write("shots_group" + std::to_string(g) + ".csv", sh.str());
  }
  return res;
}

}  // namespace detail

/// Configured site groups, or the four sites nearest the crystal center.
inline std::vector<std::vector<int>> entropy_site_groups(const RunConfig& c, const ResolvedModel& model) {
  if (!c.measurement.site_groups.empty()) return c.measurement.site_groups;
  const int n = model.params.num_sites();
  const int size = std::min(4, n);
  if (model.positions_um.empty()) {
    std::vector<int> g(size);
    std::iota(g.begin(), g.end(), 0);
    return {g};
  }
  int center = 0;
  for (int i = 1; i < n; ++i)
    if (std::hypot(model.positions_um[i][0], model.positions_um[i][1]) <
        std::hypot(model.positions_um[center][0], model.positions_um[center][1]))
      center = i;
  return {nearest_sites(model.positions_um, center, size)};
}

inline EntropyResult cmd_entropy(const RunConfig& c) {
  EntropyResult res;
  res.manifest = run_pipeline("entropy", c, [&](OutputDir& out, RunManifest& m) {
    const ResolvedModel model = resolve_model(c, std::nullopt, &m.warnings);
    const System sys = prepare_system(c, model.params, std::nullopt, std::nullopt, &m.warnings);
    res.series = detail::entropy_series(c, sys, entropy_site_groups(c, model), out, m);
  });
  return res;
}

// ---------------------------------------------------------------------------
// engineered coupling pattern

struct IonPair {
  int a = 0, b = 0;
  double coupling = 0.0;  ///< |eta b_a Omega_a| + |eta b_b Omega_b|, rad/s
  bool antinode = false;
};

/// Nearest-neighbour pairs ranked by summed coupling magnitude: the strongest
/// `per_class` disjoint pairs (antinodes) and the weakest (near nodes).
inline std::vector<IonPair> select_ion_pairs(const ModelParams& params,
                                             const std::vector<std::array<double, 2>>& positions, int per_class) {
  const int n = params.num_sites();
  require(n >= 4 * per_class, ErrorKind::kConfigError, "too few ions for the requested pairs");
  std::vector<IonPair> cand;
  for (int i = 0; i < n; ++i) {
    const int j = nearest_sites(positions, i, 2)[1];
    const int a = std::min(i, j), b = std::max(i, j);
    if (std::any_of(cand.begin(), cand.end(), [&](const IonPair& p) { return p.a == a && p.b == b; })) continue;
    cand.push_back({a, b, std::abs(params.coupling(a)) + std::abs(params.coupling(b)), false});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const IonPair& x, const IonPair& y) { return x.coupling > y.coupling; });
  std::vector<char> used(n, 0);
  std::vector<IonPair> out;
  auto take = [&](auto first, auto last, bool antinode) {
    int got = 0;
    for (auto it = first; it != last && got < per_class; ++it) {
      if (used[it->a] || used[it->b]) continue;
      used[it->a] = used[it->b] = 1;
      IonPair p = *it;
      p.antinode = antinode;
      out.push_back(p);
      ++got;
    }
    require(got == per_class, ErrorKind::kConfigError, "could not find enough disjoint ion pairs");
  };
  take(cand.begin(), cand.end(), true);
  take(cand.rbegin(), cand.rend(), false);
  return out;
}

struct EngineeredResult {
  RunManifest manifest;
  std::vector<IonPair> pairs;
  EntropySeries series;  ///< group g is pairs[g]
};

inline EngineeredResult cmd_engineered(const RunConfig& c) {
  EngineeredResult res;
  res.manifest = run_pipeline("engineered", c, [&](OutputDir& out, RunManifest& m) {
    require(c.model.sites.empty(), ErrorKind::kConfigError, "engineered needs the crystal model source, not a site table");
    const ResolvedModel model = resolve_model(c, ModeSelector::at(c.engineered.mode_index), &m.warnings);
    const System sys = prepare_system(c, model.params, std::nullopt, std::nullopt, &m.warnings);
    res.pairs = select_ion_pairs(model.params, model.positions_um, c.engineered.pairs_per_class);
    std::ostringstream p;
    p << "pair,site_a,site_b,coupling_khz,class\n";
    std::vector<std::vector<int>> groups;
    for (std::size_t i = 0; i < res.pairs.size(); ++i) {
      const auto& pr = res.pairs[i];
      p << i << ',' << pr.a << ',' << pr.b << ',' << fmt(angular_to_khz(pr.coupling)) << ','
        << (pr.antinode ? "antinode" : "node") << '\n';
      groups.push_back({pr.a, pr.b});
    }
    out.write("pairs.csv", p.str());
    // the symmetric-subspace assumption fails across a mode pattern
    RunConfig pc = c;
    pc.tomography.method = TomoMethod::kFull;
    pc.tomography.k_values = {1, 2};
    pc.tomography.full_k_max = std::max(2, c.tomography.full_k_max);
    res.series = detail::entropy_series(pc, sys, groups, out, m);
  });
  return res;
}

}  // namespace dicke
