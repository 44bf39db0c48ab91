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

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N ...]
//
// Exit status 0 only when every selected criterion passes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "support.hpp"

namespace dicke::acceptance {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "dicke_acceptance" / name;
  fs::remove_all(p);
  return p.string();
}

RunConfig make_config(json j, const std::string& name) {
  j["output_dir"] = scratch(name);
  RunConfig c = parse_run_config(j);
  validate_run_config(c);
  return c;
}

// ---------------------------------------------------------------------------

// The per-case budget covers the propagation under test; building the dense
// reference is timed and reported separately.
Outcome oracle_equivalence() {
  double worst_dense = 1.0, worst_b0 = 1.0, slowest = 0.0, slowest_total = 0.0;
  const std::vector<double> times_ms{1.0, 2.0, 3.0, 4.0};
  for (int n = 2; n <= 6; ++n) {
    const auto start = std::chrono::steady_clock::now();
    // (a) dense propagation, B != 0
    auto p = testing::random_model(n, 1000 + n, 0, khz_to_angular(0.2));
    p.n_max = std::min(adapt_truncation(p), 2048 / (1 << n) - 1);
    const auto h = build_full_hamiltonian(p);
    const auto psi0 = initial_state(h.basis(), SpinDirection::kMinusX);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(testing::dense(h));
    const Eigen::VectorXcd c0 = es.eigenvectors().adjoint() * testing::to_eigen(psi0);
    StateVector st = psi0;
    double propagation = 0.0;
    auto timed_evolve = [&](const StateVector& in, const auto& ham, double t) {
      const auto t0 = std::chrono::steady_clock::now();
      StateVector out = evolve(in, ham, t);
      propagation += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return out;
    };
    for (double t_ms : times_ms) {
      const double t = ms_to_s(t_ms);
      st = timed_evolve(st, h, t);
      Eigen::VectorXcd ph(c0.size());
      for (Eigen::Index k = 0; k < c0.size(); ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * t) * c0(k);
      const Eigen::VectorXcd ref = es.eigenvectors() * ph;
      worst_dense = std::min(worst_dense, std::norm(ref.dot(testing::to_eigen(st))));
    }
    // (b) closed-form B = 0 oracle
    auto q = testing::random_model(n, 2000 + n, 0);
    q.n_max = adapt_truncation(q);
    const auto hq = build_full_hamiltonian(q);
    for (SpinDirection dir : {SpinDirection::kPlusX, SpinDirection::kMinusY}) {
      StateVector s = initial_state(hq.basis(), dir);
      for (double t_ms : times_ms) {
        s = timed_evolve(s, hq, ms_to_s(t_ms));
        worst_b0 = std::min(worst_b0, state_fidelity(s, testing::b0_oracle_state(q, dir, ms_to_s(t_ms))));
      }
    }
    slowest = std::max(slowest, propagation);
    slowest_total = std::max(slowest_total, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  const bool pass = worst_dense >= 1.0 - 1e-8 && worst_b0 >= 1.0 - 1e-8 && slowest <= 60.0;
  return {pass, "N=2..6, t<=4 ms: min dense fidelity 1-" + num(1.0 - worst_dense) + ", min B=0 oracle fidelity 1-" +
                    num(1.0 - worst_b0) + ", slowest case propagation " + num(slowest) + " s (with dense reference " +
                    num(slowest_total) + " s)"};
}

Outcome subensemble_correctness() {
  const auto start = std::chrono::steady_clock::now();
  // three distinct (Omega, phi) values over six sites
  ModelParams p;
  p.eta = 1.0;
  p.delta = khz_to_angular(0.5);
  p.b_field = khz_to_angular(0.09);
  const double b = 1.0 / std::sqrt(6.0);
  const std::array<std::pair<double, double>, 3> values{{{0.18, 0.0}, {0.26, 0.7}, {0.12, -1.1}}};
  for (int v : {0, 1, 0, 2, 1, 1}) p.sites.push_back({khz_to_angular(values[v].first), b, values[v].second});
  p.n_max = adapt_truncation(p);
  const auto spec = group_into_subensembles(p.sites, p.eta, 3);
  const auto hf = build_full_hamiltonian(p);
  const auto hs = build_subensemble_hamiltonian(spec, p.delta, p.b_field, p.n_max);
  StateVector a = initial_state(hf.basis(), SpinDirection::kMinusX);
  StateVector s = initial_state(hs.basis(), SpinDirection::kMinusX);
  double worst = 0.0;
  for (double t : uniform_grid(ms_to_s(4.0), ms_to_s(0.25))) {
    a = evolve(a, hf, t);
    s = evolve(s, hs, t);
    for (int i = 0; i < 6; ++i)
      for (Axis ax : {Axis::kX, Axis::kY, Axis::kZ})
        worst = std::max(worst, std::abs(expect_pauli(a, ax, i) - expect_pauli(s, ax, i)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-8 && spec.groups.size() == 3 && secs <= 120.0,
          "N=6, M=" + std::to_string(spec.groups.size()) + ": max single-site Pauli deviation " + num(worst) +
              " over 0..4 ms, " + num(secs) + " s"};
}

Outcome symmetric_conservation() {
  const int n = 6;
  const auto p = testing::uniform_model(n, khz_to_angular(0.2), khz_to_angular(0.5), khz_to_angular(0.09), 0);
  auto pu = p;
  pu.n_max = adapt_truncation(pu);
  const auto hu = build_full_hamiltonian(pu);
  StateVector su = initial_state(hu.basis(), SpinDirection::kPlusX);
  double worst_uniform = 0.0;
  for (double t : uniform_grid(ms_to_s(4.0), ms_to_s(0.25))) {
    su = evolve(su, hu, t);
    worst_uniform = std::max(worst_uniform, symmetric_leakage(su));
  }
  auto pd = pu;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (auto& s : pd.sites) s.omega *= 1.0 + jitter(rng);
  const auto hd = build_full_hamiltonian(pd);
  StateVector sd = initial_state(hd.basis(), SpinDirection::kPlusX);
  double prev = 0.0;
  bool monotone = true, positive = true;
  for (double t : uniform_grid(ms_to_s(1.0), ms_to_s(0.1))) {
    if (t == 0.0) continue;
    sd = evolve(sd, hd, t);
    const double l = symmetric_leakage(sd);
    positive = positive && l > 0.0;
    monotone = monotone && l > prev;
    prev = l;
  }
  return {worst_uniform <= 1e-10 && positive && monotone,
          "uniform max leakage " + num(worst_uniform) + "; 5% disorder leakage at 1 ms " + num(prev) +
              (monotone ? ", strictly increasing" : ", NOT monotone")};
}

Outcome echo_cancellation() {
  // B = 0, uniform coupling, delta t_total / 2 = 2 pi
  const int n = 6;
  const double delta = khz_to_angular(0.5);
  const double t_total = 2.0 * kTwoPi / delta;
  SubensembleSpec spec;
  spec.groups = {{n, khz_to_angular(0.2), 0.0, {}}};
  const int n_max = adapt_truncation(spec, delta);
  const auto hs = echo_hamiltonians(spec, delta, 0.0, n_max);
  double with_echo = 0.0, without = 1e300;
  for (SpinDirection dir : {SpinDirection::kPlusX, SpinDirection::kMinusY}) {
    const auto psi0 = initial_state(hs.first.basis(), dir);
    with_echo = std::max(with_echo, testing::spin_boson_entropy(evolve_with_echo(psi0, hs, t_total, {}, {true, Axis::kX, true})));
    without = std::min(without, testing::spin_boson_entropy(evolve_with_echo(psi0, hs, t_total, {}, {false, Axis::kX, false})));
  }
  return {with_echo <= 1e-6 && without >= 0.1,
          "t_total=" + num(s_to_ms(t_total)) + " ms: entropy with echo " + num(with_echo) + ", without echo " +
              num(without) + " (needs >= 0.1)"};
}

json two_cluster_config(int groups) {
  json sites = json::array();
  for (int i = 0; i < 60; ++i) {
    const bool a = i < 30;
    sites.push_back({{"omega_khz", a ? 0.16 : 0.24}, {"b", 1.0 / std::sqrt(60.0)}, {"phi_rad", a ? 0.0 : 0.6}});
  }
  return {{"model", {{"eta", 1.0}, {"delta_khz", 0.5}, {"b_khz", 0.09}, {"sites", sites}, {"allow_large", true}}},
          {"representation", {{"kind", "subensemble"}, {"groups", groups}}},
          {"evolution", {{"t_max_ms", 4.0}, {"dt_ms", 0.25}, {"initial", "-x"}}},
          {"seed", 1}};
}

Outcome cumulative_gap() {
  const auto start = std::chrono::steady_clock::now();
  const auto m2 = cmd_evolve(make_config(two_cluster_config(2), "two_cluster_m2"));
  const auto m1 = cmd_evolve(make_config(two_cluster_config(1), "two_cluster_m1"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double gap = 0.0, jump = 0.0;
  bool bounded = true;
  for (int a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < m2.times.size(); ++k) {
      gap = std::max(gap, std::abs(m2.cumulative[a][k] - m1.cumulative[a][k]));
      for (const auto* r : {&m1, &m2}) {
        bounded = bounded && std::abs(r->cumulative[a][k]) <= 1.0 + 1e-9;
        if (k >= 2) jump = std::max(jump, std::abs(r->cumulative[a][k] - r->cumulative[a][k - 1]));
      }
    }
  const bool smooth = jump <= 0.25;
  return {gap >= 0.02 && bounded && smooth && secs <= 1800.0,
          "N=60 M=2 (n_max " + std::to_string(m2.n_max) + ", dim " + std::to_string(m2.dimension) +
              ") vs M=1: max cumulative gap " + num(gap) + ", largest step " + num(jump) + ", " +
              (bounded ? "bounded" : "UNBOUNDED") + ", " + num(secs) + " s"};
}

Outcome distribution_flattening() {
  json j = {{"model", {{"eta", 1.0}, {"delta_khz", 0.5}, {"b_khz", 0.09}, {"laser", {{"peak_khz", 0.3}}}}},
            {"crystal", {{"n_ions", 10}, {"trap_khz", {620, 1920, 130}}}},
            {"representation", {{"kind", "subensemble"}, {"groups", 1}}},
            {"evolution", {{"t_max_ms", 4.0}, {"dt_ms", 0.25}, {"initial", "+x"}}},
            {"measurement", {{"axes", {"x"}}, {"samples_per_time", 200}}},
            {"seed", 1}};
  const auto r = cmd_distributions(make_config(j, "flattening"));
  std::size_t i1 = 0, i4 = 0;
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    if (std::abs(s_to_ms(r.times[k]) - 1.0) < 1e-9) i1 = k;
    if (std::abs(s_to_ms(r.times[k]) - 4.0) < 1e-9) i4 = k;
  }
  const double p1 = r.axes[0].exact_average[i1].max_probability();
  const double p4 = r.axes[0].exact_average[i4].max_probability();
  const double drop = 1.0 - p4 / p1;
  return {drop >= 0.2, "N=10 time-averaged S_x peak " + num(p1) + " at 1 ms, " + num(p4) + " at 4 ms (relative drop " +
                           num(drop) + ")"};
}

StateVector two_spin_state(const Eigen::VectorXcd& dicke_amplitudes, int fock_partners) {
  // symmetric pair in the Dicke basis, optionally entangled with Fock states
  const Basis b = Basis::subensemble({{0, 1}}, fock_partners);
  StateVector st{b, std::vector<complex_t>(b.dimension(), 0.0), 0.0};
  for (int m = 0; m <= 2; ++m) st.amplitudes[m * b.fock_dim() + (fock_partners ? m : 0)] = dicke_amplitudes(m);
  return st;
}

// Fidelity and trace distance are per-realization random variables at this
// budget; each state is scored on the mean over 10 seeded samplings and the
// worst single realization is reported alongside.
Outcome tomography_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  const double h = std::sqrt(0.5);
  std::vector<Eigen::VectorXcd> states;
  auto add = [&](complex_t a, complex_t b, complex_t c) {
    Eigen::VectorXcd v(3);
    v << a, b, c;
    states.push_back(v.normalized());
  };
  add(0.5, h, 0.5);                     // |+x+x>
  add(0.5, -h, 0.5);                    // |-x-x>
  add(0.5, complex_t(0.0, h), -0.5);    // |+y+y>
  add(1.0, 0.0, 0.0);                   // |+z+z>
  add(0.0, 0.0, 1.0);                   // |-z-z>
  add(0.0, 1.0, 0.0);                   // triplet m = 0
  add(h, 0.0, h);                       // (|00> + |11>) / sqrt 2
  add(h, 0.0, complex_t(0.0, h));       // (|00> + i|11>) / sqrt 2
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  double worst_mean_fid = 1.0, worst_fid = 1.0, worst_mean_td = 0.0, worst_td = 0.0;
  const int seeds = 10;
  for (std::size_t i = 0; i < states.size(); ++i) {
    double fid = 0.0, td = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t base = 1000 * i + s;
      const auto dirs = random_directions(25, derive_seed(base, 1));
      const auto pure = sample_shots(two_spin_state(states[i], 0), dirs, 50, {0, 1}, derive_seed(base, 2));
      const double f = fidelity_with_pure(mle_dicke(pure, 2).rho, states[i]);
      // mixed symmetric data: random Dicke populations, rotated
      Eigen::VectorXcd w(3);
      for (int m = 0; m < 3; ++m) w(m) = std::abs(complex_t(nd(rng), nd(rng)));
      StateVector mixed = two_spin_state(w.normalized(), 2);
      apply_global_rotation(mixed, rotation_to_z(0.3 * s + 0.1 * i, 0.5 * i));
      const auto recs = sample_shots(mixed, dirs, 50, {0, 1}, derive_seed(base, 3));
      const double d = trace_distance(project_symmetric(mle_full(recs, 2).rho).rho, mle_dicke(recs, 2).rho.rho);
      fid += f / seeds;
      td += d / seeds;
      worst_fid = std::min(worst_fid, f);
      worst_td = std::max(worst_td, d);
    }
    worst_mean_fid = std::min(worst_mean_fid, fid);
    worst_mean_td = std::max(worst_mean_td, td);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst_mean_fid >= 0.98 && worst_mean_td <= 0.05 && secs <= 60.0,
          "K=25 x 50 shots, 8 states x 10 seeds: min mean pure fidelity " + num(worst_mean_fid) + " (worst shot set " +
              num(worst_fid) + "), max mean dicke/full trace distance " + num(worst_mean_td) + " (worst " +
              num(worst_td) + "), " + num(secs) + " s"};
}

Outcome entropy_scaling_recovery() {
  std::string detail;
  bool pass = true;
  for (double alpha0 : {0.93, 0.86, 0.17, 0.57}) {
    int hits = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::mt19937_64 rng(derive_seed(static_cast<std::uint64_t>(alpha0 * 100), trial));
      std::normal_distribution<double> noise(0.0, 0.02);
      std::vector<std::pair<int, double>> pts;
      for (int k = 1; k <= 4; ++k) pts.emplace_back(k, alpha0 * std::log(k + 1.0) + noise(rng));
      if (std::abs(fit_entropy_scaling(pts).alpha - alpha0) <= 0.03) ++hits;
    }
    pass = pass && hits >= 950;
    detail += (detail.empty() ? "" : ", ") + std::string("alpha ") + num(alpha0) + ": " + std::to_string(hits) + "/1000";
  }
  return {pass, detail + " within 0.03"};
}

json entropy_config(double b_khz) {
  return {{"model",
           {{"eta", 1.0},
            {"delta_khz", 0.5},
            {"b_khz", b_khz},
            {"laser", {{"peak_khz", 0.2}, {"waist_um", {0, 40}}, {"phase_gradient_rad_per_um", {0.05, 0.02}}}}}},
          {"crystal", {{"n_ions", 16}, {"trap_khz", {540, 1960, 100}}}},
          {"representation", {{"kind", "subensemble"}, {"groups", 4}}},
          {"evolution", {{"t_max_ms", 4.5}, {"dt_ms", 1.5}, {"initial", "+x"}}},
          {"tomography", {{"method", "dicke"}, {"k_values", {1, 2, 3, 4}}, {"fit_time_ms", 4.5}}},
          {"seed", 1}};
}

Outcome thermalization_contrast() {
  const auto weak = cmd_entropy(make_config(entropy_config(0.09), "entropy_weak"));
  const auto strong = cmd_entropy(make_config(entropy_config(0.85), "entropy_strong"));
  const auto aw = weak.series.fit(0, "dicke"), as = strong.series.fit(0, "dicke");
  const auto ew = weak.series.fit(0, "exact"), es = strong.series.fit(0, "exact");
  if (!aw || !as || !ew || !es) return {false, "missing scaling fit"};
  return {aw->alpha > as->alpha, "N=16 M=4 at 4.5 ms: tomography alpha weak " + num(aw->alpha) + " vs strong " +
                                     num(as->alpha) + " (exact " + num(ew->alpha) + " vs " + num(es->alpha) + ")"};
}

Outcome crystal_correctness() {
  auto trap_of = [](int n) {
    return TrapConfig{khz_to_angular(540), khz_to_angular(1960), khz_to_angular(100), n};
  };
  double com_err = 0.0, vec_err = 0.0, ortho_err = 0.0, trace_err = 0.0;
  for (int n : {1, 5, 20}) {
    const auto trap = trap_of(n);
    const auto sol = solve_equilibrium(trap, 0);
    const auto table = transverse_modes(trap, sol);
    com_err = std::max(com_err, std::abs(table.frequencies[0] - trap.omega_y) / trap.omega_y);
    for (double b : table.vectors[0]) vec_err = std::max(vec_err, std::abs(b - 1.0 / std::sqrt(double(n))));
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double d = 0.0;
        for (int i = 0; i < n; ++i) d += table.vectors[k][i] * table.vectors[l][i];
        ortho_err = std::max(ortho_err, std::abs(d - (k == l ? 1.0 : 0.0)));
      }
    double sum_w2 = 0.0;
    for (double w : table.frequencies) sum_w2 += w * w;
    const double trace = transverse_hessian(trap, sol).trace() * trap.omega_z * trap.omega_z;
    trace_err = std::max(trace_err, std::abs(sum_w2 - trace) / trace);
  }
  const auto trap2 = trap_of(2);
  const auto table2 = transverse_modes(trap2, solve_equilibrium(trap2, 0));
  const double tilt = std::sqrt(trap2.omega_y * trap2.omega_y - trap2.omega_z * trap2.omega_z);
  const double tilt_err = std::abs(table2.frequencies[1] - tilt) / tilt;
  return {com_err <= 1e-10 && vec_err <= 1e-10 && tilt_err <= 1e-9 && ortho_err <= 1e-8 && trace_err <= 1e-8,
          "COM freq rel err " + num(com_err) + ", COM vector err " + num(vec_err) + ", tilt rel err " + num(tilt_err) +
              ", orthonormality " + num(ortho_err) + ", trace rule " + num(trace_err)};
}

Outcome determinism() {
  json j = {{"model",
             {{"delta_khz", -0.5},
              {"b_khz", 0.09},
              {"laser", {{"peak_khz", 0.25}, {"waist_um", {0, 30}}, {"phase_gradient_rad_per_um", {0.05, 0.0}}}}}},
            {"crystal", {{"n_ions", 6}, {"trap_khz", {620, 1920, 130}}}},
            {"representation", {{"kind", "subensemble"}, {"groups", 2}}},
            {"evolution", {{"t_max_ms", 1.0}, {"dt_ms", 0.25}, {"initial", "-y"}, {"boson_nbar", 0.1},
                           {"trajectories", 3}, {"dual_check", true}}},
            {"measurement", {{"samples_per_time", 100}, {"site_groups", {{0, 1, 2}}}}},
            {"tomography", {{"k_values", {1, 2}}, {"fit_time_ms", 1.0}}},
            {"seed", 11}};
  int files = 0, mismatched = 0;
  const std::vector<std::string> commands{"modes", "evolve", "distributions", "entropy"};
  for (const auto& cmd : commands) {
    std::vector<RunManifest> runs;
    std::vector<std::string> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      const auto c = make_config(j, "determinism_" + cmd + std::to_string(rep));
      dirs.push_back(c.output_dir);
      if (cmd == "modes") runs.push_back(cmd_modes(c).manifest);
      if (cmd == "evolve") runs.push_back(cmd_evolve(c).manifest);
      if (cmd == "distributions") runs.push_back(cmd_distributions(c).manifest);
      if (cmd == "entropy") runs.push_back(cmd_entropy(c).manifest);
    }
    if (runs[0].files.size() != runs[1].files.size()) return {false, cmd + ": different file sets"};
    for (std::size_t i = 0; i < runs[0].files.size(); ++i) {
      ++files;
      const auto read = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
      };
      if (read(fs::path(dirs[0]) / runs[0].files[i].name) != read(fs::path(dirs[1]) / runs[1].files[i].name))
        ++mismatched;
    }
  }
  return {mismatched == 0 && files > 0,
          std::to_string(files) + " data files over modes/evolve/distributions/entropy, " +
              std::to_string(mismatched) + " differ"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "subensemble correctness", subensemble_correctness},
      {3, "symmetric-subspace conservation", symmetric_conservation},
      {4, "echo cancellation", echo_cancellation},
      {5, "subensemble cumulative gap", cumulative_gap},
      {6, "distribution flattening", distribution_flattening},
      {7, "tomography round trip", tomography_round_trip},
      {8, "entropy scaling recovery", entropy_scaling_recovery},
      {9, "thermalization contrast", thermalization_contrast},
      {10, "crystal correctness", crystal_correctness},
      {11, "determinism", determinism},
  };
  return all;
}

}  // namespace
}  // namespace dicke::acceptance

int main(int argc, char** argv) {
  using namespace dicke::acceptance;
  CLI::App app{"dicke acceptance suite"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "criterion number(s) to run; default all")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s: %s | %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
