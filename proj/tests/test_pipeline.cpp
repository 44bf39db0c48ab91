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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace dicke {
namespace {

namespace fs = std::filesystem;

std::string out_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "dicke_test_pipeline" / name;
  fs::remove_all(p);
  return p.string();
}

json four_sites(double scale = 1.0) {
  json s = json::array();
  const double omega[] = {0.20, 0.22, 0.30, 0.31}, phi[] = {0.0, 0.05, 0.6, 0.62};
  for (int i = 0; i < 4; ++i) s.push_back({{"omega_khz", scale * omega[i]}, {"b", 0.5}, {"phi_rad", phi[i]}});
  return s;
}

RunConfig config(json j, const std::string& name) {
  j["output_dir"] = out_dir(name);
  RunConfig c = parse_run_config(j);
  validate_run_config(c);
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(Pipeline, FreePrecessionIndependentOfDetuningSign) {
  for (double delta : {0.5, -0.5}) {
    for (bool echo : {false, true}) {
      json j = {{"model", {{"delta_khz", delta}, {"b_khz", 0.3}, {"n_max", 2}, {"sites", four_sites(0.0)}}},
                {"representation", {{"kind", "full"}}},
                {"evolution", {{"t_max_ms", 1.0}, {"dt_ms", 0.125}, {"initial", "+y"}, {"echo", echo}}}};
      const auto r = cmd_evolve(config(j, "free"));
      const double b = khz_to_angular(0.3);
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        const double t = r.times[k];
        EXPECT_NEAR(r.mean[0][k], 0.0, 1e-9);
        EXPECT_NEAR(r.mean[1][k], std::cos(2 * b * t), 1e-8) << "delta " << delta << " echo " << echo;
        EXPECT_NEAR(r.mean[2][k], std::sin(2 * b * t), 1e-8) << "delta " << delta << " echo " << echo;
      }
    }
  }
}

TEST(Pipeline, DetuningSignNormalizationPreservesDynamics) {
  // both signs are simulated in the normalized frame; compare against a direct
  // FULL-basis run of the raw negative-detuning model
  json j = {{"model", {{"delta_khz", -0.5}, {"b_khz", 0.09}, {"n_max", 14}, {"sites", four_sites()}}},
            {"representation", {{"kind", "full"}}},
            {"evolution", {{"t_max_ms", 1.0}, {"dt_ms", 0.25}, {"initial", "-y"}, {"echo", false}}}};
  const auto r = cmd_evolve(config(j, "negative"));
  ModelParams p;
  p.eta = 1.0;
  p.delta = khz_to_angular(-0.5);
  p.b_field = khz_to_angular(0.09);
  p.n_max = 14;
  const auto sites = four_sites();
  for (const auto& s : sites) p.sites.push_back({khz_to_angular(s["omega_khz"].get<double>()), 0.5, s["phi_rad"].get<double>()});
  const auto h = build_full_hamiltonian(p);
  StateVector st = initial_state(h.basis(), SpinDirection::kMinusY);
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    st = evolve(st, h, r.times[k]);
    EXPECT_NEAR(r.mean[0][k], expect_pauli(st, Axis::kX), 1e-7);
    EXPECT_NEAR(r.mean[1][k], expect_pauli(st, Axis::kY), 1e-7);
    EXPECT_NEAR(r.mean[2][k], expect_pauli(st, Axis::kZ), 1e-7);
  }
}

TEST(Pipeline, EvolveWritesSeriesAndDualCheck) {
  json j = {{"model", {{"delta_khz", 0.5}, {"b_khz", 0.09}, {"sites", four_sites()}}},
            {"evolution", {{"t_max_ms", 1.0}, {"dt_ms", 0.25}, {"initial", "-x"}, {"dual_check", true}}}};
  const auto c = config(j, "dual");
  const auto r = cmd_evolve(c);
  EXPECT_TRUE(r.manifest.complete);
  ASSERT_TRUE(r.dual_max_deviation.has_value());
  for (double d : *r.dual_max_deviation) EXPECT_GE(d, 0.0);
  EXPECT_NEAR(r.mean[0][0], -1.0, 1e-12);
  for (int a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      EXPECT_LE(std::abs(r.mean[a][k]), 1.0 + 1e-12);
      EXPECT_LE(std::abs(r.cumulative[a][k]), 1.0 + 1e-12);
    }
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "series.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "dual_check.csv"));
  const auto manifest = json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
  EXPECT_EQ(manifest["command"], "evolve");
  EXPECT_TRUE(manifest["complete"].get<bool>());
  EXPECT_EQ(manifest["config"]["seed"], c.seed);
}

TEST(Pipeline, FailureLeavesIncompleteManifest) {
  json j = {{"model", {{"delta_khz", 0.5}, {"sites", four_sites()}}}, {"dimension_cap", 16}};
  const auto c = config(j, "fail");
  try {
    cmd_evolve(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionCapExceeded);
  }
  const auto manifest = json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
  EXPECT_FALSE(manifest["complete"].get<bool>());
  EXPECT_FALSE(manifest["error"].get<std::string>().empty());
}

TEST(Pipeline, LargeSystemsNeedOptIn) {
  json j = {{"model", {{"delta_khz", 0.5}}}, {"crystal", {{"n_ions", 24}, {"trap_khz", {540, 1960, 100}}}}};
  try {
    cmd_evolve(config(j, "large"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kResourceLimit);
  }
}

TEST(Pipeline, DistributionsAtTimeZero) {
  json j = {{"model", {{"delta_khz", 0.5}, {"b_khz", 0.09}, {"sites", four_sites()}}},
            {"evolution", {{"t_max_ms", 0.5}, {"dt_ms", 0.25}, {"initial", "+x"}}},
            {"measurement", {{"samples_per_time", 4000}}}};
  const auto r = cmd_distributions(config(j, "dist0"));
  ASSERT_EQ(r.axes.size(), 3u);
  for (const auto& ax : r.axes) {
    const auto& h0 = ax.exact[0];
    if (ax.axis == Axis::kX) {
      EXPECT_NEAR(h0.probabilities[0], 1.0, 1e-10);
    } else {
      for (int m = 0; m <= 4; ++m) EXPECT_NEAR(h0.probabilities[m], binomial(4, m) / 16.0, 1e-10);
    }
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      EXPECT_NEAR(ax.exact[k].total(), 1.0, 1e-9);
      EXPECT_NEAR(ax.sampled[k].total(), 1.0, 1e-9);
      for (std::size_t m = 0; m < ax.exact[k].probabilities.size(); ++m) {
        const double p = ax.exact[k].probabilities[m];
        const double sigma = std::sqrt(std::max(p * (1 - p), 1e-6) / 4000.0);
        EXPECT_NEAR(ax.sampled[k].probabilities[m], p, 4 * sigma) << axis_name(ax.axis) << " t " << k << " m " << m;
      }
    }
  }
}

TEST(Pipeline, EntropyStartsAtZeroAndIsDeterministic) {
  json j = {{"model", {{"delta_khz", 0.5}, {"b_khz", 0.09}, {"sites", four_sites()}}},
            {"evolution", {{"t_max_ms", 1.0}, {"dt_ms", 0.5}, {"initial", "+x"}}},
            {"measurement", {{"site_groups", {{0, 1, 2}}}}},
            {"tomography", {{"k_values", {1, 2, 3}}, {"fit_time_ms", 1.0}}},
            {"seed", 5}};
  auto c1 = config(j, "entropy_a");
  auto c2 = config(j, "entropy_b");
  const auto a = cmd_entropy(c1);
  const auto b = cmd_entropy(c2);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_NEAR(a.series.at(0, 0, k, "exact"), 0.0, 1e-10);
    EXPECT_LE(a.series.at(0, 0, k, "dicke"), 0.15) << "k " << k;
  }
  EXPECT_LE(a.series.at(0, 0, 1, "full"), 0.15);
  EXPECT_TRUE(std::isnan(a.series.at(0, 0, 3, "full")));
  EXPECT_TRUE(a.series.fit(0, "exact").has_value());
  ASSERT_EQ(a.manifest.files.size(), b.manifest.files.size());
  for (std::size_t i = 0; i < a.manifest.files.size(); ++i) {
    EXPECT_EQ(a.manifest.files[i].name, b.manifest.files[i].name);
    EXPECT_EQ(a.manifest.files[i].crc32, b.manifest.files[i].crc32) << a.manifest.files[i].name;
    EXPECT_EQ(slurp(fs::path(c1.output_dir) / a.manifest.files[i].name),
              slurp(fs::path(c2.output_dir) / b.manifest.files[i].name));
  }
  // a different seed changes the sampled shots
  j["seed"] = 6;
  const auto d = cmd_entropy(config(j, "entropy_c"));
  bool differs = false;
  for (std::size_t i = 0; i < d.manifest.files.size(); ++i)
    if (d.manifest.files[i].name.rfind("shots_", 0) == 0 && d.manifest.files[i].crc32 != a.manifest.files[i].crc32)
      differs = true;
  EXPECT_TRUE(differs);
}

TEST(Pipeline, ThreadCountDoesNotChangeOutputs) {
  json j = {{"model", {{"delta_khz", 0.5}, {"b_khz", 0.09}, {"sites", four_sites()}}},
            {"evolution", {{"t_max_ms", 1.0}, {"dt_ms", 0.25}}},
            {"measurement", {{"samples_per_time", 50}}}};
  j["threads"] = 1;
  const auto a = cmd_distributions(config(j, "threads_1"));
  j["threads"] = 3;
  const auto b = cmd_distributions(config(j, "threads_3"));
  ASSERT_EQ(a.manifest.files.size(), b.manifest.files.size());
  for (std::size_t i = 0; i < a.manifest.files.size(); ++i)
    EXPECT_EQ(a.manifest.files[i].crc32, b.manifest.files[i].crc32) << a.manifest.files[i].name;
}

TEST(Pipeline, ThermalBosonTrajectories) {
  json j = {{"model", {{"delta_khz", 0.5}, {"b_khz", 0.09}, {"sites", four_sites()}}},
            {"evolution", {{"t_max_ms", 0.5}, {"dt_ms", 0.25}, {"boson_nbar", 0.3}, {"trajectories", 4}}}};
  const auto r = cmd_evolve(config(j, "thermal"));
  EXPECT_NEAR(r.mean[0][0], 1.0, 1e-12);
  EXPECT_GT(r.n_max, thermal_cutoff(0.3));
  EXPECT_EQ(boson_trajectories(parse_run_config(j)).size(), 4u);
}

TEST(Pipeline, ModesCommandWritesTables) {
  json j = {{"model", {{"delta_khz", 0.5}}}, {"crystal", {{"n_ions", 6}, {"trap_khz", {620, 1920, 130}}}}};
  const auto c = config(j, "modes");
  const auto r = cmd_modes(c);
  EXPECT_EQ(r.modes.modes.frequencies.size(), 6u);
  const auto back = load_mode_file((fs::path(c.output_dir) / "modes.json").string());
  EXPECT_EQ(back.modes.frequencies, r.modes.modes.frequencies);
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "positions.csv"));
}

TEST(Pipeline, EngineeredAntinodePairsThermalizeFaster) {
  json j = {{"model", {{"delta_khz", -0.75}, {"b_khz", 0.09}, {"laser", {{"peak_khz", 0.3}}}}},
            {"crystal", {{"n_ions", 8}, {"trap_khz", {620, 1920, 130}}}},
            {"representation", {{"kind", "full"}}},
            {"evolution", {{"t_max_ms", 2.0}, {"dt_ms", 0.5}, {"initial", "+x"}}},
            {"engineered", {{"mode_index", 2}, {"pairs_per_class", 1}}},
            {"measurement", {{"directions", 16}}},
            {"tomography", {{"fit_time_ms", 2.0}}}};
  const auto r = cmd_engineered(config(j, "engineered"));
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_TRUE(r.pairs[0].antinode);
  EXPECT_FALSE(r.pairs[1].antinode);
  EXPECT_GT(r.pairs[0].coupling, r.pairs[1].coupling);
  const std::size_t last = r.series.times.size() - 1;
  EXPECT_GT(r.series.at(last, 0, 2, "exact"), r.series.at(last, 1, 2, "exact"));
  EXPECT_FALSE(std::isnan(r.series.at(last, 1, 2, "full")));
}

}  // namespace
}  // namespace dicke
