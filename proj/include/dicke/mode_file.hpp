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

// Mode-table file (JSON):
//
//   {
//     "format": "dicke-modes v1",
//     "trap_khz": [fx, fy, fz],
//     "n_ions": N,
//     "length_scale_um": l,
//     "frequencies_khz": [f_0, f_1, ...],          // descending, omega/2pi
//     "vectors": [[b_00, b_01, ...], ...],          // vectors[k][i], mode k, ion i
//     "positions_um": [[x_0, z_0], ...]
//   }

#include <array>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dicke/crystal.hpp"
#include "dicke/error.hpp"
#include "dicke/units.hpp"

namespace dicke {

struct ModeFile {
  TrapConfig trap;
  ModeTable modes;
  std::vector<std::array<double, 2>> positions_um;
};

inline ModeFile make_mode_file(const TrapConfig& trap, const CrystalSolution& sol, const ModeTable& modes) {
  ModeFile f{trap, modes, {}};
  const double l_um = length_scale(trap.omega_z) * 1e6;
  for (const auto& p : sol.positions) f.positions_um.push_back({p[0] * l_um, p[1] * l_um});
  return f;
}

inline nlohmann::ordered_json to_json(const ModeFile& f) {
  nlohmann::ordered_json j;
  j["format"] = "dicke-modes v1";
  j["trap_khz"] = {angular_to_khz(f.trap.omega_x), angular_to_khz(f.trap.omega_y), angular_to_khz(f.trap.omega_z)};
  j["n_ions"] = f.trap.n_ions;
  j["length_scale_um"] = length_scale(f.trap.omega_z) * 1e6;
  std::vector<double> khz;
  for (double w : f.modes.frequencies) khz.push_back(angular_to_khz(w));
  j["frequencies_khz"] = khz;
  j["vectors"] = f.modes.vectors;
  j["positions_um"] = f.positions_um;
  return j;
}

inline ModeFile mode_file_from_json(const nlohmann::json& j) {
  try {
    ModeFile f;
    const auto trap = j.at("trap_khz").get<std::vector<double>>();
    require(trap.size() == 3, ErrorKind::kConfigError, "trap_khz needs three entries");
    f.trap = {khz_to_angular(trap[0]), khz_to_angular(trap[1]), khz_to_angular(trap[2]), j.at("n_ions").get<int>()};
    for (double khz : j.at("frequencies_khz").get<std::vector<double>>()) f.modes.frequencies.push_back(khz_to_angular(khz));
    f.modes.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
    if (j.contains("positions_um")) f.positions_um = j.at("positions_um").get<std::vector<std::array<double, 2>>>();
    require(f.modes.vectors.size() == f.modes.frequencies.size(), ErrorKind::kConfigError,
            "mode file: vector and frequency counts differ");
    for (const auto& v : f.modes.vectors)
      require(static_cast<int>(v.size()) == f.trap.n_ions, ErrorKind::kConfigError, "mode file: vector length != n_ions");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, std::string("mode file: ") + e.what());
  }
}

inline void save_mode_file(const std::string& path, const ModeFile& f) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIOError, "cannot open " + path);
  out << to_json(f).dump(2) << '\n';
}

inline ModeFile load_mode_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kConfigError, "cannot open mode file " + path);
  try {
    return mode_file_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kConfigError, std::string("mode file: ") + e.what());
  }
}

}  // namespace dicke
