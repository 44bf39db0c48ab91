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

// Shot-record file, delimited text:
//
//   # dicke-shots v1
//   # seed=<u64> directions=<K> shots_per_direction=<S> sites=<i;j;...>
//   theta,phi,shot,stream_seed,sites,outcomes
//   <theta>,<phi>,<shot>,<u64>,<i;j;...>,<bits>
//
// theta/phi in radians with 17 significant digits; outcomes is one character
// per listed site, '0' for sigma_z = +1 after the basis rotation.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dicke/error.hpp"
#include "dicke/measure.hpp"

namespace dicke {

struct ShotFileHeader {
  std::uint64_t seed = 0;
  int directions = 0;
  int shots_per_direction = 0;
  std::vector<int> sites;
};

namespace detail {

inline std::string join_sites(const std::vector<int>& sites) {
  std::string s;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(sites[i]);
  }
  return s;
}

inline std::vector<int> split_sites(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_shot_records(std::ostream& os, const ShotFileHeader& header, const std::vector<ShotRecord>& records) {
  os << "# dicke-shots v1\n";
  os << "# seed=" << header.seed << " directions=" << header.directions
     << " shots_per_direction=" << header.shots_per_direction << " sites=" << detail::join_sites(header.sites) << "\n";
  os << "theta,phi,shot,stream_seed,sites,outcomes\n";
  for (const auto& r : records) {
    os << detail::format_double(r.direction.theta) << ',' << detail::format_double(r.direction.phi) << ','
       << r.shot_index << ',' << r.rng_seed << ',' << detail::join_sites(r.sites) << ',';
    for (auto b : r.outcomes) os << (b ? '1' : '0');
    os << '\n';
  }
}

inline std::vector<ShotRecord> read_shot_records(std::istream& is, ShotFileHeader* header = nullptr) {
  std::vector<ShotRecord> out;
  std::string line;
  bool saw_columns = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header && line.rfind("# seed=", 0) == 0) {
        std::stringstream ss(line.substr(2));
        std::string tok;
        while (ss >> tok) {
          const auto eq = tok.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
          if (key == "seed") header->seed = std::stoull(val);
          if (key == "directions") header->directions = std::stoi(val);
          if (key == "shots_per_direction") header->shots_per_direction = std::stoi(val);
          if (key == "sites") header->sites = detail::split_sites(val);
        }
      }
      continue;
    }
    if (!saw_columns) {
      require(line.rfind("theta,", 0) == 0, ErrorKind::kIOError, "missing shot-record column header");
      saw_columns = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    require(f.size() == 6, ErrorKind::kIOError, "malformed shot record: " + line);
    ShotRecord r;
    r.direction = {std::stod(f[0]), std::stod(f[1])};
    r.shot_index = std::stol(f[2]);
    r.rng_seed = std::stoull(f[3]);
    r.sites = detail::split_sites(f[4]);
    for (char c : f[5]) {
      require(c == '0' || c == '1', ErrorKind::kIOError, "bad outcome character");
      r.outcomes.push_back(c == '1' ? 1 : 0);
    }
    require(r.outcomes.size() == r.sites.size(), ErrorKind::kIOError, "outcome count differs from site count");
    out.push_back(std::move(r));
  }
  return out;
}

inline void save_shot_records(const std::string& path, const ShotFileHeader& header,
                              const std::vector<ShotRecord>& records) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorKind::kIOError, "cannot open " + path);
  write_shot_records(f, header, records);
}

inline std::vector<ShotRecord> load_shot_records(const std::string& path, ShotFileHeader* header = nullptr) {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorKind::kIOError, "cannot open " + path);
  return read_shot_records(f, header);
}

}  // namespace dicke
