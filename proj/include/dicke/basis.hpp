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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dicke/error.hpp"

namespace dicke {

enum class BasisKind { kFull, kSubensemble };

inline const char* to_string(BasisKind kind) {
  return kind == BasisKind::kFull ? "FULL" : "SUBENSEMBLE";
}

/// Describes the ordering of a joint spin-boson Hilbert space.
///
/// Index layout is spin-major, Fock-minor: index = spin_index * (n_max + 1) + n.
///
/// FULL: spin_index is an N-bit string, site 0 in the most significant bit;
/// bit value 0 is |0> (sigma_z = +1), bit value 1 is |1>.
///
/// SUBENSEMBLE: spin_index is mixed-radix over the excitation counts
/// (m_1, ..., m_M), group 1 most significant, m_j in [0, N_j]. m_j counts spins
/// of group j in |1>, so S_z^j = N_j/2 - m_j.
struct Basis {
  BasisKind kind = BasisKind::kFull;
  int n_max = 0;
  int n_sites = 0;
  /// SUBENSEMBLE only: the parent-model site indices held by each group.
  std::vector<std::vector<int>> group_sites;

  static Basis full(int n_sites, int n_max) {
    Basis b;
    b.kind = BasisKind::kFull;
    b.n_sites = n_sites;
    b.n_max = n_max;
    return b;
  }

  static Basis subensemble(std::vector<std::vector<int>> group_sites, int n_max) {
    Basis b;
    b.kind = BasisKind::kSubensemble;
    b.n_max = n_max;
    for (const auto& g : group_sites) b.n_sites += static_cast<int>(g.size());
    b.group_sites = std::move(group_sites);
    return b;
  }

  std::size_t fock_dim() const { return static_cast<std::size_t>(n_max) + 1; }

  int num_groups() const { return static_cast<int>(group_sites.size()); }

  int group_size(int j) const { return static_cast<int>(group_sites[j].size()); }

  std::size_t spin_dim() const {
    if (kind == BasisKind::kFull) return std::size_t{1} << n_sites;
    std::size_t d = 1;
    for (const auto& g : group_sites) d *= g.size() + 1;
    return d;
  }

  std::size_t dimension() const { return spin_dim() * fock_dim(); }

  /// Excitation counts (m_1..m_M) of a SUBENSEMBLE spin index.
  std::vector<int> decode_occupations(std::size_t spin_index) const {
    std::vector<int> m(group_sites.size());
    for (int j = num_groups() - 1; j >= 0; --j) {
      const std::size_t radix = group_sites[j].size() + 1;
      m[j] = static_cast<int>(spin_index % radix);
      spin_index /= radix;
    }
    return m;
  }

  /// Stride of group j's occupation digit within the spin index.
  std::size_t group_stride(int j) const {
    std::size_t s = 1;
    for (int l = num_groups() - 1; l > j; --l) s *= group_sites[l].size() + 1;
    return s;
  }

  /// Bit mask of site i inside a FULL spin index.
  std::uint64_t site_mask(int site) const {
    return std::uint64_t{1} << (n_sites - 1 - site);
  }

  /// Group index containing a site (SUBENSEMBLE only), or -1.
  int group_of_site(int site) const {
    for (int j = 0; j < num_groups(); ++j)
      for (int s : group_sites[j])
        if (s == site) return j;
    return -1;
  }

  bool operator==(const Basis&) const = default;
};

inline void require_same_basis(const Basis& a, const Basis& b, const std::string& context) {
  require(a == b, ErrorKind::kBasisMismatch, context + ": basis tags differ");
}

}  // namespace dicke
