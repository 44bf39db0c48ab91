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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/basis.hpp"
#include "dicke/error.hpp"
#include "dicke/model.hpp"
#include "dicke/rng.hpp"
#include "dicke/rotation.hpp"
#include "dicke/units.hpp"

namespace dicke {

/// Joint spin-boson wavefunction with its basis tag and evolution time (s).
struct StateVector {
  Basis basis;
  std::vector<complex_t> amplitudes;
  double time = 0.0;

  std::size_t dimension() const { return amplitudes.size(); }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return std::sqrt(s);
  }
};

inline complex_t inner_product(std::span<const complex_t> a, std::span<const complex_t> b) {
  complex_t s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// |<a|b>|^2
inline double state_fidelity(const StateVector& a, const StateVector& b) {
  require_same_basis(a.basis, b.basis, "state_fidelity");
  return std::norm(inner_product(a.amplitudes, b.amplitudes));
}

enum class SpinDirection { kPlusX, kMinusX, kPlusY, kMinusY, kPlusZ, kMinusZ };

inline const char* to_string(SpinDirection d) {
  switch (d) {
    case SpinDirection::kPlusX: return "+x";
    case SpinDirection::kMinusX: return "-x";
    case SpinDirection::kPlusY: return "+y";
    case SpinDirection::kMinusY: return "-y";
    case SpinDirection::kPlusZ: return "+z";
    case SpinDirection::kMinusZ: return "-z";
  }
  return "?";
}

inline SpinDirection parse_spin_direction(const std::string& s) {
  if (s == "+x" || s == "x") return SpinDirection::kPlusX;
  if (s == "-x") return SpinDirection::kMinusX;
  if (s == "+y" || s == "y") return SpinDirection::kPlusY;
  if (s == "-y") return SpinDirection::kMinusY;
  if (s == "+z" || s == "z") return SpinDirection::kPlusZ;
  if (s == "-z") return SpinDirection::kMinusZ;
  throw Error(ErrorKind::kInvalidArgument, "unknown spin direction '" + s + "'");
}

/// |+-y> -> |-+y>; x and z are fixed.
inline SpinDirection relabel(SpinDirection d, const BasisRelabel& r) {
  if (!r.flip_y) return d;
  if (d == SpinDirection::kPlusY) return SpinDirection::kMinusY;
  if (d == SpinDirection::kMinusY) return SpinDirection::kPlusY;
  return d;
}

/// Single-spin amplitudes (u, v) on |0>, |1>, with sigma_z|0> = +|0>.
inline std::pair<complex_t, complex_t> spin_amplitudes(SpinDirection d) {
  const double h = std::sqrt(0.5);
  switch (d) {
    case SpinDirection::kPlusX: return {h, h};
    case SpinDirection::kMinusX: return {h, -h};
    case SpinDirection::kPlusY: return {h, complex_t(0.0, h)};
    case SpinDirection::kMinusY: return {h, complex_t(0.0, -h)};
    case SpinDirection::kPlusZ: return {1.0, 0.0};
    case SpinDirection::kMinusZ: return {0.0, 1.0};
  }
  return {1.0, 0.0};
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

inline complex_t ipow(complex_t z, int e) {
  complex_t r{1.0, 0.0};
  for (int i = 0; i < e; ++i) r *= z;
  return r;
}

/// Boson initial condition: vacuum, a given Fock state, or one trajectory of
/// a thermal mixture (n drawn from the Bose-Einstein distribution).
struct BosonInit {
  double nbar = 0.0;
  std::uint64_t seed = 0;
  int fock = 0;  ///< used when nbar == 0
};

/// P(n) for a thermal state of mean occupation nbar.
inline double thermal_probability(double nbar, int n) {
  const double q = nbar / (1.0 + nbar);
  return std::pow(q, n) / (1.0 + nbar);
}

inline int sample_thermal_fock(double nbar, int n_max, std::uint64_t seed) {
  const double tail = std::pow(nbar / (1.0 + nbar), n_max + 1);  // P(n > n_max)
  require(tail <= 1e-6, ErrorKind::kTruncationTooSmall,
          "thermal tail beyond n_max is " + std::to_string(tail));
  Rng rng(seed);
  double u = uniform01(rng) * (1.0 - tail);
  for (int n = 0; n <= n_max; ++n) {
    u -= thermal_probability(nbar, n);
    if (u < 0.0) return n;
  }
  return n_max;
}

namespace detail {

inline int boson_index(const BosonInit& boson, int n_max) {
  if (boson.nbar > 0.0) return sample_thermal_fock(boson.nbar, n_max, boson.seed);
  require(boson.fock >= 0 && boson.fock <= n_max, ErrorKind::kTruncationTooSmall,
          "initial Fock state above n_max");
  return boson.fock;
}

}  // namespace detail

/// Product spin state tensored with a Fock state, in the FULL basis.
inline StateVector initial_state(const Basis& basis, SpinDirection dir, const BosonInit& boson = {}) {
  StateVector st{basis, std::vector<complex_t>(basis.dimension(), 0.0), 0.0};
  const int n_boson = detail::boson_index(boson, basis.n_max);
  const auto [u, v] = spin_amplitudes(dir);
  const std::size_t fock = basis.fock_dim();
  if (basis.kind == BasisKind::kFull) {
    for (std::size_t s = 0; s < basis.spin_dim(); ++s) {
      const int ones = std::popcount(static_cast<std::uint64_t>(s));
      st.amplitudes[s * fock + n_boson] = ipow(u, basis.n_sites - ones) * ipow(v, ones);
    }
    return st;
  }
  // c_m = sqrt(C(N_j, m)) u^{N_j - m} v^m per group
  std::vector<std::vector<complex_t>> coeff(basis.num_groups());
  for (int j = 0; j < basis.num_groups(); ++j) {
    const int nj = basis.group_size(j);
    for (int m = 0; m <= nj; ++m)
      coeff[j].push_back(std::sqrt(binomial(nj, m)) * ipow(u, nj - m) * ipow(v, m));
  }
  for (std::size_t s = 0; s < basis.spin_dim(); ++s) {
    const auto m = basis.decode_occupations(s);
    complex_t a{1.0, 0.0};
    for (int j = 0; j < basis.num_groups(); ++j) a *= coeff[j][m[j]];
    st.amplitudes[s * fock + n_boson] = a;
  }
  return st;
}

namespace detail {

// Applies a (d x d) matrix along one tensor digit of the amplitude array laid
// out as [outer][d][inner].
inline void apply_along(std::vector<complex_t>& amps, const Eigen::MatrixXcd& mat, std::size_t outer,
                        std::size_t inner) {
  const std::size_t d = static_cast<std::size_t>(mat.rows());
  std::vector<complex_t> buf(d);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * d * inner + i;
      for (std::size_t m = 0; m < d; ++m) buf[m] = amps[base + m * inner];
      for (std::size_t r = 0; r < d; ++r) {
        complex_t acc{0.0, 0.0};
        for (std::size_t c = 0; c < d; ++c) acc += mat(r, c) * buf[c];
        amps[base + r * inner] = acc;
      }
    }
  }
}

}  // namespace detail

/// Applies the same rotation to every spin: per-site 2x2 in the FULL basis,
/// the spin-(N_j/2) representation on each group ladder otherwise.
inline void apply_global_rotation(StateVector& st, const SpinRotation& rot) {
  if (rot.empty()) return;
  const Basis& b = st.basis;
  const std::size_t fock = b.fock_dim();
  if (b.kind == BasisKind::kFull) {
    const Eigen::MatrixXcd u = dicke_rotation_matrix(1, rot);
    for (int i = 0; i < b.n_sites; ++i) {
      const std::size_t inner = static_cast<std::size_t>(b.site_mask(i)) * fock;
      const std::size_t outer = b.spin_dim() / (2 * b.site_mask(i));
      detail::apply_along(st.amplitudes, u, outer, inner);
    }
    return;
  }
  for (int j = 0; j < b.num_groups(); ++j) {
    const int nj = b.group_size(j);
    const Eigen::MatrixXcd d = dicke_rotation_matrix(nj, rot);
    const std::size_t stride = b.group_stride(j);
    detail::apply_along(st.amplitudes, d, b.spin_dim() / (stride * (nj + 1)), stride * fock);
  }
}

}  // namespace dicke
