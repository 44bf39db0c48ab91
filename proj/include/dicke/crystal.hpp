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
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dicke/error.hpp"
#include "dicke/rng.hpp"
#include "dicke/units.hpp"

namespace dicke {

namespace constants {
inline constexpr double kElementaryCharge = 1.602176634e-19;     // C
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;     // kg
inline constexpr double kElectronMass = 9.1093837015e-31;        // kg
/// 171Yb+ (neutral atomic mass minus one electron).
inline constexpr double kYb171IonMass = 170.9363315 * kAtomicMassUnit - kElectronMass;
}  // namespace constants

/// Secular trap frequencies in rad/s. The crystal lies in the xz plane and y
/// is the transverse (stiffest) direction.
struct TrapConfig {
  double omega_x = 0.0;
  double omega_y = 0.0;
  double omega_z = 0.0;
  int n_ions = 0;

  void validate() const {
    require(n_ions >= 1, ErrorKind::kInvalidArgument, "n_ions must be >= 1");
    require(omega_x > 0.0 && omega_y > 0.0 && omega_z > 0.0, ErrorKind::kInvalidArgument,
            "trap frequencies must be positive");
    require(omega_y > omega_x && omega_y > omega_z, ErrorKind::kInvalidArgument,
            "omega_y must be the stiffest direction for a planar xz crystal");
  }
};

/// Characteristic length (e^2 / (4 pi eps0 m omega_z^2))^{1/3} in meters.
inline double length_scale(double omega_z, double mass = constants::kYb171IonMass) {
  const double e2 = constants::kElementaryCharge * constants::kElementaryCharge;
  return std::cbrt(e2 / (4.0 * kPi * constants::kVacuumPermittivity * mass * omega_z * omega_z));
}

/// Equilibrium positions (x, z) in units of length_scale(omega_z).
struct CrystalSolution {
  std::vector<std::array<double, 2>> positions;
  bool converged = false;
  double gradient_norm = 0.0;
  double energy = 0.0;
  int iterations = 0;
};

struct EquilibriumOptions {
  int max_iterations = 10000;
  double gradient_tolerance = 1e-10;
  /// Rigid rotation (rad) of the initial guess about the y axis.
  double guess_rotation = 0.0;
  /// Uniform jitter amplitude of the guess, relative to lattice spacing.
  double perturbation = 0.05;
};

// All crystal mechanics below is in scaled units: lengths in l, energies in
// m omega_z^2 l^2, so U = sum_i (bx^2 x_i^2 + z_i^2)/2 + sum_{i<j} 1/r_ij.

/// Scaled potential energy of an in-plane configuration.
inline double potential_energy(const TrapConfig& trap, const std::vector<std::array<double, 2>>& pos) {
  const double bx2 = std::pow(trap.omega_x / trap.omega_z, 2);
  double u = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    u += 0.5 * (bx2 * pos[i][0] * pos[i][0] + pos[i][1] * pos[i][1]);
    for (std::size_t j = i + 1; j < pos.size(); ++j)
      u += 1.0 / std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
  }
  return u;
}

inline Eigen::VectorXd potential_gradient(const TrapConfig& trap, const std::vector<std::array<double, 2>>& pos) {
  const double bx2 = std::pow(trap.omega_x / trap.omega_z, 2);
  const std::size_t n = pos.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    g(2 * i) += bx2 * pos[i][0];
    g(2 * i + 1) += pos[i][1];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pos[i][0] - pos[j][0], dz = pos[i][1] - pos[j][1];
      const double r = std::hypot(dx, dz);
      const double inv3 = 1.0 / (r * r * r);
      g(2 * i) -= dx * inv3;
      g(2 * i + 1) -= dz * inv3;
      g(2 * j) += dx * inv3;
      g(2 * j + 1) += dz * inv3;
    }
  }
  return g;
}

/// In-plane Hessian, coordinates ordered (x_0, z_0, x_1, z_1, ...).
inline Eigen::MatrixXd in_plane_hessian(const TrapConfig& trap, const std::vector<std::array<double, 2>>& pos) {
  const double bx2 = std::pow(trap.omega_x / trap.omega_z, 2);
  const auto n = static_cast<Eigen::Index>(pos.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(2 * i, 2 * i) += bx2;
    h(2 * i + 1, 2 * i + 1) += 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d[2] = {pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]};
      const double r2 = d[0] * d[0] + d[1] * d[1];
      const double r = std::sqrt(r2);
      const double inv5 = 1.0 / (r2 * r2 * r);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double k = (3.0 * d[a] * d[b] - (a == b ? r2 : 0.0)) * inv5;
          h(2 * i + a, 2 * i + b) += k;
          h(2 * j + a, 2 * j + b) += k;
          h(2 * i + a, 2 * j + b) -= k;
          h(2 * j + a, 2 * i + b) -= k;
        }
    }
  }
  return h;
}

namespace detail {

// First n points of a unit hexagonal lattice ordered by (radius, angle).
inline std::vector<std::array<double, 2>> hexagonal_shells(int n) {
  std::vector<std::array<double, 2>> pts;
  const int shells = static_cast<int>(std::ceil(std::sqrt(double(n)))) + 2;
  for (int i = -shells; i <= shells; ++i)
    for (int j = -shells; j <= shells; ++j)
      pts.push_back({i + 0.5 * j, 0.5 * std::sqrt(3.0) * j});
  auto key = [](const std::array<double, 2>& p) {
    const double r = std::round(std::hypot(p[0], p[1]) * 1e9) / 1e9;
    return std::pair{r, wrap_phase(std::atan2(p[1], p[0]))};
  };
  std::stable_sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  pts.resize(n);
  return pts;
}

}  // namespace detail

/// Deterministic hexagonal-shell guess, stretched to the trap aspect ratio,
/// rigidly rotated by `rotation` and jittered by the seeded generator.
inline std::vector<std::array<double, 2>> initial_guess(const TrapConfig& trap, std::uint64_t seed,
                                                        const EquilibriumOptions& opts = {}) {
  auto pts = detail::hexagonal_shells(trap.n_ions);
  // rough Wigner-Seitz spacing for a planar crystal of this size
  const double spacing = std::max(0.5, std::cbrt(1.0 / std::sqrt(double(trap.n_ions))));
  const double aspect = std::sqrt(trap.omega_z / trap.omega_x);
  Rng rng(seed);
  const double c = std::cos(opts.guess_rotation), s = std::sin(opts.guess_rotation);
  for (auto& p : pts) {
    const double jx = opts.perturbation * (2.0 * uniform01(rng) - 1.0);
    const double jz = opts.perturbation * (2.0 * uniform01(rng) - 1.0);
    // lattice axis 0 becomes the long (z) axis of the crystal
    const double z = spacing * (p[0] + jx) / aspect;
    const double x = spacing * (p[1] + jz) * aspect;
    p = {c * x + s * z, -s * x + c * z};
  }
  if (trap.n_ions == 1) pts[0] = {0.0, 0.0};
  return pts;
}

/// Minimizes the in-plane potential by damped Newton descent (Levenberg
/// shift plus backtracking on the energy).
inline CrystalSolution solve_equilibrium(const TrapConfig& trap, std::uint64_t seed,
                                         const EquilibriumOptions& opts = {}) {
  trap.validate();
  CrystalSolution sol;
  sol.positions = initial_guess(trap, seed, opts);
  const auto n = static_cast<Eigen::Index>(trap.n_ions);
  auto apply_step = [&](const std::vector<std::array<double, 2>>& base, const Eigen::VectorXd& step, double t) {
    auto out = base;
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i][0] += t * step(2 * i);
      out[i][1] += t * step(2 * i + 1);
    }
    return out;
  };

  double mu = 0.0;
  double energy = potential_energy(trap, sol.positions);
  Eigen::VectorXd g = potential_gradient(trap, sol.positions);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() <= opts.gradient_tolerance) break;
    Eigen::MatrixXd h = in_plane_hessian(trap, sol.positions);
    const double diag_scale = h.diagonal().cwiseAbs().maxCoeff();
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (;;) {
      llt.compute(h + mu * Eigen::MatrixXd::Identity(2 * n, 2 * n));
      if (llt.info() == Eigen::Success) break;
      mu = std::max(10.0 * mu, 1e-6 * diag_scale);
    }
    const Eigen::VectorXd step = llt.solve(-g);
    const double slope = g.dot(step);
    const double gnorm = g.norm();
    double t = 1.0;
    bool accepted = false;
    for (; t > 1e-12; t *= 0.5) {
      auto trial = apply_step(sol.positions, step, t);
      const double e = potential_energy(trap, trial);
      const Eigen::VectorXd gt = potential_gradient(trap, trial);
      // Energy differences fall below rounding near the minimum; there the
      // gradient norm decides.
      const bool ok = e <= energy + 1e-4 * t * slope ||
                      (std::abs(t * slope) <= 1e-11 * std::abs(energy) && gt.norm() < gnorm);
      if (ok) {
        sol.positions = std::move(trial);
        energy = e;
        g = gt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      mu = std::max(10.0 * mu, 1e-6 * diag_scale);
      continue;
    }
    mu = t == 1.0 ? mu * 0.1 : std::max(10.0 * mu, 1e-6 * diag_scale);
    if (mu < 1e-12 * diag_scale) mu = 0.0;
  }
  sol.iterations = it;
  sol.energy = energy;
  sol.gradient_norm = g.cwiseAbs().maxCoeff();
  sol.converged = sol.gradient_norm <= opts.gradient_tolerance;
  require(sol.converged, ErrorKind::kNonConvergence,
          "equilibrium search stopped at gradient " + std::to_string(sol.gradient_norm));
  if (trap.n_ions > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(in_plane_hessian(trap, sol.positions), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-9, ErrorKind::kUnstableCrystal, "in-plane Hessian is not PSD");
  }
  return sol;
}

/// Transverse (y) Hessian in units of omega_z^2:
/// A_ii = (omega_y/omega_z)^2 - sum_k 1/r_ik^3, A_ij = 1/r_ij^3.
inline Eigen::MatrixXd transverse_hessian(const TrapConfig& trap, const CrystalSolution& sol) {
  const auto n = static_cast<Eigen::Index>(sol.positions.size());
  const double by2 = std::pow(trap.omega_y / trap.omega_z, 2);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = by2;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = std::hypot(sol.positions[i][0] - sol.positions[j][0], sol.positions[i][1] - sol.positions[j][1]);
      const double k = 1.0 / (r * r * r);
      a(i, i) -= k;
      a(i, j) = k;
    }
  }
  return a;
}

/// Transverse normal modes, highest frequency first. vectors[k][i] is the
/// amplitude of ion i in mode k.
struct ModeTable {
  std::vector<double> frequencies;  ///< rad/s, descending
  std::vector<std::vector<double>> vectors;

  int size() const { return static_cast<int>(frequencies.size()); }
};

/// Diagonalizes the transverse Hessian. Within a degenerate eigenspace the
/// basis is fixed by Gram-Schmidt over the coordinate axes in ion order; each
/// vector's largest-magnitude component (the first, among near ties) is made
/// positive.
inline ModeTable transverse_modes(const TrapConfig& trap, const CrystalSolution& sol) {
  require(sol.converged, ErrorKind::kInvalidArgument, "crystal solution has not converged");
  const Eigen::MatrixXd a = transverse_hessian(trap, sol);
  const auto n = a.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd lam = es.eigenvalues().reverse();
  Eigen::MatrixXd vec = es.eigenvectors().rowwise().reverse();
  require(lam.minCoeff() > 0.0, ErrorKind::kImaginaryFrequency, "transverse mode with negative curvature");

  const double scale = lam.cwiseAbs().maxCoeff();
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(lam(end) - lam(start)) <= 1e-9 * scale) ++end;
    const Eigen::Index size = end - start;
    if (size > 1) {
      const Eigen::MatrixXd sub = vec.middleCols(start, size);
      std::vector<Eigen::VectorXd> chosen;
      for (Eigen::Index i = 0; i < n && static_cast<Eigen::Index>(chosen.size()) < size; ++i) {
        Eigen::VectorXd v = sub * sub.row(i).transpose();  // projection of e_i
        for (const auto& c : chosen) v -= c.dot(v) * c;
        if (v.norm() > 1e-8) chosen.push_back(v.normalized());
      }
      for (Eigen::Index c = 0; c < size; ++c) vec.col(start + c) = chosen[c];
      const double mean = lam.segment(start, size).mean();
      lam.segment(start, size).setConstant(mean);
    }
    start = end;
  }

  ModeTable table;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd v = vec.col(k);
    // first component within 1e-9 of the largest magnitude is made positive
    const double peak = v.cwiseAbs().maxCoeff();
    Eigen::Index arg = 0;
    while (std::abs(v(arg)) < peak * (1.0 - 1e-9)) ++arg;
    if (v(arg) < 0.0) v = -v;
    table.frequencies.push_back(trap.omega_z * std::sqrt(lam(k)));
    table.vectors.emplace_back(v.data(), v.data() + n);
  }
  return table;
}

/// Mode choice: the COM mode (index 0) or an index into the descending table.
struct ModeSelector {
  bool com = true;
  int index = 0;

  static ModeSelector center_of_mass() { return {true, 0}; }
  static ModeSelector at(int k) { return {false, k}; }
};

struct SelectedMode {
  double frequency;
  std::vector<double> vector;
};

inline SelectedMode select_mode(const ModeTable& table, ModeSelector which) {
  const int k = which.com ? 0 : which.index;
  require(k >= 0 && k < table.size(), ErrorKind::kIndexOutOfRange, "mode index " + std::to_string(k));
  return {table.frequencies[k], table.vectors[k]};
}

/// The `count` sites nearest to `site` (itself first), by Euclidean distance;
/// ties break by index.
inline std::vector<int> nearest_sites(const std::vector<std::array<double, 2>>& pos, int site, int count) {
  require(site >= 0 && site < static_cast<int>(pos.size()), ErrorKind::kSiteOutOfRange, "site");
  require(count >= 1 && count <= static_cast<int>(pos.size()), ErrorKind::kInvalidArgument, "count");
  std::vector<int> idx(pos.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto dist = [&](int i) { return std::hypot(pos[i][0] - pos[site][0], pos[i][1] - pos[site][1]); };
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return dist(a) < dist(b); });
  idx.resize(count);
  return idx;
}

}  // namespace dicke
