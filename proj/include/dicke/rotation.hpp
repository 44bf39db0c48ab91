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

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "dicke/units.hpp"

namespace dicke {

enum class Axis { kX, kY, kZ };

inline std::array<double, 3> axis_vector(Axis a) {
  switch (a) {
    case Axis::kX: return {1.0, 0.0, 0.0};
    case Axis::kY: return {0.0, 1.0, 0.0};
    case Axis::kZ: return {0.0, 0.0, 1.0};
  }
  return {0.0, 0.0, 1.0};
}

inline char axis_name(Axis a) { return a == Axis::kX ? 'x' : (a == Axis::kY ? 'y' : 'z'); }

/// exp(-i angle n.S) applied to every spin.
struct AxisAngle {
  std::array<double, 3> axis;
  double angle;
};

/// A global rotation given as a product of axis-angle steps, applied in order.
using SpinRotation = std::vector<AxisAngle>;

/// Rotation mapping the Bloch direction (theta, phi) onto +z:
/// R_y(-theta) R_z(-phi). Measuring sigma_z after it measures n.sigma.
inline SpinRotation rotation_to_z(double theta, double phi) {
  return {{{0.0, 0.0, 1.0}, -phi}, {{0.0, 1.0, 0.0}, -theta}};
}

inline SpinRotation rotation_to_z(Axis a) {
  switch (a) {
    case Axis::kX: return rotation_to_z(kPi / 2, 0.0);
    case Axis::kY: return rotation_to_z(kPi / 2, kPi / 2);
    case Axis::kZ: return {};
  }
  return {};
}

inline SpinRotation inverse(const SpinRotation& r) {
  SpinRotation out;
  for (auto it = r.rbegin(); it != r.rend(); ++it) out.push_back({it->axis, -it->angle});
  return out;
}

/// n.J for spin N/2 in the excitation-count basis m = 0..N
/// (J_z |m> = (N/2 - m) |m>, J_+ lowers m).
inline Eigen::MatrixXcd spin_generator(int n_spins, const std::array<double, 3>& axis) {
  const int d = n_spins + 1;
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    g(m, m) = axis[2] * (0.5 * n_spins - m);
    if (m + 1 < d) {
      // <m|J_+|m+1> = sqrt((m+1)(N-m))
      const double jp = std::sqrt(double(m + 1) * double(n_spins - m));
      // J_x = (J_+ + J_-)/2, J_y = (J_+ - J_-)/(2i)
      g(m, m + 1) += complex_t(0.5 * axis[0] * jp, -0.5 * axis[1] * jp);
      g(m + 1, m) += complex_t(0.5 * axis[0] * jp, 0.5 * axis[1] * jp);
    }
  }
  return g;
}

/// exp(-i angle n.J) on the symmetric (Dicke) ladder of n_spins spins, via
/// eigendecomposition of the Hermitian generator.
inline Eigen::MatrixXcd dicke_rotation_matrix(int n_spins, const AxisAngle& step) {
  const int d = n_spins + 1;
  const auto& n = step.axis;
  if (n[0] == 0.0 && n[1] == 0.0) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(d, d);
    for (int m = 0; m < d; ++m) r(m, m) = std::polar(1.0, -step.angle * n[2] * (0.5 * n_spins - m));
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(spin_generator(n_spins, n));
  Eigen::VectorXcd phases(d);
  for (int k = 0; k < d; ++k) phases(k) = std::polar(1.0, -step.angle * es.eigenvalues()(k));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline Eigen::MatrixXcd dicke_rotation_matrix(int n_spins, const SpinRotation& rot) {
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(n_spins + 1, n_spins + 1);
  for (const auto& step : rot) r = dicke_rotation_matrix(n_spins, step) * r;
  return r;
}

}  // namespace dicke
