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
#include <cmath>

#include <Eigen/Dense>

#include "dicke/error.hpp"
#include "dicke/units.hpp"

namespace dicke {

/// DICKE: symmetric k-spin basis |q>, q = excitations, dimension k + 1.
/// FULL: k-qubit computational basis, first listed site most significant.
enum class DmBasis { kDicke, kFull };

struct DensityMatrix {
  DmBasis basis = DmBasis::kDicke;
  Eigen::MatrixXcd rho;

  int dim() const { return static_cast<int>(rho.rows()); }

  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double hermiticity_residual() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }

  /// Hermitian to 1e-12, eigenvalues >= -1e-10, unit trace to 1e-10.
  bool is_valid(double psd_tol = 1e-10) const {
    if (hermiticity_residual() > 1e-12) return false;
    if (std::abs(rho.trace() - complex_t(1.0, 0.0)) > 1e-10) return false;
    return eigenvalues().minCoeff() >= -psd_tol;
  }
};

/// S = -sum lambda ln lambda in nats; eigenvalues <= 1e-12 contribute zero.
inline double von_neumann_entropy(const DensityMatrix& dm) {
  const Eigen::VectorXd lam = dm.eigenvalues();
  require(lam.minCoeff() >= -1e-8, ErrorKind::kNotPSD, "density matrix has a negative eigenvalue");
  double s = 0.0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > 1e-12) s -= lam(i) * std::log(lam(i));
  return std::max(s, 0.0);  // rounding can leave an eigenvalue just above 1
}

/// <psi|rho|psi>
inline double fidelity_with_pure(const DensityMatrix& dm, const Eigen::VectorXcd& psi) {
  return (psi.adjoint() * dm.rho * psi)(0, 0).real();
}

/// (1/2) || a - b ||_1
inline double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Hermitian part rescaled to unit trace.
inline Eigen::MatrixXcd normalized_hermitian(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

}  // namespace dicke
