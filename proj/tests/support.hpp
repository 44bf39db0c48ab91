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

// Test-only oracles, built independently of the library's operator code:
// dense Kronecker-product Hamiltonians, dense eigendecomposition propagation
// and the closed-form B = 0 state.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dicke/dicke.hpp"

namespace dicke::testing {

inline Eigen::MatrixXcd dense(const HamiltonianOperator& h) {
  const auto d = static_cast<Eigen::Index>(h.dimension());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& t : h.triplets()) m(t.row, t.col) += t.value;
  return m;
}

inline Eigen::VectorXcd to_eigen(const StateVector& s) {
  return Eigen::Map<const Eigen::VectorXcd>(s.amplitudes.data(), static_cast<Eigen::Index>(s.amplitudes.size()));
}

inline StateVector from_eigen(const Basis& b, const Eigen::VectorXcd& v, double t) {
  return {b, std::vector<complex_t>(v.data(), v.data() + v.size()), t};
}

/// exp(-i H t) psi by full diagonalization.
inline Eigen::VectorXcd dense_propagate(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& psi, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd c = es.eigenvectors().adjoint() * psi;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -es.eigenvalues()(k) * t);
  return es.eigenvectors() * c;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Eigen::MatrixXcd pauli(char axis) {
  Eigen::MatrixXcd p(2, 2);
  const complex_t i{0.0, 1.0};
  if (axis == 'x') p << 0, 1, 1, 0;
  else if (axis == 'y') p << 0, -i, i, 0;
  else p << 1, 0, 0, -1;
  return p;
}

/// Operator on `site` of an n-spin register (site 0 is the leftmost factor).
inline Eigen::MatrixXcd site_op(const Eigen::MatrixXcd& op, int site, int n) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < n; ++i) out = kron(out, i == site ? op : Eigen::MatrixXcd::Identity(2, 2));
  return out;
}

inline Eigen::MatrixXcd annihilation(int n_max) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

/// The full-model Hamiltonian assembled term by term from Kronecker products.
inline Eigen::MatrixXcd kron_hamiltonian(const ModelParams& p) {
  const int n = p.num_sites();
  const auto ds = Eigen::Index{1} << n;
  const Eigen::MatrixXcd a = annihilation(p.n_max);
  const Eigen::MatrixXcd id_b = Eigen::MatrixXcd::Identity(p.n_max + 1, p.n_max + 1);
  const Eigen::MatrixXcd id_s = Eigen::MatrixXcd::Identity(ds, ds);
  Eigen::MatrixXcd coupling = Eigen::MatrixXcd::Zero(ds * (p.n_max + 1), ds * (p.n_max + 1));
  Eigen::MatrixXcd field = coupling;
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXcd mode = a * std::polar(1.0, p.sites[i].phi) + a.adjoint() * std::polar(1.0, -p.sites[i].phi);
    coupling += p.eta * p.sites[i].b * p.sites[i].omega * kron(id_s + site_op(pauli('z'), i, n), mode);
    field += p.b_field * kron(site_op(pauli('x'), i, n), id_b);
  }
  const Eigen::MatrixXcd boson = -p.delta * kron(id_s, a.adjoint() * a);
  return coupling + boson + field;
}

/// Random model with |eta b Omega| ~ 2pi x (0.1..0.3) kHz and uniform phases.
inline ModelParams random_model(int n, std::uint64_t seed, int n_max, double b_field = 0.0,
                                double delta = khz_to_angular(0.5)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.1, 0.3), phase(0.0, kTwoPi);
  ModelParams p;
  p.eta = 1.0;
  p.delta = delta;
  p.b_field = b_field;
  p.n_max = n_max;
  for (int i = 0; i < n; ++i) p.sites.push_back({khz_to_angular(mag(rng)), 1.0 / std::sqrt(double(n)), phase(rng)});
  return p;
}

/// Uniform-coupling model with per-site coupling g / sqrt(N), phase zero.
inline ModelParams uniform_model(int n, double g, double delta, double b_field, int n_max) {
  ModelParams p;
  p.eta = 1.0;
  p.delta = delta;
  p.b_field = b_field;
  p.n_max = n_max;
  for (int i = 0; i < n; ++i) p.sites.push_back({g, 1.0 / std::sqrt(double(n)), 0.0});
  return p;
}

/// Truncated coherent-state amplitudes <n|alpha>.
inline std::vector<complex_t> coherent(complex_t alpha, int n_max) {
  std::vector<complex_t> c(n_max + 1);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= n_max; ++n) c[n] = c[n - 1] * alpha / std::sqrt(double(n));
  return c;
}

/// B = 0 evolution of a FULL-basis product state from the vacuum, sector by
/// sector from analytic_b0_oracle.
inline StateVector b0_oracle_state(const ModelParams& p, SpinDirection dir, double t) {
  const Basis basis = Basis::full(p.num_sites(), p.n_max);
  const StateVector psi0 = initial_state(basis, dir);
  StateVector out{basis, std::vector<complex_t>(basis.dimension(), 0.0), t};
  const std::size_t fock = basis.fock_dim();
  for (std::size_t s = 0; s < basis.spin_dim(); ++s) {
    const complex_t c = psi0.amplitudes[s * fock];
    if (c == 0.0) continue;
    const auto sol = analytic_b0_oracle(p, s, t);
    const auto coh = coherent(sol.alpha, p.n_max);
    for (std::size_t n = 0; n < fock; ++n) out.amplitudes[s * fock + n] = c * std::polar(1.0, sol.theta) * coh[n];
  }
  return out;
}

/// Von Neumann entropy of the boson marginal: the spin-boson entanglement
/// entropy of a pure state.
inline double spin_boson_entropy(const StateVector& st) { return von_neumann_entropy(reduced_dm_boson(st)); }

}  // namespace dicke::testing
