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
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dicke/error.hpp"
#include "dicke/model.hpp"
#include "dicke/rotation.hpp"
#include "dicke/state.hpp"
#include "dicke/units.hpp"

namespace dicke {

struct EvolutionConfig {
  int krylov_dim = 30;
  double step_tolerance = 1e-10;
  /// Output grid t = k dt used by the pipelines; evolve() itself ignores it.
  std::vector<double> output_grid;

  void validate() const {
    require(krylov_dim >= 2, ErrorKind::kInvalidArgument, "krylov_dim must be >= 2");
    require(step_tolerance > 0.0, ErrorKind::kInvalidArgument, "step_tolerance must be > 0");
  }
};

/// t = k dt for k = 0..floor(t_max/dt + 1e-9)
inline std::vector<double> uniform_grid(double t_max, double dt) {
  require(dt > 0.0, ErrorKind::kInvalidArgument, "dt must be > 0");
  std::vector<double> g;
  const auto steps = static_cast<long>(std::floor(t_max / dt + 1e-9));
  for (long k = 0; k <= steps; ++k) g.push_back(double(k) * dt);
  return g;
}

struct KrylovStats {
  long steps = 0;
  long matvecs = 0;
};

/// exp(-i H (t_target - t)) |psi> by Lanczos projection with adaptive steps.
///
/// Each step builds an orthonormal Krylov basis of dimension krylov_dim
/// (reorthogonalized against all previous vectors) and picks the largest
/// step h for which the a posteriori estimate beta_m |[exp(-i h T) e_1]_m|
/// stays below step_tolerance: the next trial step doubles after a step
/// whose estimate was under 0.01 x tolerance, and trials halve until accepted.
inline StateVector evolve(const StateVector& state, const HamiltonianOperator& hamiltonian, double t_target,
                          const EvolutionConfig& config = {}, KrylovStats* stats = nullptr) {
  config.validate();
  require_same_basis(state.basis, hamiltonian.basis(), "evolve");
  const std::size_t dim = state.dimension();
  StateVector out = state;
  double remaining = t_target - state.time;
  if (remaining == 0.0) return out;
  const double sign = remaining > 0.0 ? 1.0 : -1.0;
  remaining = std::abs(remaining);
  const double initial_norm = state.norm();
  const int m_max = static_cast<int>(std::min<std::size_t>(config.krylov_dim, dim));

  // Krylov vectors are the columns of v
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(dim), m_max + 1);
  Eigen::Map<Eigen::VectorXcd> psi(out.amplitudes.data(), static_cast<Eigen::Index>(dim));
  std::vector<double> alpha(m_max), beta(m_max);
  double h_try = remaining;

  while (remaining > 0.0) {
    const double beta0 = psi.norm();
    if (beta0 == 0.0) break;
    v.col(0) = psi / beta0;

    int m = m_max;
    bool happy = false;
    for (int j = 0; j < m_max; ++j) {
      hamiltonian.apply(std::span<const complex_t>(v.col(j).data(), dim), std::span<complex_t>(v.col(j + 1).data(), dim));
      if (stats) ++stats->matvecs;
      auto w = v.col(j + 1);
      alpha[j] = v.col(j).dot(w).real();
      w -= alpha[j] * v.col(j);
      if (j > 0) w -= beta[j - 1] * v.col(j - 1);
      // one classical Gram-Schmidt pass against the whole basis
      const Eigen::VectorXcd c = v.leftCols(j + 1).adjoint() * w;
      w.noalias() -= v.leftCols(j + 1) * c;
      beta[j] = w.norm();
      require(std::isfinite(alpha[j]) && std::isfinite(beta[j]), ErrorKind::kKrylovBreakdown,
              "non-finite Lanczos coefficient");
      const double scale = std::abs(alpha[j]) + (j > 0 ? beta[j - 1] : 0.0) + 1.0;
      if (beta[j] <= 1e-13 * scale) {
        m = j + 1;
        happy = true;
        break;
      }
      w /= beta[j];
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();
    auto coefficients = [&](double h) {
      Eigen::VectorXcd c(m);
      for (int k = 0; k < m; ++k) c(k) = q(0, k) * std::polar(1.0, -sign * h * lam(k));
      return Eigen::VectorXcd(q.cast<complex_t>() * c);
    };

    // |[exp(-i h T) e_1]_m|; the eigendecomposition only resolves it to an
    // absolute 1e-16, so short steps use the Taylor tail from k = m - 1 on,
    // which has no cancellation while h |T| < m / 2.
    double t_norm = 0.0;
    for (int j = 0; j < m; ++j)
      t_norm = std::max(t_norm, std::abs(alpha[j]) + (j > 0 ? beta[j - 1] : 0.0) + (j + 1 < m ? beta[j] : 0.0));
    auto last_component = [&](double h, const Eigen::VectorXcd& y) {
      if (h * t_norm >= 0.5 * m) return std::abs(y(m - 1));
      // v = (h T)^k / k! e_1
      Eigen::VectorXd v = Eigen::VectorXd::Zero(m), next(m);
      v(0) = 1.0;
      complex_t sum{0.0, 0.0};
      for (int k = 1; k < m + 200; ++k) {
        for (int j = 0; j < m; ++j) {
          next(j) = alpha[j] * v(j);
          if (j > 0) next(j) += beta[j - 1] * v(j - 1);
          if (j + 1 < m) next(j) += beta[j] * v(j + 1);
        }
        v = next * (h / k);
        if (k < m - 1) continue;
        const complex_t term = std::pow(complex_t(0.0, -sign), k) * v(m - 1);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
      }
      return std::abs(sum);
    };

    double h = happy ? remaining : std::min(remaining, h_try);
    Eigen::VectorXcd y = coefficients(h);
    double err = happy ? 0.0 : beta0 * beta[m - 1] * last_component(h, y);
    while (err > config.step_tolerance) {
      h *= 0.5;
      require(h > 0.0 && h * 1e16 > remaining, ErrorKind::kKrylovBreakdown, "step size underflow");
      y = coefficients(h);
      err = beta0 * beta[m - 1] * last_component(h, y);
    }
    h_try = err < 0.01 * config.step_tolerance ? 2.0 * h : h;

    psi.noalias() = v.leftCols(m) * (beta0 * y);
    remaining -= h;
    if (remaining < 1e-15 * std::abs(t_target - state.time)) remaining = 0.0;
    if (stats) ++stats->steps;
  }
  out.time = t_target;
  require(std::abs(out.norm() - initial_norm) <= 1e-6, ErrorKind::kNormDrift, "norm drifted during evolution");
  return out;
}

/// Echo sequence: H(phi) for t/2, ideal global pi rotation, H(phi + pi) for t/2.
struct EchoSchedule {
  bool enabled = true;
  Axis pivot_axis = Axis::kX;
  /// Apply a second pi rotation at the end so that observables are reported
  /// in the frame of the initial state.
  bool restore_frame = false;
};

struct EchoHamiltonians {
  HamiltonianOperator first;
  HamiltonianOperator second;
};

inline EchoHamiltonians echo_hamiltonians(const ModelParams& params, const BuildOptions& opts = {}) {
  return {build_full_hamiltonian(params, opts), build_full_hamiltonian(shift_phases(params, kPi), opts)};
}

inline EchoHamiltonians echo_hamiltonians(const SubensembleSpec& spec, double delta, double b_field, int n_max,
                                          const BuildOptions& opts = {}) {
  return {build_subensemble_hamiltonian(spec, delta, b_field, n_max, opts),
          build_subensemble_hamiltonian(shift_phases(spec, kPi), delta, b_field, n_max, opts)};
}

inline SpinRotation pi_pulse(Axis pivot) { return {{axis_vector(pivot), kPi}}; }

/// Runs the echo sequence over [state.time, state.time + t_total]. With the
/// echo disabled this is plain evolution under `first`.
inline StateVector evolve_with_echo(const StateVector& state, const EchoHamiltonians& h, double t_total,
                                    const EvolutionConfig& config, const EchoSchedule& echo) {
  const double t0 = state.time;
  if (!echo.enabled) return evolve(state, h.first, t0 + t_total, config);
  StateVector mid = evolve(state, h.first, t0 + 0.5 * t_total, config);
  apply_global_rotation(mid, pi_pulse(echo.pivot_axis));
  StateVector out = evolve(mid, h.second, t0 + t_total, config);
  if (echo.restore_frame) apply_global_rotation(out, pi_pulse(echo.pivot_axis));
  return out;
}

/// Closed-form B = 0 dynamics of one sigma_z sector from the boson vacuum:
/// the mode is a driven oscillator H_s = f a + f* a^dag - delta a^dag a with
/// f = sum_i eta b_i Omega_i (1 + s_i) e^{i phi_i}. The state is
/// e^{i theta} |alpha> with alpha(t) = (f*/delta)(1 - e^{i delta t}) and
/// theta(t) = -(|f|^2/delta)(t - sin(delta t)/delta).
struct DisplacementSolution {
  complex_t alpha;
  double theta;
};

/// `spin_index` uses the FULL-basis bit convention (site 0 most significant,
/// bit 0 = sigma_z +1).
inline DisplacementSolution analytic_b0_oracle(const ModelParams& params, std::uint64_t spin_index, double t) {
  require(params.b_field == 0.0, ErrorKind::kNonzeroField, "oracle requires B = 0");
  const int n = params.num_sites();
  complex_t f{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const bool up = ((spin_index >> (n - 1 - i)) & 1U) == 0;
    if (up) f += 2.0 * params.complex_coupling(i);
  }
  const double d = params.delta;
  if (d == 0.0) return {complex_t(0.0, -1.0) * std::conj(f) * t, 0.0};
  // 1 - e^{i d t} = -2i sin(d t / 2) e^{i d t / 2}
  const complex_t loop = complex_t(0.0, -2.0 * std::sin(0.5 * d * t)) * std::polar(1.0, 0.5 * d * t);
  return {std::conj(f) / d * loop, -std::norm(f) / d * (t - std::sin(d * t) / d)};
}

namespace detail {

inline double poisson_pmf(double mean, int n) {
  if (n < 0) return 0.0;
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

// Largest coherent amplitude reached within [0, t_max] by drive magnitude f.
inline double max_displacement(double f, double delta, double t_max) {
  if (f == 0.0) return 0.0;
  if (delta == 0.0) return std::isfinite(t_max) ? f * t_max : std::numeric_limits<double>::infinity();
  const double half_turn = kPi / std::abs(delta);
  const double loop = t_max >= half_turn ? 2.0 : 2.0 * std::sin(0.5 * std::abs(delta) * t_max);
  return f / std::abs(delta) * loop;
}

}  // namespace detail

inline constexpr int kTruncationFloor = 4;

/// Fock cutoff for a coherent amplitude bound: the smallest n at and above
/// the mean where the top two Poisson populations fall below `tolerance`,
/// then padded by 5 standard deviations; never below kTruncationFloor.
inline int truncation_for_amplitude(double max_alpha, double tolerance = 1e-8) {
  require(tolerance > 0.0, ErrorKind::kInvalidArgument, "tolerance must be > 0");
  require(std::isfinite(max_alpha), ErrorKind::kInvalidTruncation, "unbounded boson amplitude");
  const double mean = max_alpha * max_alpha;
  int n = static_cast<int>(std::floor(mean));
  while (!(detail::poisson_pmf(mean, n - 1) < tolerance && detail::poisson_pmf(mean, n) < tolerance)) ++n;
  return std::max(kTruncationFloor, n + static_cast<int>(std::ceil(5.0 * max_alpha)));
}

/// Cutoff predicted by the B = 0 solution over all sigma_z sectors; the drive
/// bound 2 sum_i |eta b_i Omega_i| is the all-|0> sector when phases agree.
inline int adapt_truncation(const ModelParams& params, double tolerance = 1e-8,
                            double t_max = std::numeric_limits<double>::infinity()) {
  double f = 0.0;
  for (int i = 0; i < params.num_sites(); ++i) f += 2.0 * std::abs(params.coupling(i));
  return truncation_for_amplitude(detail::max_displacement(f, params.delta, t_max), tolerance);
}

inline int adapt_truncation(const SubensembleSpec& spec, double delta, double tolerance = 1e-8,
                            double t_max = std::numeric_limits<double>::infinity()) {
  double f = 0.0;
  for (const auto& g : spec.groups) f += 2.0 * g.n * std::abs(g.g);
  f /= std::sqrt(double(spec.total_spins()));
  return truncation_for_amplitude(detail::max_displacement(f, delta, t_max), tolerance);
}

}  // namespace dicke
