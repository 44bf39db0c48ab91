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
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dicke/density_matrix.hpp"
#include "dicke/error.hpp"
#include "dicke/measure.hpp"
#include "dicke/rotation.hpp"

namespace dicke {

struct TomoOptions {
  int max_iterations = 10000;
  double tolerance = 1e-10;  ///< max |rho_new - rho| entry change
  double dilution = 0.01;
};

struct TomoResult {
  DensityMatrix rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Fewer informationally distinct projectors than dim^2.
  bool underdetermined = false;
  std::vector<double> likelihood_history;
};

namespace detail {

struct ProjectorData {
  std::vector<Eigen::VectorXcd> vectors;  // rank-one projectors |v><v|
  std::vector<double> counts;
  int dim = 0;
  int distinct_projectors = 0;
};

inline double log_likelihood(const ProjectorData& data, const Eigen::MatrixXcd& rho) {
  double l = 0.0;
  for (std::size_t j = 0; j < data.vectors.size(); ++j) {
    const double p = std::max(1e-12, (data.vectors[j].adjoint() * rho * data.vectors[j])(0, 0).real());
    l += data.counts[j] * std::log(p);
  }
  return l;
}

inline Eigen::MatrixXcd r_operator(const ProjectorData& data, const Eigen::MatrixXcd& rho, double total) {
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(data.dim, data.dim);
  for (std::size_t j = 0; j < data.vectors.size(); ++j) {
    const auto& v = data.vectors[j];
    const double p = std::max(1e-12, (v.adjoint() * rho * v)(0, 0).real());
    r.noalias() += (data.counts[j] / total / p) * (v * v.adjoint());
  }
  return r;
}

inline Eigen::MatrixXcd sandwich(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& rho) {
  return normalized_hermitian(g * rho * g.adjoint());
}

// Fixed-point iteration rho <- N[R rho R] starting from the maximally mixed
// state. A step that would lower the likelihood is retried with the diluted
// operator (I + eps R)/(1 + eps), halving eps until the likelihood does not
// drop; if no eps works the iterate is stationary.
inline TomoResult run_rrr(const ProjectorData& data, DmBasis basis, const TomoOptions& opts) {
  const int d = data.dim;
  double total = 0.0;
  for (double c : data.counts) total += c;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(d, d) / double(d);
  TomoResult res;
  res.underdetermined = data.distinct_projectors < d * d;
  double l = log_likelihood(data, rho);
  res.likelihood_history.push_back(l);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXcd r = r_operator(data, rho, total);
    Eigen::MatrixXcd next = sandwich(r, rho);
    double l_next = log_likelihood(data, next);
    if (!(l_next >= l)) {
      bool improved = false;
      for (double eps = opts.dilution; eps > 1e-12; eps *= 0.5) {
        next = sandwich((id + eps * r) / (1.0 + eps), rho);
        l_next = log_likelihood(data, next);
        if (l_next >= l) {
          improved = true;
          break;
        }
      }
      if (!improved) {
        res.converged = true;
        res.iterations = it;
        break;
      }
    }
    const double change = (next - rho).cwiseAbs().maxCoeff();
    rho = std::move(next);
    l = l_next;
    res.likelihood_history.push_back(l);
    res.iterations = it + 1;
    if (change <= opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.rho = {basis, rho};
  res.log_likelihood = l;
  return res;
}

// Groups records by exact direction; counts outcome index per direction.
template <typename OutcomeIndex>
std::vector<std::pair<BlochDirection, std::map<int, double>>> tally(const std::vector<ShotRecord>& records, int k,
                                                                    OutcomeIndex&& index) {
  require(!records.empty(), ErrorKind::kNoRecords, "no shot records");
  std::vector<std::pair<BlochDirection, std::map<int, double>>> out;
  for (const auto& rec : records) {
    require(static_cast<int>(rec.outcomes.size()) >= k, ErrorKind::kDegenerateData,
            "record has fewer outcomes than k");
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) {
      return e.first.theta == rec.direction.theta && e.first.phi == rec.direction.phi;
    });
    if (it == out.end()) {
      out.push_back({rec.direction, {}});
      it = out.end() - 1;
    }
    it->second[index(rec)] += 1.0;
  }
  return out;
}

}  // namespace detail

/// Maximum-likelihood state of k spins assuming permutation symmetry: each
/// shot (first k outcomes) is collapsed to its excitation count q, with
/// projector U^dag |q><q| U for the direction's rotation U onto z.
inline TomoResult mle_dicke(const std::vector<ShotRecord>& records, int k, const TomoOptions& opts = {}) {
  require(k >= 1, ErrorKind::kInvalidArgument, "k must be >= 1");
  const auto table = detail::tally(records, k, [k](const ShotRecord& r) {
    int q = 0;
    for (int i = 0; i < k; ++i) q += r.outcomes[i];
    return q;
  });
  detail::ProjectorData data;
  data.dim = k + 1;
  for (const auto& [dir, counts] : table) {
    const Eigen::MatrixXcd u_dag = dicke_rotation_matrix(k, rotation_to_z(dir.theta, dir.phi)).adjoint();
    for (const auto& [q, c] : counts) {
      data.vectors.push_back(u_dag.col(q));
      data.counts.push_back(c);
    }
  }
  data.distinct_projectors = static_cast<int>(table.size()) * (k + 1);
  return detail::run_rrr(data, DmBasis::kDicke, opts);
}

/// Maximum-likelihood state of k spins from site-resolved outcomes (first k
/// outcomes, first = most significant bit); projectors are k-fold tensor
/// products of rotated single-spin projectors.
inline TomoResult mle_full(const std::vector<ShotRecord>& records, int k, const TomoOptions& opts = {},
                           int cap = 4) {
  require(k >= 1, ErrorKind::kInvalidArgument, "k must be >= 1");
  require(k <= cap, ErrorKind::kSubsystemTooLarge, "k exceeds the full-tomography cap");
  const auto table = detail::tally(records, k, [k](const ShotRecord& r) {
    int x = 0;
    for (int i = 0; i < k; ++i) x = (x << 1) | r.outcomes[i];
    return x;
  });
  detail::ProjectorData data;
  data.dim = 1 << k;
  for (const auto& [dir, counts] : table) {
    const Eigen::MatrixXcd u_dag = dicke_rotation_matrix(1, rotation_to_z(dir.theta, dir.phi)).adjoint();
    for (const auto& [x, c] : counts) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
      for (int i = 0; i < k; ++i) {
        const Eigen::VectorXcd col = u_dag.col((x >> (k - 1 - i)) & 1);
        Eigen::VectorXcd next(v.size() * 2);
        for (Eigen::Index a = 0; a < v.size(); ++a) {
          next(2 * a) = v(a) * col(0);
          next(2 * a + 1) = v(a) * col(1);
        }
        v = std::move(next);
      }
      data.vectors.push_back(std::move(v));
      data.counts.push_back(c);
    }
  }
  data.distinct_projectors = static_cast<int>(table.size()) * (1 << k);
  return detail::run_rrr(data, DmBasis::kFull, opts);
}

/// Projects a k-qubit state onto the symmetric subspace (Dicke basis), with
/// the trace renormalized.
inline DensityMatrix project_symmetric(const DensityMatrix& full) {
  const int k = std::countr_zero(static_cast<unsigned>(full.dim()));
  const Eigen::MatrixXcd v = dicke_embedding(k);
  return {DmBasis::kDicke, normalized_hermitian(v.adjoint() * full.rho * v)};
}

struct EntropyScalingFit {
  double alpha = 0.0;
  double residual = 0.0;  ///< RMS
};

/// Least squares S_k = alpha ln(k+1) through the origin.
inline EntropyScalingFit fit_entropy_scaling(const std::vector<std::pair<int, double>>& points) {
  require(points.size() >= 2, ErrorKind::kDegenerateAbscissa, "need at least two points");
  double sxy = 0.0, sxx = 0.0;
  for (auto [k, s] : points) {
    require(k >= 1, ErrorKind::kDegenerateAbscissa, "subsystem sizes must be >= 1");
    const double x = std::log(k + 1.0);
    sxy += s * x;
    sxx += x * x;
  }
  EntropyScalingFit fit{sxy / sxx, 0.0};
  double r2 = 0.0;
  for (auto [k, s] : points) r2 += std::pow(s - fit.alpha * std::log(k + 1.0), 2);
  fit.residual = std::sqrt(r2 / double(points.size()));
  return fit;
}

}  // namespace dicke
