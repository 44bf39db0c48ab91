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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dicke/basis.hpp"
#include "dicke/error.hpp"
#include "dicke/sparse.hpp"
#include "dicke/units.hpp"

namespace dicke {

/// Per-site coupling data of the single-mode spin-boson Hamiltonian.
struct SiteCoupling {
  double omega = 0.0;  ///< light-shift Rabi rate, rad/s
  double b = 0.0;      ///< mode amplitude at the site
  double phi = 0.0;    ///< motional phase, rad in [0, 2pi)

  bool operator==(const SiteCoupling&) const = default;
};

/// H = eta sum_i b_i Omega_i (I + sz_i)(a e^{i phi_i} + a^dag e^{-i phi_i})
///     - delta a^dag a + B sum_i sx_i
struct ModelParams {
  double eta = 0.0;
  double delta = 0.0;    ///< laser detuning mu - omega_k, rad/s
  double b_field = 0.0;  ///< transverse field, rad/s
  std::vector<SiteCoupling> sites;
  int n_max = 0;

  int num_sites() const { return static_cast<int>(sites.size()); }

  /// eta * b_i * Omega_i, the real per-site coupling scale.
  double coupling(int i) const { return eta * sites[i].b * sites[i].omega; }

  complex_t complex_coupling(int i) const { return coupling(i) * std::polar(1.0, sites[i].phi); }

  void validate() const {
    require(!sites.empty(), ErrorKind::kInvalidArgument, "model needs at least one site");
    require(n_max >= 0, ErrorKind::kInvalidTruncation, "n_max must be >= 0");
    require(eta >= 0.0, ErrorKind::kInvalidArgument, "eta must be >= 0");
  }

  bool operator==(const ModelParams&) const = default;
};

struct SubensembleGroup {
  int n = 0;          ///< spin count N_j
  double g = 0.0;     ///< coupling eta*Omega_j, rad/s (mode amplitude 1/sqrt(N) factored out)
  double phi = 0.0;   ///< motional phase of the group
  std::vector<int> sites;  ///< parent-model site indices; may be empty for hand-built specs
};

/// M-group factorization:
///   H = (2/sqrt(N)) sum_j g_j S_z^j (a e^{i phi_j} + h.c.)
///     + (1/sqrt(N)) sum_j g_j N_j (a e^{i phi_j} + h.c.)
///     - delta a^dag a + 2B sum_j S_x^j
struct SubensembleSpec {
  std::vector<SubensembleGroup> groups;

  int num_groups() const { return static_cast<int>(groups.size()); }

  int total_spins() const {
    int n = 0;
    for (const auto& g : groups) n += g.n;
    return n;
  }

  void validate() const {
    require(!groups.empty(), ErrorKind::kInvalidArgument, "subensemble spec needs M >= 1");
    for (const auto& g : groups) {
      require(g.n >= 1, ErrorKind::kInvalidArgument, "every group needs n_j >= 1");
      require(g.sites.empty() || static_cast<int>(g.sites.size()) == g.n,
              ErrorKind::kInvalidArgument, "group site list does not match n_j");
    }
  }

  /// Site lists, filled contiguously for groups built without one.
  std::vector<std::vector<int>> resolved_sites() const {
    std::vector<std::vector<int>> out;
    int next = 0;
    for (const auto& g : groups) {
      if (!g.sites.empty()) {
        out.push_back(g.sites);
        next += g.n;
      } else {
        std::vector<int> s(g.n);
        std::iota(s.begin(), s.end(), next);
        next += g.n;
        out.push_back(std::move(s));
      }
    }
    return out;
  }
};

struct BuildOptions {
  std::size_t dimension_cap = std::size_t{1} << 22;
};

/// Immutable sparse Hamiltonian tagged with the basis it acts on.
class HamiltonianOperator {
 public:
  HamiltonianOperator(Basis basis, CsrMatrix matrix)
      : basis_(std::move(basis)), matrix_(std::move(matrix)) {}

  const Basis& basis() const { return basis_; }
  const CsrMatrix& matrix() const { return matrix_; }
  std::size_t dimension() const { return matrix_.dimension(); }
  std::vector<Triplet> triplets() const { return matrix_.triplets(); }

  void apply(std::span<const complex_t> x, std::span<complex_t> y) const { matrix_.multiply(x, y); }

 private:
  Basis basis_;
  CsrMatrix matrix_;
};

namespace detail {

inline void check_cap(std::size_t dim, const BuildOptions& opts) {
  require(dim <= opts.dimension_cap, ErrorKind::kDimensionCapExceeded,
          "dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(opts.dimension_cap));
}

// Adds f a + conj(f) a^dag - delta a^dag a on the Fock ladder of one spin row block.
inline void add_boson_block(std::vector<std::vector<std::pair<std::size_t, complex_t>>>& rows,
                            std::size_t base, int n_max, complex_t drive, double delta) {
  for (int n = 0; n <= n_max; ++n) {
    const std::size_t r = base + static_cast<std::size_t>(n);
    if (n != 0) rows[r].emplace_back(r, complex_t{-delta * n, 0.0});
    if (n > 0) rows[r].emplace_back(r - 1, std::conj(drive) * std::sqrt(double(n)));
    if (n < n_max) rows[r].emplace_back(r + 1, drive * std::sqrt(double(n + 1)));
  }
}

}  // namespace detail

/// Exact site-resolved Hamiltonian over 2^N spin states times n_max+1 Fock states.
inline HamiltonianOperator build_full_hamiltonian(const ModelParams& params,
                                                  const BuildOptions& opts = {}) {
  params.validate();
  const int n_sites = params.num_sites();
  require(n_sites < 63, ErrorKind::kDimensionCapExceeded, "too many sites for a full basis");
  Basis basis = Basis::full(n_sites, params.n_max);
  const std::size_t dim = basis.dimension();
  detail::check_cap(dim, opts);

  std::vector<complex_t> site_drive(n_sites);
  for (int i = 0; i < n_sites; ++i) site_drive[i] = params.complex_coupling(i);

  const std::size_t fock = basis.fock_dim();
  std::vector<std::vector<std::pair<std::size_t, complex_t>>> rows(dim);
  for (std::size_t s = 0; s < basis.spin_dim(); ++s) {
    // (I + sz_i) is 2 on |0> and 0 on |1>.
    complex_t drive{0.0, 0.0};
    for (int i = 0; i < n_sites; ++i)
      if ((s & basis.site_mask(i)) == 0) drive += 2.0 * site_drive[i];
    const std::size_t base = s * fock;
    detail::add_boson_block(rows, base, params.n_max, drive, params.delta);
    if (params.b_field != 0.0) {
      for (int i = 0; i < n_sites; ++i) {
        const std::size_t flipped = (s ^ basis.site_mask(i)) * fock;
        for (std::size_t n = 0; n < fock; ++n)
          rows[base + n].emplace_back(flipped + n, complex_t{params.b_field, 0.0});
      }
    }
  }
  return HamiltonianOperator(std::move(basis), CsrMatrix::from_rows(dim, std::move(rows)));
}

/// Hamiltonian on the tensor product of per-group Dicke ladders and the Fock
/// space. The spin-independent force is kept explicitly.
inline HamiltonianOperator build_subensemble_hamiltonian(const SubensembleSpec& spec, double delta,
                                                         double b_field, int n_max,
                                                         const BuildOptions& opts = {}) {
  spec.validate();
  require(n_max >= 0, ErrorKind::kInvalidTruncation, "n_max must be >= 0");
  Basis basis = Basis::subensemble(spec.resolved_sites(), n_max);
  const std::size_t dim = basis.dimension();
  detail::check_cap(dim, opts);

  const int m_groups = spec.num_groups();
  const double inv_sqrt_n = 1.0 / std::sqrt(double(spec.total_spins()));
  std::vector<complex_t> per_spin(m_groups);
  for (int j = 0; j < m_groups; ++j)
    per_spin[j] = spec.groups[j].g * inv_sqrt_n * std::polar(1.0, spec.groups[j].phi);

  const std::size_t fock = basis.fock_dim();
  std::vector<std::size_t> stride(m_groups);
  for (int j = 0; j < m_groups; ++j) stride[j] = basis.group_stride(j);

  std::vector<std::vector<std::pair<std::size_t, complex_t>>> rows(dim);
  for (std::size_t s = 0; s < basis.spin_dim(); ++s) {
    const std::vector<int> m = basis.decode_occupations(s);
    // 2 S_z^j + N_j = 2 (N_j - m_j)
    complex_t drive{0.0, 0.0};
    for (int j = 0; j < m_groups; ++j) drive += 2.0 * double(spec.groups[j].n - m[j]) * per_spin[j];
    const std::size_t base = s * fock;
    detail::add_boson_block(rows, base, n_max, drive, delta);
    if (b_field == 0.0) continue;
    for (int j = 0; j < m_groups; ++j) {
      const int nj = spec.groups[j].n;
      // 2B S_x couples m <-> m+1 with B sqrt((m+1)(N_j-m)).
      if (m[j] < nj) {
        const double amp = b_field * std::sqrt(double(m[j] + 1) * double(nj - m[j]));
        const std::size_t up = (s + stride[j]) * fock;
        for (std::size_t n = 0; n < fock; ++n) rows[base + n].emplace_back(up + n, complex_t{amp, 0.0});
      }
      if (m[j] > 0) {
        const double amp = b_field * std::sqrt(double(m[j]) * double(nj - m[j] + 1));
        const std::size_t down = (s - stride[j]) * fock;
        for (std::size_t n = 0; n < fock; ++n) rows[base + n].emplace_back(down + n, complex_t{amp, 0.0});
      }
    }
  }
  return HamiltonianOperator(std::move(basis), CsrMatrix::from_rows(dim, std::move(rows)));
}

/// One singleton group per site, reproducing the full model exactly.
inline SubensembleSpec singleton_subensembles(const ModelParams& params) {
  SubensembleSpec spec;
  const double sqrt_n = std::sqrt(double(params.num_sites()));
  for (int i = 0; i < params.num_sites(); ++i) {
    const complex_t c = params.complex_coupling(i);
    spec.groups.push_back({1, sqrt_n * std::abs(c), wrap_phase(std::arg(c)), {i}});
  }
  return spec;
}

namespace detail {

inline double cluster_cost(std::span<const complex_t> points, std::span<const int> members) {
  if (members.empty()) return 0.0;
  complex_t mean{0.0, 0.0};
  for (int i : members) mean += points[i];
  mean /= double(members.size());
  double cost = 0.0;
  for (int i : members) cost += std::norm(points[i] - mean);
  return cost;
}

// Optimal partition of `order` into k contiguous runs minimizing within-run
// squared distance. Returns run boundaries (k+1 entries).
inline std::vector<int> contiguous_partition(std::span<const complex_t> points,
                                             std::span<const int> order, int k) {
  const int n = static_cast<int>(order.size());
  // Prefix sums give O(1) run costs.
  std::vector<complex_t> ps(n + 1, 0.0);
  std::vector<double> ps2(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    ps[i + 1] = ps[i] + points[order[i]];
    ps2[i + 1] = ps2[i] + std::norm(points[order[i]]);
  }
  auto cost = [&](int a, int b) {  // run [a, b)
    const complex_t s = ps[b] - ps[a];
    return std::max(0.0, ps2[b] - ps2[a] - std::norm(s) / double(b - a));
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(n + 1, inf));
  std::vector<std::vector<int>> cut(k + 1, std::vector<int>(n + 1, 0));
  best[0][0] = 0.0;
  for (int c = 1; c <= k; ++c)
    for (int b = c; b <= n; ++b)
      for (int a = c - 1; a < b; ++a) {
        if (best[c - 1][a] == inf) continue;
        const double v = best[c - 1][a] + cost(a, b);
        if (v < best[c][b]) {
          best[c][b] = v;
          cut[c][b] = a;
        }
      }
  std::vector<int> bounds(k + 1);
  bounds[k] = n;
  for (int c = k; c > 0; --c) bounds[c - 1] = cut[c][bounds[c]];
  return bounds;
}

inline double assignment_cost(std::span<const complex_t> points, const std::vector<int>& label, int k) {
  std::vector<std::vector<int>> members(k);
  for (std::size_t i = 0; i < label.size(); ++i) members[label[i]].push_back(static_cast<int>(i));
  double c = 0.0;
  for (const auto& m : members) c += cluster_cost(points, m);
  return c;
}

// Lloyd iterations from a given labelling; never increases the cost.
inline std::vector<int> lloyd_refine(std::span<const complex_t> points, std::vector<int> label, int k,
                                     int max_iter) {
  const std::size_t n = points.size();
  std::vector<complex_t> centroid(k);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<complex_t> sum(k, 0.0);
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[label[i]] += points[i];
      ++count[label[i]];
    }
    for (int c = 0; c < k; ++c)
      if (count[c] > 0) centroid[c] = sum[c] / double(count[c]);
    bool changed = false;
    std::vector<int> next = label;
    for (std::size_t i = 0; i < n; ++i) {
      int best = label[i];
      double best_d = std::norm(points[i] - centroid[best]);
      for (int c = 0; c < k; ++c) {
        if (count[c] == 0) continue;
        const double d = std::norm(points[i] - centroid[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      // keep every cluster non-empty
      if (best != label[i] && count[label[i]] > 1) {
        --count[label[i]];
        ++count[best];
        next[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    label = std::move(next);
  }
  return label;
}

}  // namespace detail

/// Within-group sum of squared distances of eta*b_i*Omega_i*e^{i phi_i} to
/// the group centroid, for a spec built by group_into_subensembles.
inline double clustering_objective(const ModelParams& params, const SubensembleSpec& spec) {
  std::vector<complex_t> pts(params.num_sites());
  for (int i = 0; i < params.num_sites(); ++i) pts[i] = params.complex_coupling(i);
  double c = 0.0;
  for (const auto& g : spec.groups) c += detail::cluster_cost(pts, g.sites);
  return c;
}

/// Partitions sites into M groups by closeness of the complex couplings
/// c_i = eta b_i Omega_i e^{i phi_i}.
///
/// Sites are ordered by (phase, magnitude). For each M' = 1..M the optimal
/// contiguous partition of that order seeds Lloyd's iteration (100 sweeps);
/// so does the previous M'-1 solution with its costliest group split in two.
/// The cheaper result is kept, which makes the objective non-increasing in M.
/// Group g_j is sqrt(N) |centroid|, phi_j its phase; groups are reported in
/// (phase, magnitude) order of their centroids.
inline SubensembleSpec group_into_subensembles(std::span<const SiteCoupling> sites, double eta, int m) {
  require(!sites.empty(), ErrorKind::kEmptyInput, "no sites to group");
  const int n = static_cast<int>(sites.size());
  require(m >= 1 && m <= n, ErrorKind::kInvalidArgument, "need 1 <= M <= N");

  std::vector<complex_t> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = eta * sites[i].b * sites[i].omega * std::polar(1.0, sites[i].phi);

  auto key = [&](int i) {
    return std::pair{std::abs(pts[i]) == 0.0 ? 0.0 : wrap_phase(std::arg(pts[i])), std::abs(pts[i])};
  };
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

  constexpr int kLloydIterations = 100;
  std::vector<int> label(n, 0);
  for (int k = 2; k <= m; ++k) {
    // candidate A: contiguous optimum, refined
    const auto bounds = detail::contiguous_partition(pts, order, k);
    std::vector<int> a(n);
    for (int c = 0; c < k; ++c)
      for (int p = bounds[c]; p < bounds[c + 1]; ++p) a[order[p]] = c;
    a = detail::lloyd_refine(pts, a, k, kLloydIterations);

    // candidate B: previous solution with the costliest cluster split
    std::vector<std::vector<int>> members(k - 1);
    for (int i = 0; i < n; ++i) members[label[i]].push_back(i);
    int worst = -1;
    double worst_cost = -1.0;
    for (int c = 0; c < k - 1; ++c) {
      if (members[c].size() < 2) continue;
      const double cc = detail::cluster_cost(pts, members[c]);
      if (cc > worst_cost) {
        worst_cost = cc;
        worst = c;
      }
    }
    std::vector<int> b = label;
    if (worst >= 0) {
      std::vector<int> sub;
      for (int i : order)
        if (label[i] == worst) sub.push_back(i);
      const auto split = detail::contiguous_partition(pts, sub, 2);
      for (int p = split[1]; p < split[2]; ++p) b[sub[p]] = k - 1;
      b = detail::lloyd_refine(pts, b, k, kLloydIterations);
    }
    label = (worst >= 0 && detail::assignment_cost(pts, b, k) < detail::assignment_cost(pts, a, k)) ? b : a;
  }

  std::vector<std::vector<int>> members(m);
  for (int i = 0; i < n; ++i) members[label[i]].push_back(i);
  const double sqrt_n = std::sqrt(double(n));
  SubensembleSpec spec;
  for (auto& mem : members) {
    complex_t mean{0.0, 0.0};
    for (int i : mem) mean += pts[i];
    mean /= double(mem.size());
    const double phase = std::abs(mean) == 0.0 ? 0.0 : wrap_phase(std::arg(mean));
    spec.groups.push_back({static_cast<int>(mem.size()), sqrt_n * std::abs(mean), phase, mem});
  }
  std::stable_sort(spec.groups.begin(), spec.groups.end(), [](const auto& x, const auto& y) {
    return std::pair{x.phi, x.g} < std::pair{y.phi, y.g};
  });
  return spec;
}

/// How initial states and measured observables map under H -> -H*:
/// |+-x>, |+-z> are fixed and |+-y> -> |-+y>, so <sigma_y> changes sign.
struct BasisRelabel {
  bool flip_y = false;

  bool operator==(const BasisRelabel&) const = default;
};

struct SignNormalization {
  ModelParams params;
  BasisRelabel relabel;
  bool zero_detuning = false;  ///< warning: delta == 0, nothing to normalize
};

/// Parameters of -H*: delta -> -delta, phi_i -> pi - phi_i, B -> -B.
inline ModelParams conjugate_negate(const ModelParams& params) {
  ModelParams out = params;
  out.delta = -params.delta;
  out.b_field = -params.b_field;
  for (auto& s : out.sites) s.phi = wrap_phase(kPi - s.phi);
  return out;
}

/// Maps a delta < 0 model onto the equivalent delta > 0 model (complex
/// conjugate dynamics); delta >= 0 is returned unchanged.
inline SignNormalization normalize_sign(const ModelParams& params) {
  SignNormalization out{params, {}, params.delta == 0.0};
  if (params.delta < 0.0) {
    out.params = conjugate_negate(params);
    out.relabel.flip_y = true;
  }
  return out;
}

/// The laser phase shift of the echo's second half: phi -> phi + pi.
inline ModelParams shift_phases(const ModelParams& params, double shift) {
  ModelParams out = params;
  for (auto& s : out.sites) s.phi = wrap_phase(s.phi + shift);
  return out;
}

inline SubensembleSpec shift_phases(const SubensembleSpec& spec, double shift) {
  SubensembleSpec out = spec;
  for (auto& g : out.groups) g.phi = wrap_phase(g.phi + shift);
  return out;
}

}  // namespace dicke
