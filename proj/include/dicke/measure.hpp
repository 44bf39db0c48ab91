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
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/density_matrix.hpp"
#include "dicke/error.hpp"
#include "dicke/rng.hpp"
#include "dicke/rotation.hpp"
#include "dicke/state.hpp"
#include "dicke/units.hpp"

namespace dicke {

struct ObservableSeries {
  std::vector<double> times;  ///< s
  std::vector<double> values;
  std::string label;
};

namespace detail {

// (<sx>, <sy>, <sz>) of one site in the FULL basis.
inline std::array<double, 3> site_bloch_full(const StateVector& st, int site) {
  const Basis& b = st.basis;
  const std::size_t fock = b.fock_dim();
  const std::uint64_t mask = b.site_mask(site);
  double sz = 0.0;
  complex_t cross{0.0, 0.0};  // sum conj(psi_0) psi_1
  for (std::size_t s = 0; s < b.spin_dim(); ++s) {
    const bool one = (s & mask) != 0;
    for (std::size_t n = 0; n < fock; ++n) {
      const complex_t a = st.amplitudes[s * fock + n];
      sz += one ? -std::norm(a) : std::norm(a);
      if (!one) cross += std::conj(a) * st.amplitudes[(s | mask) * fock + n];
    }
  }
  return {2.0 * cross.real(), 2.0 * cross.imag(), sz};
}

// (<Sx>, <Sy>, <Sz>) of group j in the SUBENSEMBLE basis.
inline std::array<double, 3> group_spin(const StateVector& st, int j) {
  const Basis& b = st.basis;
  const std::size_t fock = b.fock_dim();
  const int nj = b.group_size(j);
  const std::size_t stride = b.group_stride(j);
  double sz = 0.0;
  complex_t lower{0.0, 0.0};  // <S_->, S_- takes m -> m+1
  for (std::size_t s = 0; s < b.spin_dim(); ++s) {
    const int m = static_cast<int>((s / stride) % (nj + 1));
    for (std::size_t n = 0; n < fock; ++n) {
      const complex_t a = st.amplitudes[s * fock + n];
      sz += (0.5 * nj - m) * std::norm(a);
      if (m < nj)
        lower += std::conj(st.amplitudes[(s + stride) * fock + n]) * a *
                 std::sqrt(double(m + 1) * double(nj - m));
    }
  }
  return {lower.real(), -lower.imag(), sz};
}

inline int axis_index(Axis a) { return a == Axis::kX ? 0 : (a == Axis::kY ? 1 : 2); }

}  // namespace detail

/// <sigma_axis> of one site, or the ensemble average when `site` is empty
/// (groups weighted by N_j / N). In the SUBENSEMBLE basis every site of a
/// group carries the group value.
inline double expect_pauli(const StateVector& st, Axis axis, std::optional<int> site = std::nullopt) {
  const Basis& b = st.basis;
  const int k = detail::axis_index(axis);
  if (site) {
    require(*site >= 0 && *site < b.n_sites, ErrorKind::kSiteOutOfRange, "site " + std::to_string(*site));
    if (b.kind == BasisKind::kFull) return detail::site_bloch_full(st, *site)[k];
    const int j = b.group_of_site(*site);
    return 2.0 * detail::group_spin(st, j)[k] / b.group_size(j);
  }
  double total = 0.0;
  if (b.kind == BasisKind::kFull) {
    for (int i = 0; i < b.n_sites; ++i) total += detail::site_bloch_full(st, i)[k];
  } else {
    for (int j = 0; j < b.num_groups(); ++j) total += 2.0 * detail::group_spin(st, j)[k];
  }
  return total / b.n_sites;
}

/// Running mean (1/t) int_0^t v dt' by the trapezoid rule; the t = 0 entry is
/// the instantaneous value.
inline ObservableSeries cumulative_time_average(const ObservableSeries& series) {
  require(!series.times.empty(), ErrorKind::kEmptySeries, "empty series");
  require(series.times.size() == series.values.size(), ErrorKind::kInvalidArgument, "times/values length");
  require(series.times.front() == 0.0, ErrorKind::kInvalidArgument, "series must start at t = 0");
  ObservableSeries out{series.times, std::vector<double>(series.values.size()), series.label};
  out.values[0] = series.values[0];
  double integral = 0.0;
  for (std::size_t i = 1; i < series.times.size(); ++i) {
    const double dt = series.times[i] - series.times[i - 1];
    require(dt > 0.0, ErrorKind::kInvalidArgument, "times must be strictly increasing");
    integral += 0.5 * dt * (series.values[i] + series.values[i - 1]);
    out.values[i] = integral / series.times[i];
  }
  return out;
}

/// Distribution of the total spin component along one axis. Entry m holds
/// the probability of eigenvalue N/2 - m.
struct SpinHistogram {
  Axis axis = Axis::kZ;
  int n_spins = 0;
  std::vector<double> probabilities;

  double bin_value(int m) const { return 0.5 * n_spins - m; }
  double total() const { return std::accumulate(probabilities.begin(), probabilities.end(), 0.0); }
  double max_probability() const { return *std::max_element(probabilities.begin(), probabilities.end()); }
};

/// Total excitation count of a basis spin index.
inline int total_excitations(const Basis& b, std::size_t spin_index) {
  if (b.kind == BasisKind::kFull) return std::popcount(static_cast<std::uint64_t>(spin_index));
  const auto m = b.decode_occupations(spin_index);
  return std::accumulate(m.begin(), m.end(), 0);
}

/// Rotates `axis` onto z with the global rotation and marginalizes the joint
/// excitation distribution onto m = sum_j m_j.
inline SpinHistogram total_spin_distribution(const StateVector& st, Axis axis) {
  StateVector rotated = st;
  apply_global_rotation(rotated, rotation_to_z(axis));
  const Basis& b = st.basis;
  SpinHistogram h{axis, b.n_sites, std::vector<double>(b.n_sites + 1, 0.0)};
  const std::size_t fock = b.fock_dim();
  for (std::size_t s = 0; s < b.spin_dim(); ++s) {
    double p = 0.0;
    for (std::size_t n = 0; n < fock; ++n) p += std::norm(rotated.amplitudes[s * fock + n]);
    h.probabilities[total_excitations(b, s)] += p;
  }
  return h;
}

/// Bin-wise arithmetic mean.
inline SpinHistogram time_averaged_distribution(const std::vector<SpinHistogram>& hists) {
  require(!hists.empty(), ErrorKind::kEmptyInput, "no histograms");
  SpinHistogram out{hists[0].axis, hists[0].n_spins, std::vector<double>(hists[0].probabilities.size(), 0.0)};
  for (const auto& h : hists) {
    require(h.axis == out.axis, ErrorKind::kMixedAxes, "histograms along different axes");
    require(h.n_spins == out.n_spins, ErrorKind::kInvalidArgument, "histograms for different N");
    for (std::size_t m = 0; m < h.probabilities.size(); ++m) out.probabilities[m] += h.probabilities[m];
  }
  for (auto& p : out.probabilities) p /= double(hists.size());
  return out;
}

/// A point on the Bloch sphere.
struct BlochDirection {
  double theta = 0.0;
  double phi = 0.0;

  std::array<double, 3> vector() const {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
  }
};

/// i.i.d. uniform directions: z = 2u - 1, phi = 2 pi v.
inline std::vector<BlochDirection> random_directions(int count, std::uint64_t seed) {
  require(count >= 1, ErrorKind::kInvalidArgument, "need K >= 1 directions");
  Rng rng(seed);
  std::vector<BlochDirection> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double phi = kTwoPi * uniform01(rng);
    out.push_back({std::acos(std::clamp(z, -1.0, 1.0)), phi});
  }
  return out;
}

/// One single-shot measurement along a Bloch direction. Outcome bit 0 means
/// the spin was found along +direction (sigma_z = +1 after rotation).
struct ShotRecord {
  BlochDirection direction;
  std::vector<int> sites;
  std::vector<std::uint8_t> outcomes;
  long shot_index = 0;
  std::uint64_t rng_seed = 0;  ///< seed of the direction's sampling stream
};

/// Samples single-shot site-resolved outcomes. Direction d draws from the
/// stream derive_seed(seed, d). Each shot is one categorical draw over the
/// rotated |amplitude|^2; in the SUBENSEMBLE basis an m_j-excitation Dicke
/// component is expanded to a uniformly random weight-m_j bitstring over the
/// group's sites.
inline std::vector<ShotRecord> sample_shots(const StateVector& st, const std::vector<BlochDirection>& directions,
                                            int shots_per_direction, const std::vector<int>& sites,
                                            std::uint64_t seed) {
  require(!sites.empty(), ErrorKind::kEmptySelection, "no sites selected");
  const Basis& b = st.basis;
  for (int s : sites)
    require(s >= 0 && s < b.n_sites, ErrorKind::kSiteOutOfRange, "site " + std::to_string(s));
  const std::size_t fock = b.fock_dim();
  std::vector<ShotRecord> out;
  out.reserve(directions.size() * static_cast<std::size_t>(std::max(0, shots_per_direction)));
  std::vector<double> cumulative(b.dimension());
  std::vector<std::uint8_t> bits(b.n_sites);
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const std::uint64_t stream = derive_seed(seed, d);
    Rng rng(stream);
    StateVector rotated = st;
    apply_global_rotation(rotated, rotation_to_z(directions[d].theta, directions[d].phi));
    double acc = 0.0;
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      acc += std::norm(rotated.amplitudes[i]);
      cumulative[i] = acc;
    }
    for (int shot = 0; shot < shots_per_direction; ++shot) {
      const double u = uniform01(rng) * acc;
      std::size_t idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                 cumulative.begin());
      idx = std::min(idx, cumulative.size() - 1);
      const std::size_t s = idx / fock;
      if (b.kind == BasisKind::kFull) {
        for (int i = 0; i < b.n_sites; ++i) bits[i] = (s & b.site_mask(i)) ? 1 : 0;
      } else {
        const auto m = b.decode_occupations(s);
        for (int j = 0; j < b.num_groups(); ++j) {
          std::vector<int> pool = b.group_sites[j];
          for (int site : pool) bits[site] = 0;
          // partial Fisher-Yates: first m_j entries become the excited sites
          for (int e = 0; e < m[j]; ++e) {
            const auto pick = e + static_cast<int>(uniform_index(rng, pool.size() - e));
            std::swap(pool[e], pool[pick]);
            bits[pool[e]] = 1;
          }
        }
      }
      ShotRecord rec{directions[d], sites, {}, shot, stream};
      rec.outcomes.reserve(sites.size());
      for (int site : sites) rec.outcomes.push_back(bits[site]);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

namespace detail {

// sqrt(C(k,q) C(N-k, m-q) / C(N,m)): overlap of |N, m> with |k, q> |N-k, m-q>.
inline double dicke_split_weight(int n, int k, int m, int q) {
  return std::sqrt(binomial(k, q) * binomial(n - k, m - q) / binomial(n, m));
}

}  // namespace detail

/// Joint reduced state of k_j spins from each selected group, in the product
/// of symmetric bases (first selection most significant), tracing all other
/// spins and the boson.
inline Eigen::MatrixXcd reduced_dm_groups(const StateVector& st, const std::vector<std::pair<int, int>>& selection) {
  const Basis& b = st.basis;
  require(b.kind == BasisKind::kSubensemble, ErrorKind::kBasisMismatch, "needs a SUBENSEMBLE state");
  const int ng = b.num_groups();
  std::vector<int> take(ng, 0);
  std::vector<int> order;
  for (auto [j, k] : selection) {
    require(j >= 0 && j < ng, ErrorKind::kIndexOutOfRange, "group index");
    require(k >= 0 && k <= b.group_size(j), ErrorKind::kSubsystemTooLarge, "k exceeds group size");
    require(take[j] == 0, ErrorKind::kInvalidArgument, "group selected twice");
    take[j] = k;
    order.push_back(j);
  }
  std::size_t qdim = 1;
  for (int j : order) qdim *= take[j] + 1;
  // rest digits: (N_j - k_j + 1) per group, then the Fock index
  std::vector<std::size_t> rest_radix(ng);
  std::size_t rest_dim = b.fock_dim();
  for (int j = 0; j < ng; ++j) {
    rest_radix[j] = b.group_size(j) - take[j] + 1;
    rest_dim *= rest_radix[j];
  }
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rest_dim), static_cast<Eigen::Index>(qdim));
  const std::size_t fock = b.fock_dim();
  std::vector<int> q(ng, 0);
  for (std::size_t s = 0; s < b.spin_dim(); ++s) {
    const auto m = b.decode_occupations(s);
    // enumerate splits m_j = q_j + r_j over the selected groups
    std::vector<int> lo(ng), hi(ng);
    bool feasible = true;
    for (int j : order) {
      lo[j] = std::max(0, m[j] - (b.group_size(j) - take[j]));
      hi[j] = std::min(take[j], m[j]);
      if (lo[j] > hi[j]) feasible = false;
      q[j] = lo[j];
    }
    if (!feasible) continue;
    for (;;) {
      double w = 1.0;
      std::size_t qi = 0, rest = 0;
      for (int j : order) {
        w *= detail::dicke_split_weight(b.group_size(j), take[j], m[j], q[j]);
        qi = qi * (take[j] + 1) + q[j];
      }
      for (int j = 0; j < ng; ++j) rest = rest * rest_radix[j] + (m[j] - q[j]);
      for (std::size_t n = 0; n < fock; ++n)
        a(static_cast<Eigen::Index>(rest * fock + n), static_cast<Eigen::Index>(qi)) = w * st.amplitudes[s * fock + n];
      // odometer over q
      int pos = static_cast<int>(order.size()) - 1;
      while (pos >= 0 && q[order[pos]] == hi[order[pos]]) {
        q[order[pos]] = lo[order[pos]];
        --pos;
      }
      if (pos < 0) break;
      ++q[order[pos]];
    }
  }
  return a.transpose() * a.conjugate();
}

/// Reduced state of k spins of group j in the (k+1)-dimensional Dicke basis.
inline DensityMatrix reduced_dm_symmetric(const StateVector& st, int group, int k) {
  require(st.basis.kind == BasisKind::kSubensemble, ErrorKind::kBasisMismatch, "needs a SUBENSEMBLE state");
  require(group >= 0 && group < st.basis.num_groups(), ErrorKind::kIndexOutOfRange, "group index");
  require(k >= 0 && k <= st.basis.group_size(group), ErrorKind::kSubsystemTooLarge, "k exceeds group size");
  return {DmBasis::kDicke, reduced_dm_groups(st, {{group, k}})};
}

/// Isometry from the Dicke basis of k qubits into the 2^k computational basis.
inline Eigen::MatrixXcd dicke_embedding(int k) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(Eigen::Index{1} << k, k + 1);
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << k); ++x) {
    const int q = std::popcount(x);
    v(static_cast<Eigen::Index>(x), q) = 1.0 / std::sqrt(binomial(k, q));
  }
  return v;
}

/// Exact reduced state of the listed sites (first listed = most significant
/// bit). SUBENSEMBLE states are lifted by exchangeability: within a group the
/// selected spins occupy the symmetric embedding of their Dicke-basis state.
inline DensityMatrix reduced_dm_full(const StateVector& st, const std::vector<int>& sites, int cap = 4) {
  const Basis& b = st.basis;
  const int k = static_cast<int>(sites.size());
  require(k >= 1, ErrorKind::kEmptySelection, "no sites selected");
  require(k <= cap, ErrorKind::kSubsystemTooLarge, "more sites than the reduced_dm_full cap");
  for (int s : sites) require(s >= 0 && s < b.n_sites, ErrorKind::kSiteOutOfRange, "site " + std::to_string(s));
  for (int i = 0; i < k; ++i)
    for (int l = i + 1; l < k; ++l)
      require(sites[i] != sites[l], ErrorKind::kInvalidArgument, "duplicate site");
  const std::size_t fock = b.fock_dim();

  if (b.kind == BasisKind::kFull) {
    const std::size_t rest_dim = (b.spin_dim() >> k) * fock;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rest_dim), Eigen::Index{1} << k);
    std::uint64_t sel_mask = 0;
    for (int s : sites) sel_mask |= b.site_mask(s);
    for (std::size_t s = 0; s < b.spin_dim(); ++s) {
      std::uint64_t x = 0;
      for (int s2 : sites) x = (x << 1) | ((s & b.site_mask(s2)) ? 1 : 0);
      // compress the unselected bits into the rest index
      std::uint64_t rest = 0;
      for (int i = 0; i < b.n_sites; ++i) {
        const std::uint64_t mk = b.site_mask(i);
        if (sel_mask & mk) continue;
        rest = (rest << 1) | ((s & mk) ? 1 : 0);
      }
      for (std::size_t n = 0; n < fock; ++n)
        a(static_cast<Eigen::Index>(rest * fock + n), static_cast<Eigen::Index>(x)) = st.amplitudes[s * fock + n];
    }
    return {DmBasis::kFull, a.transpose() * a.conjugate()};
  }

  // group the selected sites in order of first appearance
  std::vector<int> groups;
  std::vector<int> per_group(b.num_groups(), 0);
  std::vector<int> site_group(k);
  for (int i = 0; i < k; ++i) {
    const int j = b.group_of_site(sites[i]);
    site_group[i] = j;
    if (per_group[j]++ == 0) groups.push_back(j);
  }
  std::vector<std::pair<int, int>> selection;
  for (int j : groups) selection.emplace_back(j, per_group[j]);
  const Eigen::MatrixXcd sym = reduced_dm_groups(st, selection);

  // lift: bitstring x -> product of per-group Dicke amplitudes
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(Eigen::Index{1} << k, sym.rows());
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << k); ++x) {
    std::vector<int> q(b.num_groups(), 0);
    for (int i = 0; i < k; ++i)
      if ((x >> (k - 1 - i)) & 1U) ++q[site_group[i]];
    std::size_t qi = 0;
    double amp = 1.0;
    for (int j : groups) {
      qi = qi * (per_group[j] + 1) + q[j];
      amp /= std::sqrt(binomial(per_group[j], q[j]));
    }
    v(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(qi)) = amp;
  }
  return {DmBasis::kFull, v * sym * v.adjoint()};
}

/// Reduced state of the boson mode.
inline DensityMatrix reduced_dm_boson(const StateVector& st) {
  const std::size_t fock = st.basis.fock_dim();
  const std::size_t spin = st.basis.spin_dim();
  Eigen::Map<const Eigen::MatrixXcd> a(st.amplitudes.data(), static_cast<Eigen::Index>(fock),
                                       static_cast<Eigen::Index>(spin));
  // column-major map: a(n, s) = psi[s * fock + n]
  return {DmBasis::kFull, a * a.adjoint()};
}

/// Population outside the permutation-symmetric spin subspace (FULL basis;
/// a single-group SUBENSEMBLE state has none by construction).
inline double symmetric_leakage(const StateVector& st) {
  const Basis& b = st.basis;
  if (b.kind == BasisKind::kSubensemble) {
    require(b.num_groups() == 1, ErrorKind::kBasisMismatch, "leakage needs a FULL or single-group state");
    return 0.0;
  }
  const std::size_t fock = b.fock_dim();
  std::vector<complex_t> overlap((b.n_sites + 1) * fock, 0.0);
  for (std::size_t s = 0; s < b.spin_dim(); ++s) {
    const int m = std::popcount(static_cast<std::uint64_t>(s));
    for (std::size_t n = 0; n < fock; ++n) overlap[m * fock + n] += st.amplitudes[s * fock + n];
  }
  double inside = 0.0;
  for (int m = 0; m <= b.n_sites; ++m)
    for (std::size_t n = 0; n < fock; ++n) inside += std::norm(overlap[m * fock + n]) / binomial(b.n_sites, m);
  double total = 0.0;
  for (const auto& a : st.amplitudes) total += std::norm(a);
  return std::max(0.0, total - inside);
}

}  // namespace dicke
