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
#include <span>
#include <vector>

#include "dicke/units.hpp"

namespace dicke {

struct Triplet {
  std::size_t row;
  std::size_t col;
  complex_t value;
};

/// Compressed sparse row matrix of complex entries.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Builds from row-grouped entries: `rows[r]` lists (col, value) pairs of
  /// row r, in any order. Duplicate columns are summed.
  static CsrMatrix from_rows(std::size_t dim,
                             std::vector<std::vector<std::pair<std::size_t, complex_t>>>&& rows) {
    CsrMatrix m;
    m.dim_ = dim;
    m.row_ptr_.assign(dim + 1, 0);
    for (std::size_t r = 0; r < dim; ++r) {
      auto& row = rows[r];
      std::sort(row.begin(), row.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (!m.col_.empty() && m.row_ptr_[r] < m.col_.size() && m.col_.back() == row[k].first) {
          m.val_.back() += row[k].second;
        } else {
          m.col_.push_back(row[k].first);
          m.val_.push_back(row[k].second);
        }
      }
      m.row_ptr_[r + 1] = m.col_.size();
      std::vector<std::pair<std::size_t, complex_t>>().swap(row);
    }
    return m;
  }

  std::size_t dimension() const { return dim_; }
  std::size_t nonzeros() const { return val_.size(); }

  /// y = A x
  void multiply(std::span<const complex_t> x, std::span<complex_t> y) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      complex_t acc{0.0, 0.0};
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += val_[k] * x[col_[k]];
      y[r] = acc;
    }
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(val_.size());
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_[k], val_[k]});
    return out;
  }

  /// Entry lookup (binary search within the row); zero when absent.
  complex_t at(std::size_t r, std::size_t c) const {
    auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return {0.0, 0.0};
    return val_[static_cast<std::size_t>(it - col_.begin())];
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : val_) m = std::max(m, std::abs(v));
    return m;
  }

  /// max |A_rc - conj(A_cr)| over stored entries.
  double hermiticity_residual() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        worst = std::max(worst, std::abs(val_[k] - std::conj(at(col_[k], r))));
    return worst;
  }

  /// Gershgorin bound on the spectral radius.
  double norm_bound() const {
    double m = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(val_[k]);
      m = std::max(m, s);
    }
    return m;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  std::vector<complex_t> val_;
};

}  // namespace dicke
