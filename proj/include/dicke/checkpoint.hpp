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

// State checkpoint file, all integers and floats little-endian:
//
//   offset  size        field
//   0       4           magic "DKSV"
//   4       4  u32      format version (1)
//   8       4  u32      basis kind (0 = FULL, 1 = SUBENSEMBLE)
//   12      4  u32      n_max
//   16      4  u32      n_sites
//   20      4  u32      group count M (0 for FULL)
//   24      ...         per group: u32 size N_j, then N_j x u32 site index
//   ...     8  u64      dimension
//   ...     8  f64      time (s)
//   ...     16 x dim    amplitudes as (f64 re, f64 im) pairs
//   ...     4  u32      CRC-32 (zlib polynomial) of every preceding byte

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <zlib.h>

#include "dicke/error.hpp"
#include "dicke/state.hpp"

namespace dicke {

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    require(pos_ + sizeof(T) <= bytes_.size(), ErrorKind::kIOError, "checkpoint truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t n) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const StateVector& st) {
  detail::ByteWriter w;
  for (char c : {'D', 'K', 'S', 'V'}) w.put(c);
  w.put<std::uint32_t>(1);
  w.put<std::uint32_t>(st.basis.kind == BasisKind::kFull ? 0 : 1);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(st.basis.n_max));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(st.basis.n_sites));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(st.basis.group_sites.size()));
  for (const auto& g : st.basis.group_sites) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(g.size()));
    for (int s : g) w.put<std::uint32_t>(static_cast<std::uint32_t>(s));
  }
  w.put<std::uint64_t>(st.amplitudes.size());
  w.put<double>(st.time);
  for (const auto& a : st.amplitudes) {
    w.put<double>(a.real());
    w.put<double>(a.imag());
  }
  auto& bytes = w.bytes();
  const std::uint32_t crc = detail::crc32_of(bytes.data(), bytes.size());
  w.put<std::uint32_t>(crc);
  return std::move(bytes);
}

inline StateVector decode_checkpoint(const std::vector<unsigned char>& bytes) {
  require(bytes.size() >= 4 + 4, ErrorKind::kIOError, "checkpoint too short");
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  require(detail::crc32_of(bytes.data(), bytes.size() - 4) == stored, ErrorKind::kIOError,
          "checkpoint checksum mismatch");
  detail::ByteReader r(bytes);
  std::string magic;
  for (int i = 0; i < 4; ++i) magic.push_back(r.get<char>());
  require(magic == "DKSV", ErrorKind::kIOError, "not a state checkpoint");
  require(r.get<std::uint32_t>() == 1, ErrorKind::kIOError, "unsupported checkpoint version");
  const auto kind = r.get<std::uint32_t>();
  const auto n_max = static_cast<int>(r.get<std::uint32_t>());
  const auto n_sites = static_cast<int>(r.get<std::uint32_t>());
  const auto groups = r.get<std::uint32_t>();
  std::vector<std::vector<int>> sites(groups);
  for (auto& g : sites) {
    g.resize(r.get<std::uint32_t>());
    for (auto& s : g) s = static_cast<int>(r.get<std::uint32_t>());
  }
  StateVector st;
  st.basis = kind == 0 ? Basis::full(n_sites, n_max) : Basis::subensemble(std::move(sites), n_max);
  const auto dim = r.get<std::uint64_t>();
  require(dim == st.basis.dimension(), ErrorKind::kIOError, "checkpoint dimension does not match basis");
  st.time = r.get<double>();
  st.amplitudes.resize(dim);
  for (auto& a : st.amplitudes) {
    const double re = r.get<double>();
    const double im = r.get<double>();
    a = {re, im};
  }
  require(r.position() + 4 == bytes.size(), ErrorKind::kIOError, "trailing bytes in checkpoint");
  return st;
}

inline void save_checkpoint(const std::string& path, const StateVector& st) {
  const auto bytes = encode_checkpoint(st);
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::kIOError, "cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline StateVector load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::kIOError, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace dicke
