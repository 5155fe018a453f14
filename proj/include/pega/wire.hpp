// Copyright 2026 The pega-tsp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Big-endian byte encoding shared by keys, ciphertexts, protocol payloads and
// container files.
//
// Integer encoding (non-negative only):
//   u32 big-endian byte count L, then L bytes of the magnitude, big-endian,
//   with no leading zero byte. Zero is encoded as L = 0.

#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pega/errors.hpp"

namespace pega {

using Bytes = std::vector<std::uint8_t>;

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> data,
                             std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (auto b : data) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline Bytes magnitude_bytes(const mpz_class& v) {
  if (sgn(v) < 0) throw FormatError("cannot serialize a negative integer");
  if (sgn(v) == 0) return {};
  const std::size_t len = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  Bytes out(len);
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
  }
  void raw(std::span<const std::uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
  void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void integer(const mpz_class& v) {
    const Bytes mag = magnitude_bytes(v);
    u32(static_cast<std::uint32_t>(mag.size()));
    raw(mag);
  }

  const Bytes& bytes() const& noexcept { return buf_; }
  Bytes take() && { return std::move(buf_); }
  std::size_t size() const noexcept { return buf_.size(); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | u8();
    return v;
  }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  mpz_class integer() {
    const std::uint32_t len = u32();
    auto mag = raw(len);
    if (len > 0 && mag[0] == 0) throw FormatError("integer encoding is not minimal");
    mpz_class v = 0;
    if (len > 0) mpz_import(v.get_mpz_t(), len, 1, 1, 1, 0, mag.data());
    return v;
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool done() const noexcept { return pos_ == data_.size(); }
  void expect_done() const {
    if (!done()) throw FormatError("trailing bytes after message");
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError("truncated input");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace pega
