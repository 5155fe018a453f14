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

// Signed fixed-point codes in Z_N.
//
// A rational v is stored as raw = round(v * 2^scale) mod N. Codes in the upper
// half (raw > N/2) are negative. Rounding is half away from zero.

#pragma once

#include <gmpxx.h>

#include "pega/errors.hpp"

namespace pega::fixedpoint {

struct FixedCode {
  mpz_class raw;
  unsigned scale = 0;

  friend bool operator==(const FixedCode&, const FixedCode&) = default;
};

inline mpz_class pow2(unsigned e) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), 2, e);
  return out;
}

/// Nearest integer to q, ties away from zero.
inline mpz_class round_half_away(const mpq_class& q) {
  // floor((2|num| + den) / (2 den)) applied to the magnitude.
  mpz_class num = abs(q.get_num());
  const mpz_class& den = q.get_den();
  mpz_class out;
  mpz_class twice = 2 * num + den;
  mpz_class denom2 = 2 * den;
  mpz_fdiv_q(out.get_mpz_t(), twice.get_mpz_t(), denom2.get_mpz_t());
  return sgn(q) < 0 ? mpz_class(-out) : out;
}

/// Reduce a signed integer into [0, N).
inline mpz_class to_ring(const mpz_class& v, const mpz_class& modulus) {
  mpz_class out;
  mpz_mod(out.get_mpz_t(), v.get_mpz_t(), modulus.get_mpz_t());
  return out;
}

/// Signed reading of a ring element: raw if raw <= N/2, raw - N otherwise.
inline mpz_class to_signed(const mpz_class& raw, const mpz_class& modulus) {
  // N is odd, so raw <= N/2 is the same as 2 raw < N.
  return 2 * raw < modulus ? raw : mpz_class(raw - modulus);
}

/// Whether round(v * 2^scale) is unambiguously representable: |v| 2^scale < N/2.
inline bool representable(const mpq_class& value, unsigned scale, const mpz_class& modulus) {
  mpq_class scaled = abs(value) * mpq_class(pow2(scale + 1));
  return scaled < mpq_class(modulus);
}

inline FixedCode encode(const mpq_class& value, unsigned scale, const mpz_class& modulus) {
  if (!representable(value, scale, modulus)) {
    throw OverflowError("fixed-point value does not fit the plaintext modulus");
  }
  mpq_class scaled = value * mpq_class(pow2(scale));
  return FixedCode{to_ring(round_half_away(scaled), modulus), scale};
}

/// Integer convenience overload: raw = v * 2^scale.
inline FixedCode encode_integer(const mpz_class& value, unsigned scale, const mpz_class& modulus) {
  return encode(mpq_class(value), scale, modulus);
}

inline mpq_class decode(const FixedCode& code, const mpz_class& modulus) {
  mpq_class out(to_signed(code.raw, modulus), pow2(code.scale));
  out.canonicalize();
  return out;
}

/// round(2^scale / y), signed. The multiplier that turns x at scale s into
/// x / y at scale s + scale.
inline mpz_class reciprocal_code(const mpq_class& y, unsigned scale) {
  if (sgn(y) == 0) throw DivisionByZero("reciprocal of zero");
  mpq_class q = mpq_class(pow2(scale)) / y;
  return round_half_away(q);
}

}  // namespace pega::fixedpoint
