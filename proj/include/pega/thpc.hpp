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

// Threshold Paillier cryptosystem with a (2, 2) split of the decryption key.
//
//   N = p q with p = 2p' + 1, q = 2q' + 1 safe primes, g = N + 1
//   Enc(m)      = (1 + m N) r^N                mod N^2
//   Dec(c)      = L(c^lambda mod N^2) mu       mod N,   L(x) = (x - 1) / N
//   PDec_i(c)   = c^{lambda_i}                 mod N^2
//   TDec(M1,M2) = L(M1 M2 mod N^2)
//
// with lambda_1 + lambda_2 = 0 (mod lambda) and = 1 (mod N).
//
// Wire format (version byte 0x01, integers per wire.hpp):
//   Ciphertext   01 | u16 scale | int value
//   PublicKey    01 'P' | int N
//   SecretKey    01 'S' | int N | int lambda | int mu
//   PartialKey   01 'K' | u8 index | int N | int share

#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <span>

#include "pega/errors.hpp"
#include "pega/fixedpoint.hpp"
#include "pega/random.hpp"
#include "pega/wire.hpp"

namespace pega::thpc {

using fixedpoint::FixedCode;

inline constexpr std::uint8_t kWireVersion = 0x01;

struct PublicKey {
  mpz_class n;
  mpz_class n_squared;

  PublicKey() = default;
  explicit PublicKey(mpz_class modulus) : n(std::move(modulus)), n_squared(n * n) {}

  mpz_class g() const { return n + 1; }
  unsigned modulus_bits() const { return static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2)); }
  mpz_class half() const { return n / 2; }

  friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.n == b.n; }
};

struct SecretKey {
  mpz_class n;
  mpz_class lambda;
  mpz_class mu;

  friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

struct PartialKey {
  int index = 0;  // 1 for S1, 2 for S2
  mpz_class n;
  mpz_class share;

  friend bool operator==(const PartialKey&, const PartialKey&) = default;
};

struct Ciphertext {
  mpz_class value;
  unsigned scale = 0;

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

struct PartialDecryption {
  mpz_class value;
  unsigned scale = 0;
};

struct KeyMaterial {
  PublicKey pk;
  SecretKey sk;
  PartialKey s1;
  PartialKey s2;
};

namespace detail {

inline mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

inline constexpr std::array<unsigned, 53> kSmallPrimes = {
    3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,  59,  61,  67,
    71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157,
    163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251};

/// Reject candidates where p' or 2p' + 1 has a small factor.
inline bool sieve_passes(const mpz_class& half) {
  for (unsigned q : kSmallPrimes) {
    if (half <= q) break;
    const unsigned long r = mpz_fdiv_ui(half.get_mpz_t(), q);
    if (r == 0 || r == (q - 1) / 2) return false;
  }
  return true;
}

inline mpz_class l_function(const mpz_class& x, const mpz_class& n) {
  mpz_class numer = x - 1;
  if (!mpz_divisible_p(numer.get_mpz_t(), n.get_mpz_t())) {
    throw MalformedCiphertext("L(x) is not integral");
  }
  mpz_class out;
  mpz_divexact(out.get_mpz_t(), numer.get_mpz_t(), n.get_mpz_t());
  return out;
}

inline void check_ciphertext(const mpz_class& c, const mpz_class& n, const mpz_class& n_squared) {
  if (sgn(c) <= 0 || c >= n_squared) throw MalformedCiphertext("ciphertext outside Z_{N^2}");
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), c.get_mpz_t(), n.get_mpz_t());
  if (g != 1) throw MalformedCiphertext("ciphertext shares a factor with N");
}

}  // namespace detail

/// Safe prime p = 2p' + 1 with exactly `bits` bits. Primality by 64-round
/// probabilistic testing after a small-prime sieve on both p' and p.
inline mpz_class generate_safe_prime(unsigned bits, Rng& rng) {
  if (bits < 3) throw std::invalid_argument("safe prime needs at least 3 bits");
  for (;;) {
    mpz_class half = rng.random_bits(bits - 1);
    mpz_setbit(half.get_mpz_t(), bits - 2);
    mpz_setbit(half.get_mpz_t(), 0);
    if (!detail::sieve_passes(half)) continue;
    if (mpz_probab_prime_p(half.get_mpz_t(), 1) == 0) continue;
    mpz_class p = 2 * half + 1;
    if (mpz_probab_prime_p(p.get_mpz_t(), 1) == 0) continue;
    if (mpz_probab_prime_p(half.get_mpz_t(), 64) == 0) continue;
    if (mpz_probab_prime_p(p.get_mpz_t(), 64) == 0) continue;
    return p;
  }
}

/// Generates N of 2 kappa bits and splits lambda mu into two partial keys.
/// Sizes below 32 bits are only meant for exhaustive tests.
inline KeyMaterial keygen(unsigned kappa, Rng& rng) {
  if (kappa < 8) throw std::invalid_argument("keygen: kappa must be at least 8");
  for (;;) {
    mpz_class p = generate_safe_prime(kappa, rng);
    mpz_class q = generate_safe_prime(kappa, rng);
    if (p == q) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != 2 * kappa) continue;

    mpz_class lambda;
    mpz_class pm1 = p - 1;
    mpz_class qm1 = q - 1;
    mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
    mpz_class mu;
    if (mpz_invert(mu.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t()) == 0) continue;

    mpz_class lambda_n = lambda * n;
    mpz_class share1 = rng.random_between(1, lambda_n - 1);
    mpz_class share2 = fixedpoint::to_ring(lambda * mu - share1, lambda_n);

    KeyMaterial km{PublicKey(n), SecretKey{n, lambda, mu}, PartialKey{1, n, share1},
                   PartialKey{2, n, share2}};
    return km;
  }
}

/// Encrypt a raw ring element with explicit randomness r in Z_N^*.
inline Ciphertext enc_raw_with(const PublicKey& pk, const mpz_class& raw, unsigned scale,
                               const mpz_class& r) {
  mpz_class m = fixedpoint::to_ring(raw, pk.n);
  mpz_class c = (1 + m * pk.n) % pk.n_squared;
  c = (c * detail::powm(r, pk.n, pk.n_squared)) % pk.n_squared;
  return Ciphertext{std::move(c), scale};
}

inline mpz_class sample_unit(const PublicKey& pk, Rng& rng) {
  for (;;) {
    mpz_class r = rng.random_between(1, pk.n - 1);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
    if (g == 1) return r;
  }
}

inline Ciphertext enc(const PublicKey& pk, const FixedCode& m, Rng& rng) {
  if (m.raw >= pk.n || sgn(m.raw) < 0) throw OverflowError("plaintext outside Z_N");
  return enc_raw_with(pk, m.raw, m.scale, sample_unit(pk, rng));
}

/// Encrypt a signed integer already expressed at `scale` (reduced mod N).
inline Ciphertext enc_raw(const PublicKey& pk, const mpz_class& raw, unsigned scale, Rng& rng) {
  return enc_raw_with(pk, raw, scale, sample_unit(pk, rng));
}

inline FixedCode dec(const SecretKey& sk, const Ciphertext& ct) {
  mpz_class n_squared = sk.n * sk.n;
  detail::check_ciphertext(ct.value, sk.n, n_squared);
  mpz_class x = detail::powm(ct.value, sk.lambda, n_squared);
  mpz_class m = (detail::l_function(x, sk.n) * sk.mu) % sk.n;
  return FixedCode{std::move(m), ct.scale};
}

inline PartialDecryption pdec(const PartialKey& key, const Ciphertext& ct) {
  mpz_class n_squared = key.n * key.n;
  detail::check_ciphertext(ct.value, key.n, n_squared);
  return PartialDecryption{detail::powm(ct.value, key.share, n_squared), ct.scale};
}

inline FixedCode tdec(const PublicKey& pk, const PartialDecryption& m1, const PartialDecryption& m2) {
  if (m1.scale != m2.scale) throw ScaleMismatch("partial decryptions carry different scales");
  mpz_class x = (m1.value * m2.value) % pk.n_squared;
  mpz_class m = detail::l_function(x, pk.n);
  if (m >= pk.n) throw MalformedCiphertext("threshold decryption out of range");
  return FixedCode{std::move(m), m1.scale};
}

inline Ciphertext add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  if (a.scale != b.scale) throw ScaleMismatch("cannot add ciphertexts at different scales");
  return Ciphertext{(a.value * b.value) % pk.n_squared, a.scale};
}

/// c * m. The caller declares any scale carried by c through `scalar_scale`.
inline Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& a, const mpz_class& c,
                             unsigned scalar_scale = 0) {
  mpz_class e = fixedpoint::to_ring(c, pk.n);
  return Ciphertext{detail::powm(a.value, e, pk.n_squared), a.scale + scalar_scale};
}

/// Decrypts to N - m. Computed as the inverse in Z*_{N^2}.
inline Ciphertext negate(const PublicKey& pk, const Ciphertext& a) {
  mpz_class inv;
  if (mpz_invert(inv.get_mpz_t(), a.value.get_mpz_t(), pk.n_squared.get_mpz_t()) == 0) {
    throw MalformedCiphertext("ciphertext is not invertible");
  }
  return Ciphertext{std::move(inv), a.scale};
}

inline Ciphertext sub(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  return add(pk, a, negate(pk, b));
}

/// Encryption of zero with randomness 1. Identity for add.
inline Ciphertext identity(unsigned scale) { return Ciphertext{1, scale}; }

// ---- serialization ---------------------------------------------------------

inline void write(ByteWriter& w, const Ciphertext& ct) {
  w.u8(kWireVersion);
  w.u16(static_cast<std::uint16_t>(ct.scale));
  w.integer(ct.value);
}

inline Ciphertext read_ciphertext(ByteReader& r) {
  if (r.u8() != kWireVersion) throw FormatError("unknown ciphertext version");
  Ciphertext ct;
  ct.scale = r.u16();
  ct.value = r.integer();
  return ct;
}

inline std::size_t serialized_size(const Ciphertext& ct) {
  return 1 + 2 + 4 + magnitude_bytes(ct.value).size();
}

inline Bytes serialize(const PublicKey& pk) {
  ByteWriter w;
  w.u8(kWireVersion);
  w.u8('P');
  w.integer(pk.n);
  return std::move(w).take();
}

inline Bytes serialize(const SecretKey& sk) {
  ByteWriter w;
  w.u8(kWireVersion);
  w.u8('S');
  w.integer(sk.n);
  w.integer(sk.lambda);
  w.integer(sk.mu);
  return std::move(w).take();
}

inline Bytes serialize(const PartialKey& key) {
  ByteWriter w;
  w.u8(kWireVersion);
  w.u8('K');
  w.u8(static_cast<std::uint8_t>(key.index));
  w.integer(key.n);
  w.integer(key.share);
  return std::move(w).take();
}

inline Bytes serialize(const Ciphertext& ct) {
  ByteWriter w;
  write(w, ct);
  return std::move(w).take();
}

namespace detail {
inline void expect_header(ByteReader& r, char kind) {
  if (r.u8() != kWireVersion) throw FormatError("unknown key version");
  if (r.u8() != static_cast<std::uint8_t>(kind)) throw FormatError("unexpected key kind");
}
}  // namespace detail

inline PublicKey parse_public_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  detail::expect_header(r, 'P');
  PublicKey pk(r.integer());
  r.expect_done();
  return pk;
}

inline SecretKey parse_secret_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  detail::expect_header(r, 'S');
  SecretKey sk;
  sk.n = r.integer();
  sk.lambda = r.integer();
  sk.mu = r.integer();
  r.expect_done();
  return sk;
}

inline PartialKey parse_partial_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  detail::expect_header(r, 'K');
  PartialKey key;
  key.index = r.u8();
  if (key.index != 1 && key.index != 2) throw FormatError("partial key index must be 1 or 2");
  key.n = r.integer();
  key.share = r.integer();
  r.expect_done();
  return key;
}

inline Ciphertext parse_ciphertext(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Ciphertext ct = read_ciphertext(r);
  r.expect_done();
  return ct;
}

/// FNV-1a over the serialized public key.
inline std::uint64_t fingerprint(const PublicKey& pk) { return fnv1a64(serialize(pk)); }

}  // namespace pega::thpc
