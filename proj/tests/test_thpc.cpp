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

#include <gtest/gtest.h>

#include "pega/errors.hpp"
#include "pega/thpc.hpp"
#include "support.hpp"

namespace thpc = pega::thpc;
namespace fp = pega::fixedpoint;
using pega::testing::keys;

namespace {

TEST(Thpc, KeyShapes) {
  for (unsigned kappa : {16u, 32u, 64u, 128u}) {
    const auto& km = keys(kappa);
    EXPECT_EQ(km.pk.modulus_bits(), 2 * kappa);
    EXPECT_EQ(km.pk.n_squared, km.pk.n * km.pk.n);
    // lambda * mu = 1 mod N
    EXPECT_EQ(mpz_class(km.sk.lambda * km.sk.mu % km.pk.n), 1);
    // The shares sum to lambda * mu modulo lambda * N.
    const mpz_class modulus = km.sk.lambda * km.pk.n;
    mpz_class sum = (km.s1.share + km.s2.share) % modulus;
    EXPECT_EQ(sum, mpz_class(km.sk.lambda * km.sk.mu % modulus));
    EXPECT_EQ(km.s1.index, 1);
    EXPECT_EQ(km.s2.index, 2);
  }
}

TEST(Thpc, SafePrimes) {
  pega::Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    const mpz_class p = thpc::generate_safe_prime(48, rng);
    EXPECT_EQ(mpz_sizeinbase(p.get_mpz_t(), 2), 48u);
    EXPECT_NE(mpz_probab_prime_p(p.get_mpz_t(), 30), 0);
    const mpz_class q = (p - 1) / 2;
    EXPECT_NE(mpz_probab_prime_p(q.get_mpz_t(), 30), 0);
  }
}

TEST(Thpc, KeygenIsDeterministicPerSeed) {
  pega::Rng a(77), b(77), c(78);
  EXPECT_EQ(thpc::keygen(32, a).pk.n, thpc::keygen(32, b).pk.n);
  pega::Rng d(77);
  EXPECT_NE(thpc::keygen(32, d).pk.n, thpc::keygen(32, c).pk.n);
}

TEST(Thpc, EncryptDecryptAndThresholdDecrypt) {
  const auto& km = keys(64);
  pega::Rng rng(5);
  for (long v : {0L, 1L, -1L, 123456789L, -987654321L}) {
    const auto code = fp::encode_integer(mpz_class(v), 0, km.pk.n);
    const auto ct = thpc::enc(km.pk, code, rng);
    EXPECT_EQ(thpc::dec(km.sk, ct), code);
    const auto m1 = thpc::pdec(km.s1, ct);
    const auto m2 = thpc::pdec(km.s2, ct);
    EXPECT_EQ(thpc::tdec(km.pk, m1, m2), code);
    EXPECT_EQ(thpc::tdec(km.pk, m2, m1), code);
  }
}

TEST(Thpc, EncryptionIsRandomized) {
  const auto& km = keys(32);
  pega::Rng rng(1);
  const auto code = fp::encode_integer(mpz_class(9), 0, km.pk.n);
  EXPECT_NE(thpc::enc(km.pk, code, rng).value, thpc::enc(km.pk, code, rng).value);
}

TEST(Thpc, HomomorphismsAgainstIntegerOracle) {
  const auto& km = keys(64);
  pega::Rng rng(8);
  const mpz_class bound = mpz_class(1) << 40;
  for (int i = 0; i < 200; ++i) {
    const mpz_class a = rng.random_below(bound) - bound / 2;
    const mpz_class b = rng.random_below(bound) - bound / 2;
    const mpz_class k = rng.random_below(mpz_class(1) << 20) - (mpz_class(1) << 19);
    const auto ca = thpc::enc(km.pk, fp::encode_integer(a, 0, km.pk.n), rng);
    const auto cb = thpc::enc(km.pk, fp::encode_integer(b, 0, km.pk.n), rng);
    auto value = [&](const thpc::Ciphertext& c) { return fp::decode(thpc::dec(km.sk, c), km.pk.n); };
    EXPECT_EQ(value(thpc::add(km.pk, ca, cb)), mpq_class(a + b));
    EXPECT_EQ(value(thpc::sub(km.pk, ca, cb)), mpq_class(a - b));
    EXPECT_EQ(value(thpc::negate(km.pk, ca)), mpq_class(-a));
    EXPECT_EQ(value(thpc::scalar_mul(km.pk, ca, fp::to_ring(k, km.pk.n))), mpq_class(a * k));
  }
}

TEST(Thpc, ScaleBookkeeping) {
  const auto& km = keys(64);
  pega::Rng rng(2);
  const auto a = thpc::enc(km.pk, fp::encode(mpq_class(3, 2), 4, km.pk.n), rng);
  const auto b = thpc::enc(km.pk, fp::encode(mpq_class(1, 4), 8, km.pk.n), rng);
  EXPECT_THROW(thpc::add(km.pk, a, b), pega::ScaleMismatch);
  // 1.5 * round(2^8 / 4) at scale 4 + 8 is 1.5 / 4.
  const auto q = thpc::scalar_mul(km.pk, a, fp::reciprocal_code(mpq_class(4), 8), 8);
  EXPECT_EQ(q.scale, 12u);
  EXPECT_EQ(fp::decode(thpc::dec(km.sk, q), km.pk.n), mpq_class(3, 8));
}

TEST(Thpc, SerializationRoundTrip) {
  const auto& km = keys(64);
  pega::Rng rng(4);
  EXPECT_EQ(thpc::parse_public_key(thpc::serialize(km.pk)), km.pk);
  const auto sk = thpc::parse_secret_key(thpc::serialize(km.sk));
  EXPECT_EQ(sk.lambda, km.sk.lambda);
  EXPECT_EQ(sk.mu, km.sk.mu);
  const auto s2 = thpc::parse_partial_key(thpc::serialize(km.s2));
  EXPECT_EQ(s2.index, 2);
  EXPECT_EQ(s2.share, km.s2.share);
  const auto ct = thpc::enc(km.pk, fp::encode_integer(mpz_class(-17), 9, km.pk.n), rng);
  const auto bytes = thpc::serialize(ct);
  EXPECT_EQ(bytes.size(), thpc::serialized_size(ct));
  const auto back = thpc::parse_ciphertext(bytes);
  EXPECT_EQ(back.value, ct.value);
  EXPECT_EQ(back.scale, 9u);
}

TEST(Thpc, MalformedInputsRejected) {
  const auto& km = keys(32);
  auto bytes = thpc::serialize(km.pk);
  bytes[0] = 0x02;  // version
  EXPECT_THROW(thpc::parse_public_key(bytes), pega::FormatError);
  auto truncated = thpc::serialize(km.pk);
  truncated.pop_back();
  EXPECT_THROW(thpc::parse_public_key(truncated), pega::FormatError);
  // A ciphertext sharing a factor with N cannot be decrypted.
  thpc::Ciphertext bad{km.pk.n, 0};
  EXPECT_THROW(thpc::dec(km.sk, bad), pega::MalformedCiphertext);
  thpc::Ciphertext out_of_range{km.pk.n_squared + 1, 0};
  EXPECT_THROW(thpc::pdec(km.s1, out_of_range), pega::MalformedCiphertext);
}

TEST(Thpc, FingerprintDependsOnKey) {
  EXPECT_NE(thpc::fingerprint(keys(32, 1).pk), thpc::fingerprint(keys(32, 2).pk));
  EXPECT_EQ(thpc::fingerprint(keys(32, 1).pk), thpc::fingerprint(keys(32, 1).pk));
}

}  // namespace
