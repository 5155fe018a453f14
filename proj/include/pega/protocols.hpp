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

// Two-server protocols over threshold Paillier ciphertexts.
//
// S1 drives every protocol through S1Client. S2 runs S2Helper::serve, which
// answers one request frame with one reply frame:
//
//   request          payload                       reply
//   CMP_BLIND        ct Delta | int [Delta]_1      CMP_RESULT      u8 u
//   DIV_REQ          ct y | int [y]_1              DIV_SCALAR      int round(2^l / y) mod N
//   PRO_SUM          ct sum | int [sum]_1          PRO_SCALAR      int round(2^2l / sum) mod N
//   FPS_REQ          u32 n                         FPS_THRESHOLDS  u32 n | n x ct
//   SHUTDOWN         (empty)                       (none)
//
// A request S2 cannot serve is answered with ABORT (u8 code | u32 len | text).

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "pega/channel.hpp"
#include "pega/errors.hpp"
#include "pega/fixedpoint.hpp"
#include "pega/random.hpp"
#include "pega/selection.hpp"
#include "pega/thpc.hpp"

namespace pega::protocols {

using channel::Channel;
using channel::Frame;
using channel::FrameType;
using thpc::Ciphertext;

struct ProtocolParams {
  unsigned precision = 106;  // fixed-point scale l of reciprocals and probabilities
  unsigned sigma = 128;      // bit length bound of the multiplicative blind r1
};

/// Blinding state of one comparison, held by S1.
///
/// With H = floor(N/2):
///   r1 in [1, 2^sigma_eff], 2^sigma_eff (Dmax + 1) <= H
///   r2 in (max(H - r1, r1 Dmax), H]
/// so the value S2 decrypts never wraps modulo N and exceeds N/2 exactly when
/// the blinded difference is non-negative.
struct CmpSession {
  int pi = 0;
  mpz_class r1;
  mpz_class r2;
  unsigned sigma = 0;
};

/// Largest sigma' <= sigma with 2^sigma' (dmax + 1) < N/2.
inline unsigned effective_sigma(const mpz_class& n, const mpz_class& dmax, unsigned sigma) {
  if (sgn(dmax) < 0) throw std::invalid_argument("difference bound must be non-negative");
  const mpz_class half = n / 2;
  const mpz_class ratio = half / (dmax + 1);
  if (sgn(ratio) == 0) throw OverflowError("comparison bound does not fit the modulus");
  const auto room = static_cast<unsigned>(mpz_sizeinbase(ratio.get_mpz_t(), 2)) - 1;
  return std::min(sigma, room);
}

inline CmpSession sample_cmp_session(const mpz_class& n, const mpz_class& dmax, unsigned sigma,
                                     Rng& rng, std::optional<int> force_pi = std::nullopt) {
  CmpSession s;
  s.sigma = effective_sigma(n, dmax, sigma);
  s.pi = force_pi ? (*force_pi & 1) : rng.coin();
  const mpz_class half = n / 2;
  s.r1 = rng.random_between(1, fixedpoint::pow2(s.sigma));
  mpz_class lower = std::max(mpz_class(half - s.r1), mpz_class(s.r1 * dmax));
  s.r2 = rng.random_between(lower + 1, half);
  return s;
}

// ---- S2 ----------------------------------------------------------------------

/// The assisting server. Holds the second key share and the randomness for
/// roulette thresholds. Never sees a tour or a plaintext the protocols do not
/// deliberately reveal to it.
class S2Helper {
 public:
  S2Helper(thpc::PublicKey pk, thpc::PartialKey key, ProtocolParams params,
           std::uint64_t threshold_seed, std::uint64_t crypto_seed)
      : pk_(std::move(pk)),
        key_(std::move(key)),
        params_(params),
        thresholds_(threshold_seed),
        crypto_(crypto_seed) {
    if (key_.index != 2) throw std::invalid_argument("S2 must hold partial key 2");
  }

  /// Serve requests until SHUTDOWN. A closed channel also ends the loop.
  void serve(Channel& ch) {
    try {
      for (;;) {
        Frame f = ch.recv();
        if (!handle(f, ch)) return;
      }
    } catch (const ChannelClosed&) {
    }
  }

  /// Answer one frame. Returns false on SHUTDOWN.
  bool handle(const Frame& f, Channel& ch) {
    received_.push_back(f.type);
    switch (f.type) {
      case FrameType::CmpBlind: on_cmp(f, ch); return true;
      case FrameType::DivReq: on_div(f, ch); return true;
      case FrameType::ProSum: on_pro(f, ch); return true;
      case FrameType::FpsReq: on_fps(f, ch); return true;
      case FrameType::Shutdown: return false;
      default:
        ch.send(FrameType::Abort, channel::abort_payload(channel::AbortCode::Protocol,
                                                          "unexpected frame"));
        return true;
    }
  }

  /// Called with every blinded comparison value S2 decrypts.
  std::function<void(const mpz_class&)> on_delta;

  const std::vector<FrameType>& received() const noexcept { return received_; }
  /// Every plaintext S2 decrypted, in order (blinded deltas, divisors, sums).
  const std::vector<mpz_class>& revealed() const noexcept { return revealed_; }
  const thpc::PublicKey& public_key() const noexcept { return pk_; }

 private:
  fixedpoint::FixedCode joint_decrypt(ByteReader& r) {
    Ciphertext ct = thpc::read_ciphertext(r);
    thpc::PartialDecryption m1{r.integer(), ct.scale};
    r.expect_done();
    auto m2 = thpc::pdec(key_, ct);
    auto plain = thpc::tdec(pk_, m1, m2);
    revealed_.push_back(plain.raw);
    return plain;
  }

  void on_cmp(const Frame& f, Channel& ch) {
    ByteReader r(f.payload);
    auto delta = joint_decrypt(r);
    if (on_delta) on_delta(delta.raw);
    const std::uint8_t u = delta.raw > pk_.half() ? 0 : 1;
    ch.send(FrameType::CmpResult, Bytes{u});
  }

  void on_div(const Frame& f, Channel& ch) {
    ByteReader r(f.payload);
    auto y = joint_decrypt(r);
    const mpq_class value = fixedpoint::decode(y, pk_.n);
    if (sgn(value) == 0) {
      ch.send(FrameType::Abort,
              channel::abort_payload(channel::AbortCode::DivisionByZero, "divisor is zero"));
      return;
    }
    const mpz_class scalar = fixedpoint::reciprocal_code(value, params_.precision);
    ByteWriter w;
    w.integer(fixedpoint::to_ring(scalar, pk_.n));
    ch.send(FrameType::DivScalar, std::move(w).take());
  }

  void on_pro(const Frame& f, Channel& ch) {
    ByteReader r(f.payload);
    auto sum = joint_decrypt(r);
    const mpz_class signed_sum = fixedpoint::to_signed(sum.raw, pk_.n);
    if (sgn(signed_sum) <= 0) {
      ch.send(FrameType::Abort, channel::abort_payload(channel::AbortCode::DegeneratePopulation,
                                                        "fitness sum is not positive"));
      return;
    }
    mpq_class den(signed_sum, fixedpoint::pow2(params_.precision));
    den.canonicalize();
    const mpz_class scalar = fixedpoint::reciprocal_code(den, params_.precision);
    if (sgn(scalar) == 0) {
      ch.send(FrameType::Abort, channel::abort_payload(channel::AbortCode::DegeneratePopulation,
                                                        "precision too small for fitness sum"));
      return;
    }
    ByteWriter w;
    w.integer(scalar);
    ch.send(FrameType::ProScalar, std::move(w).take());
  }

  void on_fps(const Frame& f, Channel& ch) {
    ByteReader r(f.payload);
    const std::uint32_t count = r.u32();
    r.expect_done();
    ByteWriter w;
    w.u32(count);
    for (std::uint32_t j = 0; j < count; ++j) {
      const mpz_class t = selection::draw_threshold(thresholds_, params_.precision);
      thpc::write(w, thpc::enc_raw(pk_, t, 2 * params_.precision, crypto_));
    }
    ch.send(FrameType::FpsThresholds, std::move(w).take());
  }

  thpc::PublicKey pk_;
  thpc::PartialKey key_;
  ProtocolParams params_;
  Rng thresholds_;
  Rng crypto_;
  std::vector<FrameType> received_;
  std::vector<mpz_class> revealed_;
};

/// Runs S2Helper::serve on its own thread. join() rethrows anything the
/// helper threw.
class S2Thread {
 public:
  S2Thread(S2Helper& helper, Channel& ch)
      : thread_([this, &helper, &ch] {
          try {
            helper.serve(ch);
          } catch (...) {
            error_ = std::current_exception();
          }
        }) {}
  ~S2Thread() {
    if (thread_.joinable()) thread_.join();
  }
  S2Thread(const S2Thread&) = delete;
  S2Thread& operator=(const S2Thread&) = delete;

  void join() {
    if (thread_.joinable()) thread_.join();
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
  std::thread thread_;
};

// ---- S1 ----------------------------------------------------------------------

struct SecProResult {
  std::vector<Ciphertext> probabilities;  // at scale 2 precision
  std::vector<Ciphertext> fitness;        // sum - D_i
};

class S1Client {
 public:
  S1Client(thpc::PublicKey pk, thpc::PartialKey key, Channel& ch, ProtocolParams params,
           std::uint64_t crypto_seed)
      : pk_(std::move(pk)), key_(std::move(key)), ch_(ch), params_(params), rng_(crypto_seed) {
    if (key_.index != 1) throw std::invalid_argument("S1 must hold partial key 1");
  }

  const thpc::PublicKey& public_key() const noexcept { return pk_; }
  const ProtocolParams& params() const noexcept { return params_; }
  Channel& channel() noexcept { return ch_; }

  /// x / y at scale(x) + precision. S2 learns y.
  Ciphertext sec_div(const Ciphertext& x, const Ciphertext& y) {
    if (x.scale != y.scale) throw ScaleMismatch("sec_div operands differ in scale");
    send_with_share(FrameType::DivReq, y);
    Frame reply = ch_.expect(FrameType::DivScalar);
    ByteReader r(reply.payload);
    const mpz_class scalar = r.integer();
    r.expect_done();
    return thpc::scalar_mul(pk_, x, scalar, params_.precision);
  }

  /// 1 if x < y, 0 if x >= y. Requires |x - y| <= dmax on the signed values.
  int sec_cmp(const Ciphertext& x, const Ciphertext& y, const mpz_class& dmax) {
    if (x.scale != y.scale) throw ScaleMismatch("sec_cmp operands differ in scale");
    last_ = sample_cmp_session(pk_.n, dmax, params_.sigma, rng_, force_pi);
    ++cmp_calls_;
    min_sigma_ = std::min(min_sigma_, last_.sigma);

    Ciphertext delta;
    if (last_.pi == 0) {
      auto diff = thpc::scalar_mul(pk_, thpc::sub(pk_, x, y), last_.r1);
      delta = thpc::add(pk_, Ciphertext{diff.value, x.scale},
                        thpc::enc_raw(pk_, last_.r1 + last_.r2, x.scale, rng_));
    } else {
      auto diff = thpc::scalar_mul(pk_, thpc::sub(pk_, y, x), last_.r1);
      delta = thpc::add(pk_, Ciphertext{diff.value, x.scale},
                        thpc::enc_raw(pk_, last_.r2, x.scale, rng_));
    }
    send_with_share(FrameType::CmpBlind, delta);
    Frame reply = ch_.expect(FrameType::CmpResult);
    if (reply.payload.size() != 1 || reply.payload[0] > 1) {
      throw ProtocolError("malformed comparison result");
    }
    return last_.pi ^ reply.payload[0];
  }

  /// Selection probabilities for a minimization objective. costs are route
  /// costs at a common scale; fitness is sum - cost.
  SecProResult sec_pro(std::span<const Ciphertext> costs) {
    if (costs.empty()) throw std::invalid_argument("sec_pro needs at least one value");
    const unsigned scale = costs.front().scale;
    Ciphertext sum = thpc::identity(scale);
    for (const auto& c : costs) sum = thpc::add(pk_, sum, c);

    SecProResult out;
    out.fitness.reserve(costs.size());
    Ciphertext fitness_sum = thpc::identity(scale);
    for (const auto& c : costs) {
      out.fitness.push_back(thpc::sub(pk_, sum, c));
      fitness_sum = thpc::add(pk_, fitness_sum, out.fitness.back());
    }
    send_with_share(FrameType::ProSum, fitness_sum);
    Frame reply = ch_.expect(FrameType::ProScalar);
    ByteReader r(reply.payload);
    const mpz_class scalar = r.integer();
    r.expect_done();

    out.probabilities.reserve(costs.size());
    for (const auto& v : out.fitness) {
      auto p = thpc::scalar_mul(pk_, v, scalar);
      p.scale = 2 * params_.precision;
      out.probabilities.push_back(std::move(p));
    }
    return out;
  }

  /// Roulette-wheel selection of probabilities.size() indices (0-based).
  /// Thresholds come from S2; each draw is a binary search over encrypted
  /// prefix sums using at most ceil(log2 n) comparisons.
  std::vector<std::size_t> sec_fps(std::span<const Ciphertext> probabilities) {
    const std::size_t n = probabilities.size();
    if (n == 0) throw std::invalid_argument("sec_fps needs at least one value");
    std::vector<Ciphertext> prefix;
    prefix.reserve(n);
    prefix.push_back(probabilities.front());
    for (std::size_t i = 1; i < n; ++i) prefix.push_back(thpc::add(pk_, prefix.back(), probabilities[i]));

    ByteWriter req;
    req.u32(static_cast<std::uint32_t>(n));
    ch_.send(FrameType::FpsReq, std::move(req).take());
    Frame reply = ch_.expect(FrameType::FpsThresholds);
    ByteReader r(reply.payload);
    if (r.u32() != n) throw ProtocolError("threshold count mismatch");
    std::vector<Ciphertext> thresholds;
    thresholds.reserve(n);
    for (std::size_t j = 0; j < n; ++j) thresholds.push_back(thpc::read_ciphertext(r));
    r.expect_done();

    const mpz_class dmax = fixedpoint::pow2(2 * params_.precision + 1);
    std::vector<std::size_t> picked;
    picked.reserve(n);
    for (const auto& t : thresholds) {
      picked.push_back(selection::lower_bound_index(
          n, [&](std::size_t i) { return sec_cmp(prefix[i], t, dmax) == 1; }));
    }
    return picked;
  }

  /// Index of the minimum; ties go to the earliest index.
  std::size_t sec_argmin(std::span<const Ciphertext> values, const mpz_class& dmax) {
    if (values.empty()) throw std::invalid_argument("sec_argmin needs at least one value");
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j) {
      if (sec_cmp(values[j], values[best], dmax) == 1) best = j;
    }
    return best;
  }

  /// k-tournament: per slot, k distinct indices from `rng` (sorted ascending),
  /// winner is the encrypted minimum with ties to the lower index.
  std::vector<std::size_t> sec_tournament(std::span<const Ciphertext> values, std::size_t k,
                                          const mpz_class& dmax, Rng& rng) {
    if (k < 2) throw std::invalid_argument("tournament size must be at least 2");
    const std::size_t n = values.size();
    std::vector<std::size_t> picked;
    picked.reserve(n);
    std::vector<Ciphertext> contenders;
    for (std::size_t slot = 0; slot < n; ++slot) {
      auto idx = selection::sample_distinct(rng, n, k);
      contenders.clear();
      for (auto i : idx) contenders.push_back(values[i]);
      picked.push_back(idx[sec_argmin(contenders, dmax)]);
    }
    return picked;
  }

  void shutdown() { ch_.send(FrameType::Shutdown, {}); }

  // instrumentation
  std::optional<int> force_pi;
  const CmpSession& last_session() const noexcept { return last_; }
  std::uint64_t cmp_calls() const noexcept { return cmp_calls_; }
  unsigned min_effective_sigma() const noexcept { return min_sigma_; }
  void reset_counters() {
    cmp_calls_ = 0;
    min_sigma_ = params_.sigma;
  }

 private:
  void send_with_share(FrameType type, const Ciphertext& ct) {
    auto share = thpc::pdec(key_, ct);
    ByteWriter w;
    thpc::write(w, ct);
    w.integer(share.value);
    ch_.send(type, std::move(w).take());
  }

  thpc::PublicKey pk_;
  thpc::PartialKey key_;
  Channel& ch_;
  ProtocolParams params_;
  Rng rng_;
  CmpSession last_;
  std::uint64_t cmp_calls_ = 0;
  unsigned min_sigma_ = params_.sigma;
};

}  // namespace pega::protocols
