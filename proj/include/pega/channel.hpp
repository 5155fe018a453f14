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

// Metered S1 <-> S2 transport.
//
// Frame format on every transport:
//
//   u32 big-endian payload length | u8 frame type | payload
//
// Each endpoint keeps its own Transcript of every frame it sends or receives,
// so a run over the in-process pair and a run over TCP can be compared
// byte-for-byte from either side.

#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "pega/errors.hpp"
#include "pega/wire.hpp"

namespace pega::channel {

enum class PartyId : std::uint8_t { User = 0, S1 = 1, S2 = 2 };

enum class FrameType : std::uint8_t {
  CmpBlind = 0x01,
  CmpResult = 0x02,
  DivReq = 0x03,
  DivScalar = 0x04,
  ProSum = 0x05,
  ProScalar = 0x06,
  FpsReq = 0x07,
  FpsThresholds = 0x08,
  Abort = 0x7e,
  Shutdown = 0x7f,
};

inline const char* frame_type_name(FrameType t) {
  switch (t) {
    case FrameType::CmpBlind: return "CMP_BLIND";
    case FrameType::CmpResult: return "CMP_RESULT";
    case FrameType::DivReq: return "DIV_REQ";
    case FrameType::DivScalar: return "DIV_SCALAR";
    case FrameType::ProSum: return "PRO_SUM";
    case FrameType::ProScalar: return "PRO_SCALAR";
    case FrameType::FpsReq: return "FPS_REQ";
    case FrameType::FpsThresholds: return "FPS_THRESHOLDS";
    case FrameType::Abort: return "ABORT";
    case FrameType::Shutdown: return "SHUTDOWN";
  }
  return "UNKNOWN";
}

inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::uint32_t kMaxPayloadBytes = 1u << 30;

struct Frame {
  FrameType type{};
  Bytes payload;
};

enum class Direction : std::uint8_t { S1ToS2 = 0, S2ToS1 = 1 };

struct Transcript {
  std::uint64_t messages = 0;
  std::uint64_t bytes_s1_to_s2 = 0;
  std::uint64_t bytes_s2_to_s1 = 0;
  std::uint64_t rounds = 0;
  std::uint64_t digest = 0xcbf29ce484222325ULL;  // FNV-1a over direction byte + frame bytes

  std::uint64_t total_bytes() const noexcept { return bytes_s1_to_s2 + bytes_s2_to_s1; }

  void record(Direction dir, const Frame& f) {
    const std::uint64_t size = kFrameHeaderBytes + f.payload.size();
    if (dir == Direction::S1ToS2) {
      bytes_s1_to_s2 += size;
    } else {
      bytes_s2_to_s1 += size;
    }
    if (messages == 0 || dir != last_) ++rounds;
    last_ = dir;
    ++messages;
    const std::uint8_t head[6] = {static_cast<std::uint8_t>(dir),
                                  static_cast<std::uint8_t>(f.payload.size() >> 24),
                                  static_cast<std::uint8_t>(f.payload.size() >> 16),
                                  static_cast<std::uint8_t>(f.payload.size() >> 8),
                                  static_cast<std::uint8_t>(f.payload.size()),
                                  static_cast<std::uint8_t>(f.type)};
    digest = fnv1a64(head, digest);
    digest = fnv1a64(f.payload, digest);
  }

  friend bool operator==(const Transcript& a, const Transcript& b) {
    return a.messages == b.messages && a.bytes_s1_to_s2 == b.bytes_s1_to_s2 &&
           a.bytes_s2_to_s1 == b.bytes_s2_to_s1 && a.rounds == b.rounds && a.digest == b.digest;
  }

 private:
  Direction last_ = Direction::S1ToS2;
};

/// One endpoint of a reliable, in-order, two-party frame stream.
class Channel {
 public:
  explicit Channel(PartyId self) : self_(self) {
    if (self != PartyId::S1 && self != PartyId::S2) {
      throw std::invalid_argument("protocol channels connect S1 and S2 only");
    }
  }
  virtual ~Channel() = default;
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  void send(Frame frame) {
    if (frame.payload.size() > kMaxPayloadBytes) throw ProtocolError("frame payload too large");
    transcript_.record(outgoing(), frame);
    do_send(std::move(frame));
  }

  void send(FrameType type, Bytes payload) { send(Frame{type, std::move(payload)}); }

  Frame recv() {
    Frame f = do_recv();
    transcript_.record(incoming(), f);
    return f;
  }

  /// Receive and insist on a frame type. An Abort frame from the peer is
  /// surfaced as the matching exception.
  Frame expect(FrameType type);

  virtual void close() = 0;

  PartyId self() const noexcept { return self_; }
  const Transcript& transcript() const noexcept { return transcript_; }
  void reset_transcript() { transcript_ = Transcript{}; }

 protected:
  virtual void do_send(Frame frame) = 0;
  virtual Frame do_recv() = 0;

 private:
  Direction outgoing() const { return self_ == PartyId::S1 ? Direction::S1ToS2 : Direction::S2ToS1; }
  Direction incoming() const { return self_ == PartyId::S1 ? Direction::S2ToS1 : Direction::S1ToS2; }

  PartyId self_;
  Transcript transcript_;
};

// ---- abort payloads --------------------------------------------------------

enum class AbortCode : std::uint8_t { DivisionByZero = 1, DegeneratePopulation = 2, Protocol = 3 };

inline Bytes abort_payload(AbortCode code, std::string_view message) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(code));
  w.u32(static_cast<std::uint32_t>(message.size()));
  w.raw(message);
  return std::move(w).take();
}

[[noreturn]] inline void raise_abort(const Frame& f) {
  ByteReader r(f.payload);
  const auto code = static_cast<AbortCode>(r.u8());
  const auto len = r.u32();
  auto text = r.raw(len);
  std::string message(text.begin(), text.end());
  switch (code) {
    case AbortCode::DivisionByZero: throw DivisionByZero("peer aborted: " + message);
    case AbortCode::DegeneratePopulation: throw DegeneratePopulation("peer aborted: " + message);
    default: throw ProtocolError("peer aborted: " + message);
  }
}

inline Frame Channel::expect(FrameType type) {
  Frame f = recv();
  if (f.type == type) return f;
  if (f.type == FrameType::Abort) raise_abort(f);
  if (f.type == FrameType::Shutdown) throw ChannelClosed("peer shut the session down");
  throw ProtocolError(std::string("expected ") + frame_type_name(type) + ", got " +
                      frame_type_name(f.type));
}

// ---- in-process transport --------------------------------------------------

namespace detail {

struct Mailbox {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Frame> queue;
  bool closed = false;
};

struct InProcLink {
  Mailbox to_s1;
  Mailbox to_s2;
};

}  // namespace detail

class InProcChannel final : public Channel {
 public:
  InProcChannel(PartyId self, std::shared_ptr<detail::InProcLink> link)
      : Channel(self), link_(std::move(link)) {}
  ~InProcChannel() override { close(); }

  void close() override {
    for (auto* box : {&link_->to_s1, &link_->to_s2}) {
      std::lock_guard lock(box->mu);
      box->closed = true;
      box->cv.notify_all();
    }
  }

 protected:
  void do_send(Frame frame) override {
    auto& box = self() == PartyId::S1 ? link_->to_s2 : link_->to_s1;
    std::lock_guard lock(box.mu);
    if (box.closed) throw ChannelClosed("in-process channel closed");
    box.queue.push_back(std::move(frame));
    box.cv.notify_one();
  }

  Frame do_recv() override {
    auto& box = self() == PartyId::S1 ? link_->to_s1 : link_->to_s2;
    std::unique_lock lock(box.mu);
    box.cv.wait(lock, [&] { return !box.queue.empty() || box.closed; });
    if (box.queue.empty()) throw ChannelClosed("in-process channel closed");
    Frame f = std::move(box.queue.front());
    box.queue.pop_front();
    return f;
  }

 private:
  std::shared_ptr<detail::InProcLink> link_;
};

/// Returns {S1 endpoint, S2 endpoint}.
inline std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair() {
  auto link = std::make_shared<detail::InProcLink>();
  return {std::make_unique<InProcChannel>(PartyId::S1, link),
          std::make_unique<InProcChannel>(PartyId::S2, link)};
}

// ---- TCP transport ---------------------------------------------------------

class TcpChannel final : public Channel {
 public:
  TcpChannel(PartyId self, int fd) : Channel(self), fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpChannel() override { close(); }

  static std::unique_ptr<TcpChannel> connect(PartyId self, const std::string& host,
                                             std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr) {
      throw ChannelClosed("cannot resolve " + host);
    }
    int fd = -1;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw ChannelClosed("cannot connect to " + host + ":" + service);
    return std::make_unique<TcpChannel>(self, fd);
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 protected:
  void do_send(Frame frame) override {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(frame.payload.size()));
    w.u8(static_cast<std::uint8_t>(frame.type));
    w.raw(frame.payload);
    write_all(w.bytes().data(), w.size());
  }

  Frame do_recv() override {
    std::uint8_t head[kFrameHeaderBytes];
    read_all(head, sizeof(head));
    ByteReader r(head);
    const std::uint32_t len = r.u32();
    if (len > kMaxPayloadBytes) throw ProtocolError("frame payload too large");
    Frame f;
    f.type = static_cast<FrameType>(r.u8());
    f.payload.resize(len);
    if (len > 0) read_all(f.payload.data(), len);
    return f;
  }

 private:
  void write_all(const std::uint8_t* data, std::size_t n) {
    if (fd_ < 0) throw ChannelClosed("socket closed");
    while (n > 0) {
      const ssize_t k = ::send(fd_, data, n, MSG_NOSIGNAL);
      if (k <= 0) throw ChannelClosed("socket write failed");
      data += k;
      n -= static_cast<std::size_t>(k);
    }
  }

  void read_all(std::uint8_t* data, std::size_t n) {
    if (fd_ < 0) throw ChannelClosed("socket closed");
    while (n > 0) {
      const ssize_t k = ::recv(fd_, data, n, 0);
      if (k <= 0) throw ChannelClosed("socket read failed");
      data += k;
      n -= static_cast<std::size_t>(k);
    }
  }

  int fd_;
};

/// Listening socket for the S2 role. Port 0 picks an ephemeral port.
class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port, const std::string& bind_host = "127.0.0.1") {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw ChannelClosed("cannot create socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd_);
      throw ChannelClosed("invalid bind address " + bind_host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd_, 1) != 0) {
      ::close(fd_);
      throw ChannelClosed("cannot listen on port " + std::to_string(port));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }
  ~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
  }
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  std::unique_ptr<TcpChannel> accept(PartyId self) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw ChannelClosed("accept failed");
    return std::make_unique<TcpChannel>(self, fd);
  }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace pega::channel
