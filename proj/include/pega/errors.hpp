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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pega {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value does not fit the plaintext ring without sign ambiguity.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class DivisionByZero : public Error {
 public:
  using Error::Error;
};

/// Decryption produced a non-integral L(x), or the ciphertext is outside Z*_{N^2}.
class MalformedCiphertext : public Error {
 public:
  using Error::Error;
};

class ScaleMismatch : public Error {
 public:
  using Error::Error;
};

class ChannelClosed : public Error {
 public:
  using Error::Error;
};

/// Peer sent a frame that violates the wire format or the protocol state machine.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class DegeneratePopulation : public Error {
 public:
  using Error::Error;
};

/// Serialized bytes (key, ciphertext or container file) cannot be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A tour uses a city pair marked unreachable (zero cost entry).
class UnreachableEdge : public Error {
 public:
  using Error::Error;
};

}  // namespace pega
