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

// TSPLIB ingestion, cost matrices, city pseudonyms and encrypted instances.
//
// Cities are 1-based throughout. A tour is a permutation of 1..m and is
// closed: its cost includes the edge from the last city back to the first.

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pega/errors.hpp"
#include "pega/fixedpoint.hpp"
#include "pega/random.hpp"
#include "pega/thpc.hpp"
#include "pega/wire.hpp"

namespace pega::tsp {

using Tour = std::vector<std::uint32_t>;

enum class WeightKind { Euc2D, Explicit };
enum class MatrixFormat { None, LowerDiagRow, UpperRow, FullMatrix };

struct TspInstance {
  std::string name;
  std::string comment;
  std::uint32_t m = 0;
  WeightKind kind = WeightKind::Euc2D;
  MatrixFormat format = MatrixFormat::None;
  std::vector<std::pair<double, double>> coords;  // Euc2D
  std::vector<std::int64_t> weights;              // Explicit, full m x m row-major
};

// ---- parsing -----------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

/// Whitespace-separated tokens with the 1-based line each came from.
class Tokens {
 public:
  Tokens(const std::vector<std::string>& lines, std::size_t first) : lines_(lines), next_(first) {}

  bool next(std::string& tok, std::size_t& line_no) {
    for (;;) {
      if (in_ >> tok) {
        line_no = current_;
        return true;
      }
      if (next_ >= lines_.size()) return false;
      in_.clear();
      in_.str(lines_[next_]);
      current_ = ++next_;
    }
  }

  /// Index of the first line not yet touched.
  std::size_t resume_line() const noexcept { return next_; }

 private:
  const std::vector<std::string>& lines_;
  std::size_t next_;
  std::size_t current_ = 0;
  std::istringstream in_;
};

inline std::int64_t parse_int(const std::string& tok, std::size_t line) {
  std::int64_t v = 0;
  const auto* b = tok.data();
  const auto* e = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec == std::errc() && ptr == e) return v;
  // Some explicit matrices are written with a trailing ".0".
  double d = 0;
  try {
    std::size_t used = 0;
    d = std::stod(tok, &used);
    if (used == tok.size() && std::isfinite(d) && d == std::floor(d)) return static_cast<std::int64_t>(d);
  } catch (const std::exception&) {
  }
  throw ParseError(line, "expected an integer weight, got '" + tok + "'");
}

inline double parse_real(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(tok, &used);
    if (used == tok.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ParseError(line, "expected a finite number, got '" + tok + "'");
}

inline bool is_section(const std::string& key) {
  return key.size() > 8 && key.compare(key.size() - 8, 8, "_SECTION") == 0;
}

}  // namespace detail

inline TspInstance parse_tsplib(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) {
        if (pos < text.size()) lines.emplace_back(text.substr(pos));
        break;
      }
      lines.emplace_back(text.substr(pos, nl - pos));
      pos = nl + 1;
    }
  }

  TspInstance inst;
  std::string type;
  std::string weight_type;
  std::string weight_format;
  bool have_dim = false;
  bool have_coords = false;
  bool have_weights = false;

  std::size_t i = 0;
  while (i < lines.size()) {
    const std::size_t line_no = i + 1;
    const std::string line = detail::trim(lines[i]);
    ++i;
    if (line.empty()) continue;
    std::string key;
    std::string value;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      key = detail::upper(line);
    } else {
      key = detail::upper(detail::trim(std::string_view(line).substr(0, colon)));
      value = detail::trim(std::string_view(line).substr(colon + 1));
    }

    if (key == "EOF") break;
    if (key == "NAME") {
      inst.name = value;
    } else if (key == "COMMENT") {
      inst.comment = inst.comment.empty() ? value : inst.comment + "\n" + value;
    } else if (key == "TYPE") {
      type = detail::upper(value);
      if (type != "TSP") throw UnsupportedFormat("unsupported problem TYPE '" + value + "'");
    } else if (key == "DIMENSION") {
      const auto d = detail::parse_int(value, line_no);
      if (d < 3) throw ParseError(line_no, "DIMENSION must be at least 3");
      if (d > 100000) throw ParseError(line_no, "DIMENSION is too large");
      inst.m = static_cast<std::uint32_t>(d);
      have_dim = true;
    } else if (key == "EDGE_WEIGHT_TYPE") {
      weight_type = detail::upper(value);
      if (weight_type == "EUC_2D") {
        inst.kind = WeightKind::Euc2D;
      } else if (weight_type == "EXPLICIT") {
        inst.kind = WeightKind::Explicit;
      } else {
        throw UnsupportedFormat("unsupported EDGE_WEIGHT_TYPE '" + value +
                                "' (supported: EUC_2D, EXPLICIT)");
      }
    } else if (key == "EDGE_WEIGHT_FORMAT") {
      weight_format = detail::upper(value);
      if (weight_format == "LOWER_DIAG_ROW") {
        inst.format = MatrixFormat::LowerDiagRow;
      } else if (weight_format == "UPPER_ROW") {
        inst.format = MatrixFormat::UpperRow;
      } else if (weight_format == "FULL_MATRIX") {
        inst.format = MatrixFormat::FullMatrix;
      } else if (weight_format == "FUNCTION") {
        inst.format = MatrixFormat::None;
      } else {
        throw UnsupportedFormat("unsupported EDGE_WEIGHT_FORMAT '" + value +
                                "' (supported: LOWER_DIAG_ROW, UPPER_ROW, FULL_MATRIX)");
      }
    } else if (key == "DISPLAY_DATA_TYPE" || key == "NODE_COORD_TYPE" ||
               key == "CAPACITY") {
      // informational
    } else if (key == "NODE_COORD_SECTION") {
      if (!have_dim) throw ParseError(line_no, "NODE_COORD_SECTION before DIMENSION");
      detail::Tokens toks(lines, i);
      inst.coords.assign(inst.m, {0.0, 0.0});
      std::vector<bool> seen(inst.m, false);
      for (std::uint32_t k = 0; k < inst.m; ++k) {
        std::string a, b, c;
        std::size_t la = 0, lb = 0, lc = 0;
        if (!toks.next(a, la) || !toks.next(b, lb) || !toks.next(c, lc)) {
          throw ParseError(lines.size(), "NODE_COORD_SECTION ends early");
        }
        const auto id = detail::parse_int(a, la);
        if (id < 1 || id > static_cast<std::int64_t>(inst.m) || seen[id - 1]) {
          throw ParseError(la, "bad node id '" + a + "'");
        }
        seen[id - 1] = true;
        inst.coords[id - 1] = {detail::parse_real(b, lb), detail::parse_real(c, lc)};
      }
      i = toks.resume_line();
      have_coords = true;
    } else if (key == "EDGE_WEIGHT_SECTION") {
      if (!have_dim) throw ParseError(line_no, "EDGE_WEIGHT_SECTION before DIMENSION");
      if (inst.format == MatrixFormat::None) {
        throw ParseError(line_no, "EDGE_WEIGHT_SECTION without a supported EDGE_WEIGHT_FORMAT");
      }
      const std::uint32_t m = inst.m;
      inst.weights.assign(static_cast<std::size_t>(m) * m, 0);
      std::vector<bool> set(static_cast<std::size_t>(m) * m, false);
      detail::Tokens toks(lines, i);
      auto take = [&]() {
        std::string tok;
        std::size_t ln = 0;
        if (!toks.next(tok, ln)) throw ParseError(lines.size(), "EDGE_WEIGHT_SECTION ends early");
        const auto v = detail::parse_int(tok, ln);
        if (v < 0) throw ParseError(ln, "negative edge weight");
        return std::pair{v, ln};
      };
      auto put = [&](std::uint32_t r, std::uint32_t c, std::int64_t v, std::size_t ln) {
        const std::size_t a = static_cast<std::size_t>(r) * m + c;
        const std::size_t b = static_cast<std::size_t>(c) * m + r;
        if (r == c && v != 0) throw ParseError(ln, "non-zero diagonal entry");
        if (set[b] && inst.weights[b] != v) throw ParseError(ln, "matrix is not symmetric");
        inst.weights[a] = v;
        inst.weights[b] = v;
        set[a] = set[b] = true;
      };
      switch (inst.format) {
        case MatrixFormat::LowerDiagRow:
          for (std::uint32_t r = 0; r < m; ++r)
            for (std::uint32_t c = 0; c <= r; ++c) {
              auto [v, ln] = take();
              put(r, c, v, ln);
            }
          break;
        case MatrixFormat::UpperRow:
          for (std::uint32_t r = 0; r < m; ++r)
            for (std::uint32_t c = r + 1; c < m; ++c) {
              auto [v, ln] = take();
              put(r, c, v, ln);
            }
          break;
        case MatrixFormat::FullMatrix:
          for (std::uint32_t r = 0; r < m; ++r)
            for (std::uint32_t c = 0; c < m; ++c) {
              auto [v, ln] = take();
              put(r, c, v, ln);
            }
          break;
        case MatrixFormat::None: break;
      }
      i = toks.resume_line();
      have_weights = true;
    } else if (detail::is_section(key)) {
      // Skip sections we do not use (DISPLAY_DATA_SECTION, TOUR_SECTION, ...):
      // consume lines until the next keyword line.
      while (i < lines.size()) {
        const std::string t = detail::trim(lines[i]);
        if (!t.empty() && std::isalpha(static_cast<unsigned char>(t[0]))) break;
        ++i;
      }
    } else {
      throw ParseError(line_no, "unknown keyword '" + key + "'");
    }
  }

  if (type.empty()) throw ParseError(lines.size(), "missing TYPE");
  if (!have_dim) throw ParseError(lines.size(), "missing DIMENSION");
  if (weight_type.empty()) throw ParseError(lines.size(), "missing EDGE_WEIGHT_TYPE");
  if (inst.kind == WeightKind::Euc2D && !have_coords) {
    throw ParseError(lines.size(), "missing NODE_COORD_SECTION");
  }
  if (inst.kind == WeightKind::Explicit && !have_weights) {
    throw ParseError(lines.size(), "missing EDGE_WEIGHT_SECTION");
  }
  return inst;
}

inline TspInstance load_tsplib(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_tsplib(text);
}

inline std::string serialize_tsplib(const TspInstance& inst) {
  std::ostringstream out;
  out.precision(17);
  out << "NAME : " << inst.name << "\n";
  if (!inst.comment.empty()) {
    std::istringstream cs(inst.comment);
    for (std::string l; std::getline(cs, l);) out << "COMMENT : " << l << "\n";
  }
  out << "TYPE : TSP\n";
  out << "DIMENSION : " << inst.m << "\n";
  const std::uint32_t m = inst.m;
  if (inst.kind == WeightKind::Euc2D) {
    out << "EDGE_WEIGHT_TYPE : EUC_2D\n";
    out << "NODE_COORD_SECTION\n";
    for (std::uint32_t k = 0; k < m; ++k) {
      out << (k + 1) << " " << inst.coords[k].first << " " << inst.coords[k].second << "\n";
    }
  } else {
    const auto w = [&](std::uint32_t r, std::uint32_t c) {
      return inst.weights[static_cast<std::size_t>(r) * m + c];
    };
    out << "EDGE_WEIGHT_TYPE : EXPLICIT\n";
    switch (inst.format) {
      case MatrixFormat::LowerDiagRow:
        out << "EDGE_WEIGHT_FORMAT : LOWER_DIAG_ROW\nEDGE_WEIGHT_SECTION\n";
        for (std::uint32_t r = 0; r < m; ++r) {
          for (std::uint32_t c = 0; c <= r; ++c) out << (c ? " " : "") << w(r, c);
          out << "\n";
        }
        break;
      case MatrixFormat::UpperRow:
        out << "EDGE_WEIGHT_FORMAT : UPPER_ROW\nEDGE_WEIGHT_SECTION\n";
        for (std::uint32_t r = 0; r + 1 < m; ++r) {
          for (std::uint32_t c = r + 1; c < m; ++c) out << (c > r + 1 ? " " : "") << w(r, c);
          out << "\n";
        }
        break;
      default:
        out << "EDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n";
        for (std::uint32_t r = 0; r < m; ++r) {
          for (std::uint32_t c = 0; c < m; ++c) out << (c ? " " : "") << w(r, c);
          out << "\n";
        }
        break;
    }
  }
  out << "EOF\n";
  return out.str();
}

// ---- cost matrix -------------------------------------------------------------

/// Symmetric costs stored strictly upper-triangular, row-major:
/// (1,2) (1,3) ... (1,m) (2,3) ... (m-1,m). A zero entry marks an unreachable pair.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(std::uint32_t m) : m_(m), d_(pair_count(m), 0) {
    if (m < 2) throw std::invalid_argument("cost matrix needs at least two cities");
  }

  static std::size_t pair_count(std::uint32_t m) { return static_cast<std::size_t>(m) * (m - 1) / 2; }

  std::uint32_t size() const noexcept { return m_; }

  /// Position of the 1-based pair {i, j}, i != j, in row-major upper order.
  std::size_t index(std::uint32_t i, std::uint32_t j) const {
    if (i == j || i < 1 || j < 1 || i > m_ || j > m_) throw std::out_of_range("bad city pair");
    if (i > j) std::swap(i, j);
    const std::size_t r = i - 1;
    return r * m_ - r * (r + 1) / 2 + (j - i - 1);
  }

  std::int64_t at(std::uint32_t i, std::uint32_t j) const { return d_[index(i, j)]; }
  void set(std::uint32_t i, std::uint32_t j, std::int64_t v) {
    if (v < 0) throw std::invalid_argument("negative cost");
    d_[index(i, j)] = v;
  }
  bool reachable(std::uint32_t i, std::uint32_t j) const { return at(i, j) != 0; }

  std::span<const std::int64_t> entries() const noexcept { return d_; }
  std::int64_t max_cost() const noexcept { return d_.empty() ? 0 : *std::max_element(d_.begin(), d_.end()); }

  friend bool operator==(const CostMatrix&, const CostMatrix&) = default;

 private:
  std::uint32_t m_ = 0;
  std::vector<std::int64_t> d_;
};

/// TSPLIB nint: floor(x + 0.5).
inline std::int64_t nint(double x) { return static_cast<std::int64_t>(std::floor(x + 0.5)); }

inline CostMatrix build_matrix(const TspInstance& inst) {
  CostMatrix out(inst.m);
  for (std::uint32_t i = 1; i <= inst.m; ++i) {
    for (std::uint32_t j = i + 1; j <= inst.m; ++j) {
      if (inst.kind == WeightKind::Euc2D) {
        const auto [xi, yi] = inst.coords[i - 1];
        const auto [xj, yj] = inst.coords[j - 1];
        out.set(i, j, nint(std::hypot(xi - xj, yi - yj)));
      } else {
        out.set(i, j, inst.weights[static_cast<std::size_t>(i - 1) * inst.m + (j - 1)]);
      }
    }
  }
  return out;
}

// ---- tours -------------------------------------------------------------------

inline void check_tour(const Tour& tour, std::uint32_t m) {
  if (tour.size() != m) throw std::invalid_argument("tour length differs from city count");
  std::vector<bool> seen(m + 1, false);
  for (auto c : tour) {
    if (c < 1 || c > m || seen[c]) throw std::invalid_argument("tour is not a permutation");
    seen[c] = true;
  }
}

inline std::int64_t route_cost_plain(const CostMatrix& d, const Tour& tour) {
  check_tour(tour, d.size());
  std::int64_t total = 0;
  for (std::size_t k = 0; k < tour.size(); ++k) {
    const auto a = tour[k];
    const auto b = tour[(k + 1) % tour.size()];
    const auto w = d.at(a, b);
    if (w == 0) {
      throw UnreachableEdge("tour uses unreachable edge " + std::to_string(a) + "-" + std::to_string(b));
    }
    total += w;
  }
  return total;
}

// ---- pseudonyms --------------------------------------------------------------

/// forward[label - 1] is the pseudonym of city `label`; inverse undoes it.
struct CityMap {
  std::vector<std::uint32_t> forward;
  std::vector<std::uint32_t> inverse;

  static CityMap from_forward(std::vector<std::uint32_t> fwd) {
    CityMap map;
    const auto m = static_cast<std::uint32_t>(fwd.size());
    map.inverse.assign(m, 0);
    for (std::uint32_t label = 1; label <= m; ++label) {
      const auto p = fwd[label - 1];
      if (p < 1 || p > m || map.inverse[p - 1] != 0) throw FormatError("city map is not a bijection");
      map.inverse[p - 1] = label;
    }
    map.forward = std::move(fwd);
    return map;
  }

  static CityMap identity(std::uint32_t m) {
    std::vector<std::uint32_t> fwd(m);
    for (std::uint32_t k = 0; k < m; ++k) fwd[k] = k + 1;
    return from_forward(std::move(fwd));
  }

  std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(forward.size()); }
  std::uint32_t to_pseudonym(std::uint32_t label) const { return forward.at(label - 1); }
  std::uint32_t to_label(std::uint32_t pseudonym) const { return inverse.at(pseudonym - 1); }

  Tour to_labels(const Tour& t) const {
    Tour out;
    out.reserve(t.size());
    for (auto c : t) out.push_back(to_label(c));
    return out;
  }
  Tour to_pseudonyms(const Tour& t) const {
    Tour out;
    out.reserve(t.size());
    for (auto c : t) out.push_back(to_pseudonym(c));
    return out;
  }

  friend bool operator==(const CityMap&, const CityMap&) = default;
};

inline CostMatrix relabel(const CostMatrix& d, const CityMap& map) {
  if (map.size() != d.size()) throw std::invalid_argument("city map size differs from matrix");
  CostMatrix out(d.size());
  for (std::uint32_t i = 1; i <= d.size(); ++i) {
    for (std::uint32_t j = i + 1; j <= d.size(); ++j) {
      out.set(map.to_pseudonym(i), map.to_pseudonym(j), d.at(i, j));
    }
  }
  return out;
}

inline std::pair<CityMap, CostMatrix> pseudonymize(const CostMatrix& d, Rng& rng) {
  std::vector<std::uint32_t> fwd(d.size());
  for (std::uint32_t k = 0; k < d.size(); ++k) fwd[k] = k + 1;
  shuffle(fwd, rng);
  CityMap map = CityMap::from_forward(std::move(fwd));
  CostMatrix out = relabel(d, map);
  return {std::move(map), std::move(out)};
}

inline Bytes serialize(const CityMap& map) {
  ByteWriter w;
  w.raw(std::string_view("CMAP"));
  w.u8(1);
  w.u32(map.size());
  for (auto p : map.forward) w.u32(p);
  return std::move(w).take();
}

inline CityMap parse_city_map(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != "CMAP") {
    throw FormatError("not a city map file");
  }
  if (r.u8() != 1) throw FormatError("unsupported city map version");
  const auto m = r.u32();
  if (static_cast<std::size_t>(m) * 4 != r.remaining()) throw FormatError("city map length mismatch");
  std::vector<std::uint32_t> fwd(m);
  for (auto& p : fwd) p = r.u32();
  return CityMap::from_forward(std::move(fwd));
}

// ---- encrypted instance ------------------------------------------------------

/// Upper-triangular ciphertexts of edge costs at scale `scale`, under one
/// public key. Unreachable pairs carry no ciphertext.
struct EncryptedTsp {
  std::uint32_t m = 0;
  unsigned scale = 0;
  unsigned edge_bits = 0;  // public bound: every cost < 2^edge_bits
  std::uint64_t pk_fingerprint = 0;
  std::vector<bool> reachable;        // per pair, row-major upper order
  std::vector<thpc::Ciphertext> entries;  // per pair; unused slots hold identity

  std::size_t index(std::uint32_t i, std::uint32_t j) const {
    if (i == j || i < 1 || j < 1 || i > m || j > m) throw std::out_of_range("bad city pair");
    if (i > j) std::swap(i, j);
    const std::size_t r = i - 1;
    return r * m - r * (r + 1) / 2 + (j - i - 1);
  }

  /// Public bound on |a - b| for any two route costs at this scale.
  mpz_class cost_bound() const {
    return mpz_class(m) * fixedpoint::pow2(edge_bits) * fixedpoint::pow2(scale);
  }

  /// Sum of serialized ciphertext sizes.
  std::size_t payload_bytes() const {
    std::size_t total = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (reachable[k]) total += thpc::serialized_size(entries[k]);
    }
    return total;
  }
};

inline unsigned bit_length(std::int64_t v) {
  unsigned bits = 0;
  while (v > 0) {
    ++bits;
    v >>= 1;
  }
  return bits;
}

/// Encrypt each reachable cost as cost * 2^scale. Entry k uses its own
/// randomness stream derived from `root_seed` and k.
inline EncryptedTsp encrypt_tsp(const thpc::PublicKey& pk, const CostMatrix& d, unsigned scale,
                                std::uint64_t root_seed) {
  EncryptedTsp out;
  out.m = d.size();
  out.scale = scale;
  out.edge_bits = bit_length(d.max_cost());
  out.pk_fingerprint = thpc::fingerprint(pk);
  const auto costs = d.entries();
  out.reachable.resize(costs.size());
  out.entries.reserve(costs.size());
  if (!fixedpoint::representable(mpq_class(mpz_class(static_cast<long>(d.max_cost()))), scale, pk.n)) {
    throw OverflowError("edge cost does not fit the plaintext modulus at this scale");
  }
  for (std::size_t k = 0; k < costs.size(); ++k) {
    out.reachable[k] = costs[k] != 0;
    if (!out.reachable[k]) {
      out.entries.push_back(thpc::identity(scale));
      continue;
    }
    Rng rng(derive_seed(root_seed, k));
    const auto code = fixedpoint::encode_integer(mpz_class(static_cast<long>(costs[k])), scale, pk.n);
    out.entries.push_back(thpc::enc(pk, code, rng));
  }
  return out;
}

inline thpc::Ciphertext route_cost_enc(const thpc::PublicKey& pk, const EncryptedTsp& enc,
                                       const Tour& tour) {
  check_tour(tour, enc.m);
  thpc::Ciphertext total = thpc::identity(enc.scale);
  for (std::size_t k = 0; k < tour.size(); ++k) {
    const auto a = tour[k];
    const auto b = tour[(k + 1) % tour.size()];
    const auto idx = enc.index(a, b);
    if (!enc.reachable[idx]) {
      throw UnreachableEdge("tour uses unreachable edge " + std::to_string(a) + "-" + std::to_string(b));
    }
    total = thpc::add(pk, total, enc.entries[idx]);
  }
  return total;
}

/// Container: "ETSP" | u8 version | u32 m | u16 scale | u16 edge_bits |
/// u64 pk fingerprint | reachability bitmap | ciphertexts of reachable pairs.
inline Bytes serialize(const EncryptedTsp& enc) {
  ByteWriter w;
  w.raw(std::string_view("ETSP"));
  w.u8(1);
  w.u32(enc.m);
  w.u16(static_cast<std::uint16_t>(enc.scale));
  w.u16(static_cast<std::uint16_t>(enc.edge_bits));
  w.u64(enc.pk_fingerprint);
  Bytes bitmap((enc.reachable.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < enc.reachable.size(); ++k) {
    if (enc.reachable[k]) bitmap[k / 8] |= static_cast<std::uint8_t>(0x80u >> (k % 8));
  }
  w.raw(bitmap);
  for (std::size_t k = 0; k < enc.entries.size(); ++k) {
    if (enc.reachable[k]) thpc::write(w, enc.entries[k]);
  }
  return std::move(w).take();
}

inline EncryptedTsp parse_encrypted_tsp(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != "ETSP") {
    throw FormatError("not an encrypted TSP container");
  }
  if (r.u8() != 1) throw FormatError("unsupported container version");
  EncryptedTsp enc;
  enc.m = r.u32();
  if (enc.m < 3) throw FormatError("container has fewer than three cities");
  enc.scale = r.u16();
  enc.edge_bits = r.u16();
  enc.pk_fingerprint = r.u64();
  const std::size_t pairs = CostMatrix::pair_count(enc.m);
  const auto bitmap = r.raw((pairs + 7) / 8);
  enc.reachable.resize(pairs);
  enc.entries.reserve(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    enc.reachable[k] = (bitmap[k / 8] >> (7 - k % 8)) & 1;
    if (enc.reachable[k]) {
      auto ct = thpc::read_ciphertext(r);
      if (ct.scale != enc.scale) throw FormatError("ciphertext scale differs from header");
      enc.entries.push_back(std::move(ct));
    } else {
      enc.entries.push_back(thpc::identity(enc.scale));
    }
  }
  r.expect_done();
  return enc;
}

}  // namespace pega::tsp
