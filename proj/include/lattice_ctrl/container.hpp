/*
 * Copyright 2026 The lattice-ctrl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Binary container for keys and ciphertexts.
//
//   "GLWE" | version u8 | n u32 | log2_q u8 | d u8 | log2_nu u8 | kind u8
//   kind 1 adds rows u32 | cols u32
//   payload: little-endian 64-bit words, row-major
//
// kind 0 holds a vector of LWE ciphertexts (count = words / (n+1)), kind 1 a
// grid of GSW ciphertexts, kind 2 a secret key as two's-complement words.

#ifndef LATTICE_CTRL_CONTAINER_HPP_
#define LATTICE_CTRL_CONTAINER_HPP_

#include <array>
#include <cstdint>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/gsw.hpp"
#include "lattice_ctrl/lwe.hpp"
#include "lattice_ctrl/params.hpp"

namespace lattice_ctrl {

enum class ContainerKind : std::uint8_t { kLweVector = 0, kGswMatrix = 1, kSecretKey = 2 };

inline constexpr std::array<char, 4> kContainerMagic = {'G', 'L', 'W', 'E'};
inline constexpr std::uint8_t kContainerVersion = 1;

struct ContainerHeader {
  std::uint32_t n = 0;
  std::uint8_t log2_q = 0;
  std::uint8_t d = 0;
  std::uint8_t log2_nu = 0;
  ContainerKind kind = ContainerKind::kLweVector;
  std::uint32_t rows = 0;  // kind 1 only
  std::uint32_t cols = 0;  // kind 1 only

  Modulus modulus() const { return Modulus(log2_q); }
  GadgetSpec gadget() const { return {log2_nu, d}; }
};

// Passing this tag is the caller's acknowledgment that key material leaves
// memory.
struct ExportSecret {
  explicit ExportSecret() = default;
};

namespace detail {

inline void put_u8(std::ostream& os, std::uint8_t v) {
  os.put(static_cast<char>(v));
}

inline void put_le(std::ostream& os, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) put_u8(os, static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int ch = is.get();
    if (ch == std::char_traits<char>::eof()) {
      throw FormatError("container truncated");
    }
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * i);
  }
  return v;
}

inline void write_header(std::ostream& os, const ContainerHeader& h) {
  os.write(kContainerMagic.data(), kContainerMagic.size());
  put_u8(os, kContainerVersion);
  put_le(os, h.n, 4);
  put_u8(os, h.log2_q);
  put_u8(os, h.d);
  put_u8(os, h.log2_nu);
  put_u8(os, static_cast<std::uint8_t>(h.kind));
  if (h.kind == ContainerKind::kGswMatrix) {
    put_le(os, h.rows, 4);
    put_le(os, h.cols, 4);
  }
}

inline ContainerHeader header_for(const Params& p, ContainerKind kind) {
  ContainerHeader h;
  h.n = static_cast<std::uint32_t>(p.n);
  h.log2_q = static_cast<std::uint8_t>(p.q.log2());
  h.d = static_cast<std::uint8_t>(p.gadget.d);
  h.log2_nu = static_cast<std::uint8_t>(p.gadget.log2_nu);
  h.kind = kind;
  return h;
}

inline std::vector<std::uint64_t> read_payload(std::istream& is) {
  std::vector<char> bytes{std::istreambuf_iterator<char>(is),
                          std::istreambuf_iterator<char>()};
  if (bytes.size() % 8 != 0) throw FormatError("payload is not a whole number of words");
  std::vector<std::uint64_t> words(bytes.size() / 8);
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 * i + b]))
           << (8 * b);
    }
    words[i] = v;
  }
  return words;
}

}  // namespace detail

inline ContainerHeader read_header(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kContainerMagic) {
    throw FormatError("missing GLWE magic bytes");
  }
  const auto version = static_cast<std::uint8_t>(detail::get_le(is, 1));
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
  ContainerHeader h;
  h.n = static_cast<std::uint32_t>(detail::get_le(is, 4));
  h.log2_q = static_cast<std::uint8_t>(detail::get_le(is, 1));
  h.d = static_cast<std::uint8_t>(detail::get_le(is, 1));
  h.log2_nu = static_cast<std::uint8_t>(detail::get_le(is, 1));
  const auto kind = static_cast<std::uint8_t>(detail::get_le(is, 1));
  if (kind > 2) throw FormatError("unknown container kind " + std::to_string(kind));
  h.kind = static_cast<ContainerKind>(kind);
  if (h.kind == ContainerKind::kGswMatrix) {
    h.rows = static_cast<std::uint32_t>(detail::get_le(is, 4));
    h.cols = static_cast<std::uint32_t>(detail::get_le(is, 4));
  }
  if (h.log2_q < Modulus::kMinLog2 || h.log2_q > Modulus::kMaxLog2) {
    throw FormatError("header modulus out of range");
  }
  return h;
}

inline void write_lwe_vector(std::ostream& os, std::span<const LweCiphertext> cs,
                             const Params& p) {
  detail::write_header(os, detail::header_for(p, ContainerKind::kLweVector));
  for (const auto& c : cs) {
    if (!(c.modulus() == p.q) || c.width() != p.width()) {
      throw DomainError("ciphertext does not match container parameters");
    }
    for (auto v : c.body()) detail::put_le(os, v, 8);
  }
  if (!os) throw IoError("failed writing LWE container");
}

struct LweBundle {
  ContainerHeader header;
  std::vector<LweCiphertext> ciphertexts;
};

inline LweBundle read_lwe_vector(std::istream& is) {
  LweBundle out{read_header(is), {}};
  if (out.header.kind != ContainerKind::kLweVector) {
    throw FormatError("container does not hold an LWE vector");
  }
  const std::size_t w = std::size_t{out.header.n} + 1;
  const auto words = detail::read_payload(is);
  if (words.size() % w != 0) throw FormatError("LWE payload length is not a multiple of n+1");
  const Modulus q = out.header.modulus();
  for (std::size_t i = 0; i < words.size(); i += w) {
    out.ciphertexts.emplace_back(q, ZqVector(words.begin() + i, words.begin() + i + w));
  }
  return out;
}

inline void write_gsw_matrix(std::ostream& os, const GswMatrix& m, const Params& p) {
  ContainerHeader h = detail::header_for(p, ContainerKind::kGswMatrix);
  h.rows = static_cast<std::uint32_t>(m.rows());
  h.cols = static_cast<std::uint32_t>(m.cols());
  detail::write_header(os, h);
  for (const auto& b : m.blocks()) {
    if (!(b.modulus() == p.q) || b.width() != p.width() || !(b.gadget() == p.gadget)) {
      throw DomainError("GSW block does not match container parameters");
    }
    for (auto v : b.body().data()) detail::put_le(os, v, 8);
  }
  if (!os) throw IoError("failed writing GSW container");
}

struct GswBundle {
  ContainerHeader header;
  GswMatrix matrix;
};

inline GswBundle read_gsw_matrix(std::istream& is) {
  GswBundle out{read_header(is), {}};
  const ContainerHeader& h = out.header;
  if (h.kind != ContainerKind::kGswMatrix) {
    throw FormatError("container does not hold a GSW matrix");
  }
  const std::size_t w = std::size_t{h.n} + 1;
  const std::size_t block = w * w * h.d;
  const auto words = detail::read_payload(is);
  if (words.size() != block * h.rows * h.cols) {
    throw FormatError("GSW payload length does not match header");
  }
  std::vector<GswCiphertext> blocks;
  for (std::size_t b = 0; b < std::size_t{h.rows} * h.cols; ++b) {
    ZqMatrix body(w, w * h.d,
                  std::vector<std::uint64_t>(words.begin() + b * block,
                                             words.begin() + (b + 1) * block));
    blocks.emplace_back(h.modulus(), h.gadget(), std::move(body));
  }
  out.matrix = GswMatrix(h.rows, h.cols, std::move(blocks));
  return out;
}

inline void write_secret_key(std::ostream& os, const SecretKey& sk, const Params& p,
                             ExportSecret) {
  if (sk.size() != p.n) throw DomainError("key dimension mismatch");
  detail::write_header(os, detail::header_for(p, ContainerKind::kSecretKey));
  for (auto v : sk.coefficients()) detail::put_le(os, static_cast<std::uint64_t>(v), 8);
  if (!os) throw IoError("failed writing key container");
}

struct KeyBundle {
  ContainerHeader header;
  SecretKey key;
};

inline KeyBundle read_secret_key(std::istream& is) {
  KeyBundle out{read_header(is), {}};
  if (out.header.kind != ContainerKind::kSecretKey) {
    throw FormatError("container does not hold a secret key");
  }
  const auto words = detail::read_payload(is);
  if (words.size() != out.header.n) throw FormatError("key length does not match header");
  std::vector<std::int64_t> coeffs(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    coeffs[i] = static_cast<std::int64_t>(words[i]);
  }
  out.key = SecretKey(std::move(coeffs));
  return out;
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_CONTAINER_HPP_
