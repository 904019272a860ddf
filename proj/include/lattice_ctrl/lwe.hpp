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

#ifndef LATTICE_CTRL_LWE_HPP_
#define LATTICE_CTRL_LWE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/matrix.hpp"
#include "lattice_ctrl/params.hpp"
#include "lattice_ctrl/ring.hpp"

namespace lattice_ctrl {

// Integer key vector of length n. Memory is wiped on destruction.
class SecretKey {
 public:
  SecretKey() = default;
  explicit SecretKey(std::vector<std::int64_t> coeffs)
      : coeffs_(std::move(coeffs)) {}
  SecretKey(const SecretKey&) = default;
  SecretKey(SecretKey&& o) noexcept : coeffs_(std::move(o.coeffs_)) {}
  SecretKey& operator=(const SecretKey& o) {
    if (this != &o) {
      wipe();
      coeffs_ = o.coeffs_;
    }
    return *this;
  }
  SecretKey& operator=(SecretKey&& o) noexcept {
    if (this != &o) {
      wipe();
      coeffs_ = std::move(o.coeffs_);
    }
    return *this;
  }
  ~SecretKey() { wipe(); }

  std::size_t size() const { return coeffs_.size(); }
  std::span<const std::int64_t> coefficients() const { return coeffs_; }
  std::int64_t operator[](std::size_t i) const { return coeffs_[i]; }

 private:
  void wipe() {
    volatile std::int64_t* p = coeffs_.data();
    for (std::size_t i = 0; i < coeffs_.size(); ++i) p[i] = 0;
  }

  std::vector<std::int64_t> coeffs_;
};

// (b, a) with b = m + sk.a + e mod q.
class LweCiphertext {
 public:
  LweCiphertext() = default;
  LweCiphertext(Modulus q, ZqVector body) : q_(q), body_(std::move(body)) {
    for (auto& v : body_) {
      if (!q_.contains(v)) throw DomainError("ciphertext entry outside [0, q)");
    }
  }

  static LweCiphertext zero(Modulus q, std::size_t n) {
    return LweCiphertext(q, ZqVector(n + 1, 0));
  }
  // Noise-free encoding [m, 0, ..., 0].
  static LweCiphertext trivial(Modulus q, std::size_t n, std::uint64_t m) {
    ZqVector body(n + 1, 0);
    body[0] = q.reduce(m);
    return LweCiphertext(q, std::move(body));
  }

  const Modulus& modulus() const { return q_; }
  std::size_t width() const { return body_.size(); }
  std::size_t dimension() const { return body_.empty() ? 0 : body_.size() - 1; }
  const ZqVector& body() const { return body_; }
  ZqVector& mutable_body() { return body_; }

  bool operator==(const LweCiphertext&) const = default;

 private:
  Modulus q_{2};
  ZqVector body_;
};

namespace detail {

inline void check_compatible(const LweCiphertext& a, const LweCiphertext& b) {
  if (!(a.modulus() == b.modulus()) || a.width() != b.width()) {
    throw DomainError("ciphertexts use different parameters");
  }
}

inline std::uint64_t inner_mask(const SecretKey& sk, const ZqVector& body,
                                const Modulus& q) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < sk.size(); ++i) {
    acc += q.reduce(sk[i]) * body[i + 1];
  }
  return q.reduce(acc);
}

}  // namespace detail

template <std::uniform_random_bit_generator Rng>
SecretKey keygen(const Params& params, Rng& rng) {
  params.validate();
  std::vector<std::int64_t> s(params.n);
  for (auto& v : s) v = sample_error(params.noise, rng);
  return SecretKey(std::move(s));
}

template <std::uniform_random_bit_generator Rng>
LweCiphertext encrypt(std::uint64_t m, const SecretKey& sk,
                      const Params& params, Rng& rng) {
  if (!params.q.contains(m)) throw DomainError("message outside [0, q)");
  if (sk.size() != params.n) throw DomainError("key dimension mismatch");
  const Modulus& q = params.q;
  ZqVector body(params.width());
  for (std::size_t i = 1; i < body.size(); ++i) body[i] = sample_uniform(q, rng);
  const std::int64_t e = sample_error(params.noise, rng);
  body[0] = q.add(q.add(m, detail::inner_mask(sk, body, q)), q.reduce(e));
  return LweCiphertext(q, std::move(body));
}

template <std::uniform_random_bit_generator Rng>
std::vector<LweCiphertext> encrypt_vector(std::span<const std::uint64_t> m,
                                          const SecretKey& sk,
                                          const Params& params, Rng& rng) {
  std::vector<LweCiphertext> out;
  out.reserve(m.size());
  for (auto v : m) out.push_back(encrypt(v, sk, params, rng));
  return out;
}

inline std::uint64_t decrypt(const LweCiphertext& c, const SecretKey& sk) {
  if (c.width() != sk.size() + 1) {
    throw DomainError("ciphertext width does not match key dimension");
  }
  const Modulus& q = c.modulus();
  return q.sub(c.body()[0], detail::inner_mask(sk, c.body(), q));
}

// Decryption as a representative in [-q/2, q/2).
inline std::int64_t decrypt_centered(const LweCiphertext& c,
                                     const SecretKey& sk) {
  return c.modulus().centered(decrypt(c, sk));
}

inline ZqVector decrypt_vector(std::span<const LweCiphertext> cs,
                               const SecretKey& sk) {
  ZqVector out(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) out[i] = decrypt(cs[i], sk);
  return out;
}

template <std::uniform_random_bit_generator Rng>
LweCiphertext encrypt_scaled(std::int64_t m, std::uint64_t L,
                             const SecretKey& sk, const Params& params,
                             Rng& rng) {
  if (L == 0 || static_cast<double>(L) / 2 <= params.noise.bound()) {
    throw ParameterError("scale L must satisfy L/2 > n0*sigma");
  }
  const Modulus& q = params.q;
  return encrypt(q.mul(q.reduce(m), q.reduce(L)), sk, params, rng);
}

// Nearest integer to v/L, ties upward.
inline std::int64_t decode_scaled(std::uint64_t v, std::uint64_t L) {
  if (L == 0) throw ParameterError("scale L must be positive");
  const __int128 num = 2 * static_cast<__int128>(v) + L;
  return static_cast<std::int64_t>(num / (2 * static_cast<__int128>(L)));
}

// Same rounding for a signed (centered) value.
inline std::int64_t decode_scaled_centered(std::int64_t v, std::uint64_t L) {
  if (L == 0) throw ParameterError("scale L must be positive");
  const __int128 num = 2 * static_cast<__int128>(v) + L;
  const __int128 den = 2 * static_cast<__int128>(L);
  __int128 quot = num / den;
  if (num % den != 0 && num < 0) --quot;
  return static_cast<std::int64_t>(quot);
}

inline LweCiphertext add(const LweCiphertext& a, const LweCiphertext& b) {
  detail::check_compatible(a, b);
  const Modulus& q = a.modulus();
  ZqVector body(a.width());
  for (std::size_t i = 0; i < body.size(); ++i) {
    body[i] = q.add(a.body()[i], b.body()[i]);
  }
  return LweCiphertext(q, std::move(body));
}

inline LweCiphertext sub(const LweCiphertext& a, const LweCiphertext& b) {
  detail::check_compatible(a, b);
  const Modulus& q = a.modulus();
  ZqVector body(a.width());
  for (std::size_t i = 0; i < body.size(); ++i) {
    body[i] = q.sub(a.body()[i], b.body()[i]);
  }
  return LweCiphertext(q, std::move(body));
}

inline void add_inplace(LweCiphertext& acc, const LweCiphertext& b) {
  detail::check_compatible(acc, b);
  const Modulus& q = acc.modulus();
  auto& body = acc.mutable_body();
  for (std::size_t i = 0; i < body.size(); ++i) {
    body[i] = q.add(body[i], b.body()[i]);
  }
}

// Adds a public plaintext to the message slot.
inline LweCiphertext add_plain(const LweCiphertext& c, std::uint64_t m) {
  LweCiphertext out = c;
  const Modulus& q = c.modulus();
  out.mutable_body()[0] = q.add(out.body()[0], q.reduce(m));
  return out;
}

inline LweCiphertext scalar_mult(std::int64_t k, const LweCiphertext& c) {
  const Modulus& q = c.modulus();
  const std::uint64_t kk = q.reduce(k);
  ZqVector body(c.width());
  for (std::size_t i = 0; i < body.size(); ++i) body[i] = q.mul(kk, c.body()[i]);
  return LweCiphertext(q, std::move(body));
}

inline std::vector<LweCiphertext> plain_matrix_mult(
    const IntMatrix& K, std::span<const LweCiphertext> cs) {
  if (K.cols() != cs.size()) {
    throw DomainError("plain_matrix_mult: matrix columns do not match input");
  }
  if (cs.empty()) {
    if (K.rows() != 0) {
      throw DomainError("plain_matrix_mult: cannot infer parameters from empty input");
    }
    return {};
  }
  for (const auto& c : cs) detail::check_compatible(cs[0], c);
  const Modulus& q = cs[0].modulus();
  const std::size_t w = cs[0].width();
  std::vector<LweCiphertext> out;
  out.reserve(K.rows());
  for (std::size_t i = 0; i < K.rows(); ++i) {
    ZqVector body(w, 0);
    for (std::size_t j = 0; j < K.cols(); ++j) {
      const std::uint64_t k = q.reduce(K(i, j));
      if (k == 0) continue;
      const auto& src = cs[j].body();
      for (std::size_t t = 0; t < w; ++t) body[t] += k * src[t];
    }
    for (auto& v : body) v = q.reduce(v);
    out.emplace_back(q, std::move(body));
  }
  return out;
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_LWE_HPP_
