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

#ifndef LATTICE_CTRL_GSW_HPP_
#define LATTICE_CTRL_GSW_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/lwe.hpp"
#include "lattice_ctrl/matrix.hpp"
#include "lattice_ctrl/params.hpp"
#include "lattice_ctrl/ring.hpp"

namespace lattice_ctrl {

// Encryption of a multiplier k: an (n+1) x d(n+1) matrix
// k*G + [sk*A + e; A] with G = [I, nu*I, ..., nu^(d-1)*I].
class GswCiphertext {
 public:
  GswCiphertext() = default;
  GswCiphertext(Modulus q, GadgetSpec gadget, ZqMatrix body)
      : q_(q), gadget_(gadget), body_(std::move(body)) {
    if (body_.cols() != body_.rows() * gadget_.d) {
      throw DomainError("GSW body must have d*(n+1) columns");
    }
  }

  const Modulus& modulus() const { return q_; }
  const GadgetSpec& gadget() const { return gadget_; }
  std::size_t width() const { return body_.rows(); }
  const ZqMatrix& body() const { return body_; }

  bool operator==(const GswCiphertext&) const = default;

 private:
  Modulus q_{2};
  GadgetSpec gadget_;
  ZqMatrix body_;
};

class GswMatrix {
 public:
  GswMatrix() = default;
  GswMatrix(std::size_t rows, std::size_t cols, std::vector<GswCiphertext> blocks)
      : rows_(rows), cols_(cols), blocks_(std::move(blocks)) {
    if (blocks_.size() != rows_ * cols_) {
      throw DomainError("GSW matrix block count does not match its shape");
    }
    for (const auto& b : blocks_) {
      if (!(b.modulus() == blocks_[0].modulus()) ||
          !(b.gadget() == blocks_[0].gadget()) ||
          b.width() != blocks_[0].width()) {
        throw DomainError("GSW matrix blocks use different parameters");
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const GswCiphertext& at(std::size_t i, std::size_t j) const {
    return blocks_[i * cols_ + j];
  }
  const std::vector<GswCiphertext>& blocks() const { return blocks_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<GswCiphertext> blocks_;
};

// Per-multiplication bound d*(n+1)*n0*sigma*nu, rounded up.
inline std::uint64_t delta_mult(const Params& p) {
  const long double v = static_cast<long double>(p.gadget.d) *
                        static_cast<long double>(p.width()) *
                        static_cast<long double>(p.noise.n0) *
                        static_cast<long double>(p.noise.sigma) *
                        static_cast<long double>(p.gadget.nu());
  const long double c = std::ceil(v);
  if (c >= 18446744073709551615.0L) {
    throw CapacityError("delta_mult does not fit in 64 bits");
  }
  return static_cast<std::uint64_t>(c);
}

// Running account of worst-case error contributions.
struct ErrorBudget {
  struct Entry {
    std::string op;
    long double bound;
  };

  std::uint64_t delta_mult = 0;
  std::vector<Entry> ledger;

  explicit ErrorBudget(const Params& p) : delta_mult(lattice_ctrl::delta_mult(p)) {}

  void charge(std::string op, long double bound) {
    ledger.push_back({std::move(op), bound});
  }
  void charge_products(std::string op, std::size_t count) {
    charge(std::move(op), static_cast<long double>(count) * delta_mult);
  }
  long double total() const {
    long double t = 0;
    for (const auto& e : ledger) t += e.bound;
    return t;
  }
};

template <std::uniform_random_bit_generator Rng>
GswCiphertext gsw_encrypt(std::uint64_t k, const SecretKey& sk,
                          const Params& params, Rng& rng) {
  if (!params.q.contains(k)) throw DomainError("multiplier outside [0, q)");
  if (sk.size() != params.n) throw DomainError("key dimension mismatch");
  const Modulus& q = params.q;
  const std::size_t w = params.width();
  const std::size_t cols = w * params.gadget.d;
  ZqMatrix body(w, cols);
  for (std::size_t r = 1; r < w; ++r) {
    for (std::size_t c = 0; c < cols; ++c) body(r, c) = sample_uniform(q, rng);
  }
  std::vector<std::uint64_t> key(sk.size());
  for (std::size_t i = 0; i < sk.size(); ++i) key[i] = q.reduce(sk[i]);
  for (std::size_t c = 0; c < cols; ++c) {
    std::uint64_t acc = 0;
    for (std::size_t r = 1; r < w; ++r) acc += key[r - 1] * body(r, c);
    body(0, c) = q.add(q.reduce(acc), q.reduce(sample_error(params.noise, rng)));
  }
  for (unsigned i = 0; i < params.gadget.d; ++i) {
    const unsigned shift = params.gadget.log2_nu * i;
    const std::uint64_t g = q.mul(k, shift >= 64 ? 0 : std::uint64_t{1} << shift);
    for (std::size_t r = 0; r < w; ++r) {
      body(r, i * w + r) = q.add(body(r, i * w + r), g);
    }
  }
  return GswCiphertext(q, params.gadget, std::move(body));
}

// [1, -sk] applied to the first gadget column: k + e, exact when sigma = 0.
inline std::uint64_t gsw_decrypt(const GswCiphertext& c, const SecretKey& sk) {
  if (c.width() != sk.size() + 1) throw DomainError("key dimension mismatch");
  const Modulus& q = c.modulus();
  std::uint64_t acc = c.body()(0, 0);
  for (std::size_t r = 1; r < c.width(); ++r) {
    acc -= q.reduce(sk[r - 1]) * c.body()(r, 0);
  }
  return q.reduce(acc);
}

namespace detail {

inline void check_gsw_lwe(const GswCiphertext& C, const LweCiphertext& c) {
  if (!(C.modulus() == c.modulus()) || C.width() != c.width()) {
    throw DomainError("GSW and LWE ciphertexts use different parameters");
  }
}

// acc += C * digits, with wraparound; caller masks.
inline void accumulate_product(const GswCiphertext& C,
                               std::span<const std::uint64_t> digits,
                               std::span<std::uint64_t> acc) {
  const ZqMatrix& B = C.body();
  const std::size_t cols = B.cols();
  for (std::size_t r = 0; r < B.rows(); ++r) {
    const std::uint64_t* row = B.row(r).data();
    std::uint64_t s = 0;
    for (std::size_t k = 0; k < cols; ++k) s += row[k] * digits[k];
    acc[r] += s;
  }
}

inline std::size_t thread_cap() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LATTICE_CTRL_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && v > 0) cap = std::min<std::size_t>(cap, v);
  }
  return cap;
}

}  // namespace detail

inline LweCiphertext external_product(const GswCiphertext& C,
                                      const LweCiphertext& c) {
  detail::check_gsw_lwe(C, c);
  const std::vector<std::uint64_t> digits = decompose(c.body(), C.gadget());
  ZqVector acc(c.width(), 0);
  detail::accumulate_product(C, digits, acc);
  for (auto& v : acc) v = C.modulus().reduce(v);
  return LweCiphertext(C.modulus(), std::move(acc));
}

template <std::uniform_random_bit_generator Rng>
GswMatrix gsw_encrypt_matrix(const ZqMatrix& F, const SecretKey& sk,
                             const Params& params, Rng& rng) {
  std::vector<GswCiphertext> blocks;
  blocks.reserve(F.size());
  for (std::size_t i = 0; i < F.rows(); ++i) {
    for (std::size_t j = 0; j < F.cols(); ++j) {
      blocks.push_back(gsw_encrypt(F(i, j), sk, params, rng));
    }
  }
  return GswMatrix(F.rows(), F.cols(), std::move(blocks));
}

// Row i is the left-to-right sum over j of EF(i,j) * D(c_j). Rows are
// independent, so the result does not depend on the thread count.
inline std::vector<LweCiphertext> matvec_mult(const GswMatrix& EF,
                                              std::span<const LweCiphertext> cs) {
  if (EF.cols() != cs.size()) {
    throw DomainError("matvec_mult: matrix columns do not match input length");
  }
  if (EF.rows() == 0) return {};
  if (cs.empty()) {
    throw DomainError("matvec_mult: empty input for a non-empty matrix");
  }
  const GswCiphertext& first = EF.at(0, 0);
  for (const auto& c : cs) detail::check_gsw_lwe(first, c);
  const Modulus& q = first.modulus();
  const std::size_t w = first.width();

  std::vector<std::vector<std::uint64_t>> digits(cs.size());
  for (std::size_t j = 0; j < cs.size(); ++j) {
    digits[j] = decompose(cs[j].body(), first.gadget());
  }

  std::vector<ZqVector> rows(EF.rows(), ZqVector(w, 0));
  auto work = [&](std::size_t i) {
    for (std::size_t j = 0; j < EF.cols(); ++j) {
      detail::accumulate_product(EF.at(i, j), digits[j], rows[i]);
    }
    for (auto& v : rows[i]) v = q.reduce(v);
  };

  const std::size_t threads = std::min(detail::thread_cap(), EF.rows());
  if (threads <= 1 || w * first.gadget().d * EF.cols() < 4096) {
    for (std::size_t i = 0; i < EF.rows(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < EF.rows(); i += threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<LweCiphertext> out;
  out.reserve(EF.rows());
  for (auto& r : rows) out.emplace_back(q, std::move(r));
  return out;
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_GSW_HPP_
