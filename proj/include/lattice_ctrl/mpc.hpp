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

#ifndef LATTICE_CTRL_MPC_HPP_
#define LATTICE_CTRL_MPC_HPP_

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/lwe.hpp"
#include "lattice_ctrl/matrix.hpp"
#include "lattice_ctrl/params.hpp"
#include "lattice_ctrl/ring.hpp"

namespace lattice_ctrl::mpc {

// ---------------------------------------------------------------------------
// Additive secret sharing over Z_q for any q >= 2.

struct SharePair {
  std::uint64_t c1 = 0;
  std::uint64_t c2 = 0;
  bool operator==(const SharePair&) const = default;
};

struct ShareVector {
  ZqVector c1;
  ZqVector c2;
  bool operator==(const ShareVector&) const = default;
};

namespace detail {

inline void check_q(std::uint64_t q) {
  if (q < 2) throw ParameterError("sharing modulus must be at least 2");
}

inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) + b) % q);
}

inline std::uint64_t neg_mod(std::uint64_t a, std::uint64_t q) { return a == 0 ? 0 : q - a; }

inline void check_element(std::uint64_t m, std::uint64_t q) {
  if (m >= q) throw DomainError("value outside [0, q)");
}

}  // namespace detail

// c1 = m + r, c2 = -r (mod q) for a given mask r.
inline SharePair share_with(std::uint64_t m, std::uint64_t r, std::uint64_t q) {
  detail::check_q(q);
  detail::check_element(m, q);
  detail::check_element(r, q);
  return {detail::add_mod(m, r, q), detail::neg_mod(r, q)};
}

template <std::uniform_random_bit_generator Rng>
SharePair share(std::uint64_t m, std::uint64_t q, Rng& rng) {
  detail::check_q(q);
  return share_with(m, sample_uniform(q, rng), q);
}

inline std::uint64_t reconstruct(const SharePair& p, std::uint64_t q) {
  detail::check_q(q);
  detail::check_element(p.c1, q);
  detail::check_element(p.c2, q);
  return detail::add_mod(p.c1, p.c2, q);
}

// Each unit adds its own shares.
inline SharePair share_add(const SharePair& a, const SharePair& b, std::uint64_t q) {
  detail::check_q(q);
  return {detail::add_mod(a.c1, b.c1, q), detail::add_mod(a.c2, b.c2, q)};
}

template <std::uniform_random_bit_generator Rng>
ShareVector share_vector(std::span<const std::uint64_t> m, std::uint64_t q, Rng& rng) {
  ShareVector out;
  out.c1.reserve(m.size());
  out.c2.reserve(m.size());
  for (auto v : m) {
    const SharePair p = share(v, q, rng);
    out.c1.push_back(p.c1);
    out.c2.push_back(p.c2);
  }
  return out;
}

inline ZqVector reconstruct_vector(const ShareVector& s, std::uint64_t q) {
  if (s.c1.size() != s.c2.size()) throw DomainError("share vectors differ in length");
  ZqVector out(s.c1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = reconstruct({s.c1[i], s.c2[i]}, q);
  return out;
}

namespace detail {

inline ZqVector int_matvec_mod(const IntMatrix& K, std::span<const std::uint64_t> x,
                               std::uint64_t q) {
  ZqVector out(K.rows(), 0);
  const __int128 qq = q;
  for (std::size_t i = 0; i < K.rows(); ++i) {
    __int128 acc = 0;
    for (std::size_t j = 0; j < K.cols(); ++j) {
      __int128 k = K(i, j) % qq;
      if (k < 0) k += qq;
      acc = (acc + k * static_cast<__int128>(x[j])) % qq;
    }
    out[i] = static_cast<std::uint64_t>(acc);
  }
  return out;
}

}  // namespace detail

// K c1 and K c2, computed separately by each unit.
inline ShareVector share_matmul(const IntMatrix& K, const ShareVector& s, std::uint64_t q) {
  detail::check_q(q);
  if (s.c1.size() != s.c2.size() || K.cols() != s.c1.size()) {
    throw DomainError("share_matmul: matrix columns do not match shares");
  }
  return {detail::int_matvec_mod(K, s.c1, q), detail::int_matvec_mod(K, s.c2, q)};
}

// ---------------------------------------------------------------------------
// Transcript

// 64-bit FNV-1a over the little-endian ciphertext words.
inline std::uint64_t digest(const LweCiphertext& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t w : c.body()) {
    for (int b = 0; b < 8; ++b) {
      h ^= (w >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

struct Message {
  std::size_t seq = 0;
  std::string from;
  std::string to;
  std::string kind;
  std::vector<LweCiphertext> ciphertexts;
};

class Transcript {
 public:
  void append(const Message& m) { entries_.push_back(m); }
  const std::vector<Message>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : entries_) {
      nlohmann::json digests = nlohmann::json::array();
      for (const auto& c : m.ciphertexts) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest(c)));
        digests.push_back(buf);
      }
      out.push_back({{"seq", m.seq}, {"from", m.from}, {"to", m.to}, {"kind", m.kind},
                     {"ciphertexts", digests}});
    }
    return out;
  }

 private:
  std::vector<Message> entries_;
};

// Synchronous in-process queue; every message is recorded.
class Channel {
 public:
  void send(std::string from, std::string to, std::string kind,
            std::vector<LweCiphertext> cts) {
    Message m{next_seq_++, std::move(from), std::move(to), std::move(kind), std::move(cts)};
    transcript_.append(m);
    queue_.push_back(std::move(m));
  }

  Message receive(const std::string& to, const std::string& kind) {
    if (queue_.empty()) throw ProtocolError(to + " expected \"" + kind + "\" but nothing was sent");
    const Message& front = queue_.front();
    if (front.to != to || front.kind != kind) {
      throw ProtocolError(to + " expected \"" + kind + "\" but next message is \"" +
                          front.kind + "\" for " + front.to);
    }
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

  bool empty() const { return queue_.empty(); }
  const Transcript& transcript() const { return transcript_; }

 private:
  std::deque<Message> queue_;
  Transcript transcript_;
  std::size_t next_seq_ = 0;
};

// ---------------------------------------------------------------------------
// Two-party multiplication of encrypted values

inline constexpr const char* kKeyHolder = "unit1";
inline constexpr const char* kEvaluator = "unit2";

// Holds sk. Sees only masked plaintexts.
class KeyHolder {
 public:
  KeyHolder(SecretKey sk, Params params, std::uint64_t seed)
      : sk_(std::move(sk)), params_(std::move(params)), rng_(seed) {
    if (!params_.insecure()) {
      throw ParameterError("the two-party demo runs with sigma = 0 (pass an insecure parameter set)");
    }
  }

  void send_inputs(std::uint64_t x1, std::uint64_t x2, Channel& ch) {
    if (!params_.q.contains(x1) || !params_.q.contains(x2)) throw DomainError("inputs outside [0, q)");
    ops_.push_back("encrypt");
    ops_.push_back("encrypt");
    ch.send(kKeyHolder, kEvaluator, "inputs",
            {encrypt(x1, sk_, params_, rng_), encrypt(x2, sk_, params_, rng_)});
  }

  // Decrypts the masked pair, multiplies, and returns Enc((x1+r1)(x2+r2)).
  void respond(Channel& ch) {
    const Message m = ch.receive(kKeyHolder, "masked");
    if (m.ciphertexts.size() != 2) throw ProtocolError("masked message must carry two ciphertexts");
    ops_.push_back("decrypt");
    ops_.push_back("decrypt");
    const std::uint64_t a = decrypt(m.ciphertexts[0], sk_);
    const std::uint64_t b = decrypt(m.ciphertexts[1], sk_);
    views_.emplace_back(a, b);
    ops_.push_back("multiply_plain");
    ops_.push_back("encrypt");
    ch.send(kKeyHolder, kEvaluator, "product", {encrypt(params_.q.mul(a, b), sk_, params_, rng_)});
  }

  std::uint64_t reveal(const LweCiphertext& c) {
    ops_.push_back("decrypt");
    return decrypt(c, sk_);
  }

  const std::vector<std::pair<std::uint64_t, std::uint64_t>>& views() const { return views_; }
  const std::vector<std::string>& ops() const { return ops_; }
  const Params& params() const { return params_; }

 private:
  SecretKey sk_;
  Params params_;
  SeededRng rng_;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> views_;
  std::vector<std::string> ops_;
};

// Holds ciphertexts only; performs additions and scalar multiplications.
class Evaluator {
 public:
  enum class Stage { kIdle, kHasInputs, kMasked, kDone };

  Evaluator(Params params, std::uint64_t seed) : params_(std::move(params)), rng_(seed) {}

  void receive_inputs(Channel& ch) {
    if (stage_ != Stage::kIdle && stage_ != Stage::kDone) {
      throw ProtocolError("evaluator is mid-protocol");
    }
    const Message m = ch.receive(kEvaluator, "inputs");
    if (m.ciphertexts.size() != 2) throw ProtocolError("inputs message must carry two ciphertexts");
    x1_ = m.ciphertexts[0];
    x2_ = m.ciphertexts[1];
    stage_ = Stage::kHasInputs;
  }

  // Sends Enc(x1 + r1), Enc(x2 + r2).
  void send_masked(Channel& ch) {
    if (stage_ != Stage::kHasInputs) throw ProtocolError("mask requested before inputs arrived");
    r1_ = sample_uniform(params_.q, rng_);
    r2_ = sample_uniform(params_.q, rng_);
    ops_.push_back("add_plain");
    ops_.push_back("add_plain");
    ch.send(kEvaluator, kKeyHolder, "masked", {add_plain(x1_, r1_), add_plain(x2_, r2_)});
    stage_ = Stage::kMasked;
  }

  // Enc(x1 x2) = Enc(p) - r1 Enc(x2) - r2 Enc(x1) - r1 r2.
  LweCiphertext finish(Channel& ch) {
    if (stage_ != Stage::kMasked) throw ProtocolError("product received before masking");
    const Message m = ch.receive(kEvaluator, "product");
    if (m.ciphertexts.size() != 1) throw ProtocolError("product message must carry one ciphertext");
    const Modulus& q = params_.q;
    ops_.push_back("scalar_mult");
    ops_.push_back("scalar_mult");
    ops_.push_back("sub");
    ops_.push_back("sub");
    ops_.push_back("add_plain");
    LweCiphertext out = sub(m.ciphertexts[0], scalar_mult(static_cast<std::int64_t>(r1_), x2_));
    out = sub(out, scalar_mult(static_cast<std::int64_t>(r2_), x1_));
    out = add_plain(out, q.neg(q.mul(r1_, r2_)));
    stage_ = Stage::kDone;
    return out;
  }

  Stage stage() const { return stage_; }
  const std::vector<std::string>& ops() const { return ops_; }

 private:
  Params params_;
  SeededRng rng_;
  Stage stage_ = Stage::kIdle;
  LweCiphertext x1_, x2_;
  std::uint64_t r1_ = 0, r2_ = 0;
  std::vector<std::string> ops_;
};

// Runs one multiplication; the result ciphertext is held by the evaluator.
inline LweCiphertext two_party_mult(std::uint64_t x1, std::uint64_t x2, KeyHolder& unit1,
                                    Evaluator& unit2, Channel& ch) {
  unit1.send_inputs(x1, x2, ch);
  unit2.receive_inputs(ch);
  unit2.send_masked(ch);
  unit1.respond(ch);
  return unit2.finish(ch);
}

// True when the evaluator's log holds only homomorphic operations.
inline bool evaluator_audit_clean(const Evaluator& e) {
  for (const auto& op : e.ops()) {
    if (op != "add_plain" && op != "scalar_mult" && op != "sub" && op != "add") return false;
  }
  return true;
}

}  // namespace lattice_ctrl::mpc

#endif  // LATTICE_CTRL_MPC_HPP_
