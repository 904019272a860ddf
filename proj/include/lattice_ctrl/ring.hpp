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

#ifndef LATTICE_CTRL_RING_HPP_
#define LATTICE_CTRL_RING_HPP_

#include <bit>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/matrix.hpp"

namespace lattice_ctrl {

// Power-of-two modulus q = 2^log2_q. Arithmetic wraps in uint64 and masks,
// which is exact because 2^64 is a multiple of q.
class Modulus {
 public:
  static constexpr unsigned kMinLog2 = 2;
  static constexpr unsigned kMaxLog2 = 62;

  explicit Modulus(unsigned log2_q) : log2_(log2_q) {
    if (log2_q < kMinLog2 || log2_q > kMaxLog2) {
      throw ParameterError("log2_q must lie in [" + std::to_string(kMinLog2) +
                           ", " + std::to_string(kMaxLog2) + "], got " +
                           std::to_string(log2_q));
    }
    mask_ = (std::uint64_t{1} << log2_q) - 1;
  }

  static Modulus from_value(std::uint64_t q) {
    if (q == 0 || (q & (q - 1)) != 0) {
      throw ParameterError("modulus must be a power of two, got " +
                           std::to_string(q));
    }
    return Modulus(static_cast<unsigned>(std::countr_zero(q)));
  }

  std::uint64_t value() const { return mask_ + 1; }
  unsigned log2() const { return log2_; }
  std::uint64_t mask() const { return mask_; }

  std::uint64_t reduce(std::uint64_t x) const { return x & mask_; }
  std::uint64_t reduce(std::int64_t x) const {
    return static_cast<std::uint64_t>(x) & mask_;
  }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    return (a + b) & mask_;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
    return (a - b) & mask_;
  }
  std::uint64_t neg(std::uint64_t a) const { return (0 - a) & mask_; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return (a * b) & mask_;
  }
  bool contains(std::uint64_t x) const { return x <= mask_; }

  // Representative in [-q/2, q/2).
  std::int64_t centered(std::uint64_t x) const {
    x &= mask_;
    const std::uint64_t half = value() >> 1;
    return x >= half ? static_cast<std::int64_t>(x) -
                           static_cast<std::int64_t>(value())
                     : static_cast<std::int64_t>(x);
  }

  bool operator==(const Modulus&) const = default;

 private:
  unsigned log2_ = 0;
  std::uint64_t mask_ = 0;
};

// Base nu = 2^log2_nu with d digits; valid for q when nu^(d-1) < q <= nu^d.
struct GadgetSpec {
  unsigned log2_nu = 16;
  unsigned d = 0;

  std::uint64_t nu() const { return std::uint64_t{1} << log2_nu; }

  static GadgetSpec for_modulus(const Modulus& q, unsigned log2_nu = 16) {
    if (log2_nu == 0) throw ParameterError("gadget base must be at least 2");
    return {log2_nu, (q.log2() + log2_nu - 1) / log2_nu};
  }

  void validate(const Modulus& q) const {
    if (log2_nu == 0 || log2_nu > Modulus::kMaxLog2) {
      throw ParameterError("log2_nu must lie in [1, 62]");
    }
    if (d == 0 || static_cast<unsigned long>(log2_nu) * (d - 1) >= q.log2() ||
        static_cast<unsigned long>(log2_nu) * d < q.log2()) {
      throw ParameterError("gadget requires nu^(d-1) < q <= nu^d (nu=2^" +
                           std::to_string(log2_nu) +
                           ", d=" + std::to_string(d) +
                           ", q=2^" + std::to_string(q.log2()) + ")");
    }
  }

  bool operator==(const GadgetSpec&) const = default;
};

struct NoiseSpec {
  double sigma = 0.0;
  unsigned n0 = 6;

  double bound() const { return static_cast<double>(n0) * sigma; }

  void validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw ParameterError("sigma must be a finite value >= 0");
    }
    if (n0 == 0) throw ParameterError("n0 must be positive");
  }
};

// Deterministic 64-bit stream. Identical seeds give identical draws.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static SeededRng from_entropy() {
    std::random_device rd;
    const std::uint64_t hi = rd();
    const std::uint64_t lo = rd();
    return SeededRng((hi << 32) ^ lo);
  }

  // Independent child stream, reproducible from (seed, stream).
  SeededRng fork(std::uint64_t stream) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_),
                      static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return SeededRng((std::uint64_t{words[0]} << 32) | words[1]);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  result_type operator()() {
    ++position_;
    return engine_();
  }

  void discard(std::uint64_t n) {
    engine_.discard(n);
    position_ += n;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Scalar helpers

inline std::int64_t round_nearest(long double x) {
  const long double r = std::floor(x + 0.5L);
  if (!(r >= -9223372036854775808.0L && r < 9223372036854775808.0L)) {
    throw CapacityError("rounded value does not fit in int64");
  }
  return static_cast<std::int64_t>(r);
}

inline std::vector<std::int64_t> round_nearest(std::span<const double> x) {
  std::vector<std::int64_t> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = round_nearest(x[i]);
  return out;
}

// Canonical residue for an arbitrary modulus q >= 1.
inline std::uint64_t mod_reduce(std::int64_t v, std::uint64_t q) {
  if (q == 0) throw ParameterError("modulus must be positive");
  const __int128 r = static_cast<__int128>(v) % static_cast<__int128>(q);
  return static_cast<std::uint64_t>(r < 0 ? r + q : r);
}

inline std::vector<std::uint64_t> mod_reduce(std::span<const std::int64_t> v,
                                             std::uint64_t q) {
  std::vector<std::uint64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = mod_reduce(v[i], q);
  return out;
}

inline std::vector<std::uint64_t> mod_reduce(std::span<const std::int64_t> v,
                                             const Modulus& q) {
  std::vector<std::uint64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = q.reduce(v[i]);
  return out;
}

// The representative of v mod q in [v0, v0 + q).
inline std::int64_t biased_mod(std::int64_t v, std::uint64_t q, long double v0) {
  if (q == 0) throw ParameterError("modulus must be positive");
  if (!std::isfinite(v0) || std::fabs(v0) > 1.0e30L) {
    throw DomainError("offset for biased modulo is not representable");
  }
  const __int128 c = static_cast<__int128>(std::ceil(v0));
  const __int128 qq = q;
  __int128 k = (static_cast<__int128>(v) - c) % qq;
  if (k < 0) k += qq;
  const __int128 r = c + k;
  if (r < std::numeric_limits<std::int64_t>::min() ||
      r > std::numeric_limits<std::int64_t>::max()) {
    throw CapacityError("biased modulo result does not fit in int64");
  }
  return static_cast<std::int64_t>(r);
}

inline std::vector<std::int64_t> biased_mod(std::span<const std::int64_t> v,
                                            std::uint64_t q,
                                            std::span<const long double> v0) {
  if (v.size() != v0.size()) {
    throw DomainError("biased_mod: value and offset lengths differ");
  }
  std::vector<std::int64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = biased_mod(v[i], q, v0[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Gadget decomposition. Digit i of x_j sits at index i*m + j.

inline void decompose_into(std::span<const std::uint64_t> x,
                           const GadgetSpec& g, std::span<std::uint64_t> out) {
  const std::size_t m = x.size();
  if (out.size() != m * g.d) {
    throw DomainError("decompose: output length must be m*d");
  }
  const std::uint64_t digit_mask = g.nu() - 1;
  const unsigned total_bits = g.log2_nu * g.d;
  for (std::size_t j = 0; j < m; ++j) {
    std::uint64_t v = x[j];
    if (total_bits < 64 && (v >> total_bits) != 0) {
      throw DomainError("decompose: value exceeds nu^d");
    }
    for (unsigned i = 0; i < g.d; ++i) {
      out[i * m + j] = v & digit_mask;
      v = g.log2_nu >= 64 ? 0 : v >> g.log2_nu;
    }
  }
}

inline std::vector<std::uint64_t> decompose(std::span<const std::uint64_t> x,
                                            const GadgetSpec& g) {
  std::vector<std::uint64_t> out(x.size() * g.d);
  decompose_into(x, g, out);
  return out;
}

inline std::vector<std::uint64_t> recompose(
    std::span<const std::uint64_t> digits, const GadgetSpec& g,
    const Modulus& q) {
  if (g.d == 0 || digits.size() % g.d != 0) {
    throw DomainError("recompose: digit count must be a multiple of d");
  }
  const std::size_t m = digits.size() / g.d;
  std::vector<std::uint64_t> out(m, 0);
  for (unsigned i = 0; i < g.d; ++i) {
    const unsigned shift = g.log2_nu * i;
    const std::uint64_t power = shift >= 64 ? 0 : (std::uint64_t{1} << shift);
    for (std::size_t j = 0; j < m; ++j) {
      out[j] = q.add(out[j], q.mul(digits[i * m + j], power));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

template <std::uniform_random_bit_generator Rng>
std::int64_t sample_error(const NoiseSpec& noise, Rng& rng) {
  if (noise.sigma == 0.0) return 0;
  const double bound = noise.bound();
  std::normal_distribution<double> normal(0.0, noise.sigma);
  for (;;) {
    const std::int64_t e = round_nearest(static_cast<long double>(normal(rng)));
    if (std::fabs(static_cast<double>(e)) <= bound) return e;
  }
}

template <std::uniform_random_bit_generator Rng>
std::uint64_t sample_uniform(const Modulus& q, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(0, q.mask());
  return dist(rng);
}

template <std::uniform_random_bit_generator Rng>
std::uint64_t sample_uniform(std::uint64_t q, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(0, q - 1);
  return dist(rng);
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_RING_HPP_
