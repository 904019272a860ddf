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

#ifndef LATTICE_CTRL_RUNTIME_HPP_
#define LATTICE_CTRL_RUNTIME_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lattice_ctrl/convert.hpp"
#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/gsw.hpp"
#include "lattice_ctrl/lwe.hpp"
#include "lattice_ctrl/params.hpp"
#include "lattice_ctrl/ring.hpp"

namespace lattice_ctrl {

// ---------------------------------------------------------------------------
// Plain reference controller

class ReferenceRuntime {
 public:
  explicit ReferenceRuntime(PlainController c) : c_(std::move(c)), x_(c_.x0) { c_.validate(); }

  VectorXd step(const VectorXd& y) {
    const VectorXd u = c_.H * x_ + c_.J * y;
    x_ = c_.F * x_ + c_.G * y;
    return u;
  }

  const VectorXd& state() const { return x_; }

 private:
  PlainController c_;
  VectorXd x_;
};

// ---------------------------------------------------------------------------
// Integer system over Z, with overflow detection

class IntegerRuntime {
 public:
  explicit IntegerRuntime(IntegerController ic) : ic_(std::move(ic)), z_(ic_.z0) {}

  // ubar(t) = Hbar z + Jbar ybar
  IntVector output(std::span<const std::int64_t> ybar) const {
    check_input(ybar);
    IntVector u(ic_.output_dim());
    for (std::size_t i = 0; i < u.size(); ++i) {
      std::int64_t acc = 0;
      for (std::size_t j = 0; j < z_.size(); ++j) acc = add(acc, mul(ic_.H(i, j), z_[j]));
      for (std::size_t j = 0; j < ybar.size(); ++j) acc = add(acc, mul(ic_.J(i, j), ybar[j]));
      u[i] = acc;
    }
    return u;
  }

  // z(t+1) = Fbar z + Gbar ybar + Rbar L [s^2 ubar / L]
  void advance(std::span<const std::int64_t> ybar, std::span<const std::int64_t> ubar) {
    check_input(ybar);
    IntVector fb(ubar.size());
    for (std::size_t i = 0; i < ubar.size(); ++i) {
      try {
        fb[i] = requantize_integer(ubar[i], ic_.scales);
      } catch (const CapacityError&) {
        throw IntegerOverflowError("feedback term left int64", t_);
      }
    }
    IntVector next(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) {
      std::int64_t acc = 0;
      for (std::size_t j = 0; j < z_.size(); ++j) acc = add(acc, mul(ic_.F(i, j), z_[j]));
      for (std::size_t j = 0; j < ybar.size(); ++j) acc = add(acc, mul(ic_.G(i, j), ybar[j]));
      for (std::size_t j = 0; j < fb.size(); ++j) acc = add(acc, mul(ic_.R(i, j), fb[j]));
      next[i] = acc;
    }
    z_ = std::move(next);
    ++t_;
  }

  IntVector step(std::span<const std::int64_t> ybar) {
    IntVector u = output(ybar);
    advance(ybar, u);
    return u;
  }

  const IntVector& state() const { return z_; }
  std::size_t time() const { return t_; }
  const IntegerController& controller() const { return ic_; }

 private:
  void check_input(std::span<const std::int64_t> ybar) const {
    if (ybar.size() != ic_.input_dim()) throw DomainError("input length mismatch");
  }
  std::int64_t add(std::int64_t a, std::int64_t b) const {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw IntegerOverflowError("integer state overflow", t_);
    return r;
  }
  std::int64_t mul(std::int64_t a, std::int64_t b) const {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw IntegerOverflowError("integer state overflow", t_);
    return r;
  }

  IntegerController ic_;
  IntVector z_;
  std::size_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Modular system over Z_q

namespace detail {

inline ZqVector zq_matvec(const ZqMatrix& A, std::span<const std::uint64_t> x, const Modulus& q) {
  ZqVector out(A.rows(), 0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    std::uint64_t acc = 0;
    for (std::size_t j = 0; j < A.cols(); ++j) acc += A(i, j) * x[j];
    out[i] = q.reduce(acc);
  }
  return out;
}

}  // namespace detail

// u = H z + J y mod q
inline ZqVector plain_modular_output(const ModularController& mc, std::span<const std::uint64_t> z,
                                     std::span<const std::uint64_t> y) {
  if (z.size() != mc.state_dim() || y.size() != mc.input_dim()) {
    throw DomainError("modular step: dimension mismatch");
  }
  ZqVector u = detail::zq_matvec(mc.H, z, mc.q);
  const ZqVector jy = detail::zq_matvec(mc.J, y, mc.q);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = mc.q.add(u[i], jy[i]);
  return u;
}

// z+ = F z + G y + R u' mod q
inline ZqVector plain_modular_advance(const ModularController& mc, std::span<const std::uint64_t> z,
                                      std::span<const std::uint64_t> y,
                                      std::span<const std::uint64_t> u_prime) {
  if (z.size() != mc.state_dim() || y.size() != mc.input_dim() ||
      u_prime.size() != mc.output_dim()) {
    throw DomainError("modular step: dimension mismatch");
  }
  ZqVector next = detail::zq_matvec(mc.F, z, mc.q);
  const ZqVector gy = detail::zq_matvec(mc.G, y, mc.q);
  const ZqVector ru = detail::zq_matvec(mc.R, u_prime, mc.q);
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = mc.q.add(next[i], mc.q.add(gy[i], ru[i]));
  }
  return next;
}

class ModularRuntime {
 public:
  explicit ModularRuntime(ModularController mc) : mc_(std::move(mc)), z_(mc_.z0) {}

  ZqVector output(std::span<const std::uint64_t> y) const { return plain_modular_output(mc_, z_, y); }

  void advance(std::span<const std::uint64_t> y, std::span<const std::uint64_t> u_prime) {
    z_ = plain_modular_advance(mc_, z_, y, u_prime);
    ++t_;
  }

  // One step with u'(t) = Q'(u(t)).
  ZqVector step(std::span<const std::uint64_t> y) {
    ZqVector u = output(y);
    const ZqVector up = requantize_output(u, mc_);
    advance(y, up);
    return u;
  }

  const ZqVector& state() const { return z_; }
  std::size_t time() const { return t_; }
  const ModularController& controller() const { return mc_; }

 private:
  ModularController mc_;
  ZqVector z_;
  std::size_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Encrypted controller

class EncryptedController {
 public:
  EncryptedController(GswMatrix F, GswMatrix G, GswMatrix H, GswMatrix J, GswMatrix R,
                      std::vector<LweCiphertext> z0, Params params, OutputBand band,
                      Scales scales)
      : F_(std::move(F)), G_(std::move(G)), H_(std::move(H)), J_(std::move(J)),
        R_(std::move(R)), z_(std::move(z0)), params_(std::move(params)),
        band_(std::move(band)), scales_(scales) {}

  // u(t) = H D(z) + J D(y)
  std::vector<LweCiphertext> output(std::span<const LweCiphertext> y) const {
    check(y, G_.cols(), "input");
    auto u = matvec_mult(H_, z_);
    const auto jy = matvec_mult(J_, y);
    for (std::size_t i = 0; i < u.size(); ++i) add_inplace(u[i], jy[i]);
    return u;
  }

  // z(t+1) = F D(z) + G D(y) + R D(u'), with u'(t) re-encrypted from u(t).
  void advance(std::span<const LweCiphertext> y, std::span<const LweCiphertext> u_prime) {
    check(y, G_.cols(), "input");
    check(u_prime, R_.cols(), "re-encrypted output");
    auto next = matvec_mult(F_, z_);
    const auto gy = matvec_mult(G_, y);
    const auto ru = matvec_mult(R_, u_prime);
    for (std::size_t i = 0; i < next.size(); ++i) {
      add_inplace(next[i], gy[i]);
      add_inplace(next[i], ru[i]);
    }
    z_ = std::move(next);
    ++t_;
  }

  const std::vector<LweCiphertext>& state() const { return z_; }
  const Params& params() const { return params_; }
  const OutputBand& band() const { return band_; }
  const Scales& scales() const { return scales_; }
  std::size_t time() const { return t_; }
  const GswMatrix& F() const { return F_; }
  const GswMatrix& G() const { return G_; }
  const GswMatrix& H() const { return H_; }
  const GswMatrix& J() const { return J_; }
  const GswMatrix& R() const { return R_; }

 private:
  void check(std::span<const LweCiphertext> v, std::size_t n, const char* what) const {
    if (v.size() != n) throw DomainError(std::string("encrypted controller: ") + what + " length mismatch");
    for (const auto& c : v) {
      if (!(c.modulus() == params_.q) || c.width() != params_.width()) {
        throw DomainError(std::string("encrypted controller: ") + what + " uses other parameters");
      }
    }
  }

  GswMatrix F_, G_, H_, J_, R_;
  std::vector<LweCiphertext> z_;
  Params params_;
  OutputBand band_;
  Scales scales_;
  std::size_t t_ = 0;
};

template <std::uniform_random_bit_generator Rng>
EncryptedController encrypt_controller(const ModularController& mc, const SecretKey& sk,
                                       const Params& params, Rng& rng) {
  params.validate();
  if (!(mc.q == params.q)) {
    throw ParameterError("controller modulus 2^" + std::to_string(mc.q.log2()) +
                         " differs from cryptosystem modulus 2^" +
                         std::to_string(params.q.log2()));
  }
  auto F = gsw_encrypt_matrix(mc.F, sk, params, rng);
  auto G = gsw_encrypt_matrix(mc.G, sk, params, rng);
  auto H = gsw_encrypt_matrix(mc.H, sk, params, rng);
  auto J = gsw_encrypt_matrix(mc.J, sk, params, rng);
  auto R = gsw_encrypt_matrix(mc.R, sk, params, rng);
  auto z0 = encrypt_vector(mc.z0, sk, params, rng);
  return EncryptedController(std::move(F), std::move(G), std::move(H), std::move(J),
                             std::move(R), std::move(z0), params, mc.band, mc.scales);
}

// u' = Enc(Q'(Dec(u)))
template <std::uniform_random_bit_generator Rng>
std::vector<LweCiphertext> reencrypt_output(std::span<const LweCiphertext> u, const SecretKey& sk,
                                            const ModularController& mc, const Params& params,
                                            Rng& rng) {
  const ZqVector dec = decrypt_vector(u, sk);
  return encrypt_vector(requantize_output(dec, mc), sk, params, rng);
}

// The trusted side of the loop: holds sk, encrypts measurements, and
// decrypts, recovers and re-encrypts controller outputs.
class TrustedEndpoint {
 public:
  TrustedEndpoint(SecretKey sk, Params params, ModularController mc, std::uint64_t seed)
      : sk_(std::move(sk)), params_(std::move(params)), mc_(std::move(mc)), rng_(seed) {}

  std::vector<LweCiphertext> encrypt_measurement(std::span<const double> y) {
    const ZqVector yq = quantize_input(y, mc_.scales.r, mc_.scales.L, mc_.q);
    return encrypt_vector(yq, sk_, params_, rng_);
  }

  ZqVector decrypt_output(std::span<const LweCiphertext> u) const { return decrypt_vector(u, sk_); }

  std::vector<double> recover(std::span<const LweCiphertext> u) const {
    return recover_output(decrypt_output(u), mc_);
  }

  std::vector<LweCiphertext> reencrypt(std::span<const LweCiphertext> u) {
    return reencrypt_output(u, sk_, mc_, params_, rng_);
  }

  const SecretKey& key() const { return sk_; }
  const ModularController& controller() const { return mc_; }

 private:
  SecretKey sk_;
  Params params_;
  ModularController mc_;
  SeededRng rng_;
};

// ---------------------------------------------------------------------------
// Plant and closed loop

struct PlantModel {
  MatrixXd A, B, C;
  VectorXd x0;
  double disturbance_amplitude = 0.0;
  double disturbance_frequency = 0.0;

  void validate() const {
    const Index n = A.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n || x0.size() != n || n == 0) {
      throw ParameterError("plant matrices have inconsistent dimensions");
    }
  }

  double disturbance(std::size_t t) const {
    return disturbance_amplitude * std::sin(disturbance_frequency * static_cast<double>(t));
  }
};

class Plant {
 public:
  explicit Plant(const PlantModel& m) : m_(m), x_(m.x0) { m_.validate(); }
  VectorXd output() const { return m_.C * x_; }
  void advance(const VectorXd& u) {
    VectorXd w = u.array() + m_.disturbance(t_);
    x_ = m_.A * x_ + m_.B * w;
    ++t_;
  }
  const VectorXd& state() const { return x_; }

 private:
  PlantModel m_;
  VectorXd x_;
  std::size_t t_ = 0;
};

// Spectral radius of the plant in feedback with the controller.
inline double closed_loop_spectral_radius(const PlantModel& p, const PlainController& c) {
  p.validate();
  c.validate();
  if (p.B.cols() != c.output_dim() || p.C.rows() != c.input_dim()) {
    throw ParameterError("plant and controller dimensions do not connect");
  }
  const Index np = p.A.rows(), nc = c.state_dim();
  MatrixXd M(np + nc, np + nc);
  M.topLeftCorner(np, np) = p.A + p.B * c.J * p.C;
  M.topRightCorner(np, nc) = p.B * c.H;
  M.bottomLeftCorner(nc, np) = c.G * p.C;
  M.bottomRightCorner(nc, nc) = c.F;
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

// Output range of the reference loop widened by margin * width per side.
inline OutputBand estimate_output_band(const PlantModel& plant, const PlainController& c,
                                       std::size_t horizon, double margin, double epsilon) {
  Plant p(plant);
  ReferenceRuntime ref(c);
  const std::size_t m = static_cast<std::size_t>(c.output_dim());
  OutputBand band{std::vector<double>(m, std::numeric_limits<double>::infinity()),
                  std::vector<double>(m, -std::numeric_limits<double>::infinity()), epsilon};
  for (std::size_t t = 0; t < std::max<std::size_t>(horizon, 1); ++t) {
    const VectorXd u = ref.step(p.output());
    for (std::size_t i = 0; i < m; ++i) {
      band.u_min[i] = std::min(band.u_min[i], u(static_cast<Index>(i)));
      band.u_max[i] = std::max(band.u_max[i], u(static_cast<Index>(i)));
    }
    p.advance(u);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double width = band.u_max[i] - band.u_min[i];
    const double pad = width > 0 ? margin * width
                                 : margin * std::max(1.0, std::fabs(band.u_max[i]));
    band.u_min[i] -= pad;
    band.u_max[i] += pad;
  }
  return band;
}

struct SimRecord {
  std::size_t t = 0;
  std::vector<double> y;
  std::vector<double> u_ref;
  std::vector<double> u_modq;
  std::vector<double> u_enc;  // empty without the encrypted loop
  double err_modq = 0.0;
  double err_enc = 0.0;
  double gap_enc = 0.0;       // ||u_enc - shadow modular output||
  bool band_violation = false;
};

struct SimSummary {
  std::size_t steps = 0;
  double sup_err_modq = 0.0;
  double sup_err_enc = 0.0;
  double sup_gap_enc = 0.0;
  double mean_gap_enc = 0.0;
  std::optional<std::size_t> first_band_violation;
  std::optional<std::size_t> integer_overflow_step;
  std::size_t integer_mismatches = 0;  // steps where u != ubar mod q
  std::size_t encrypted_mismatches = 0;  // steps where Dec(u) differs from the shadow
  bool encrypted = false;
};

struct SimTrace {
  std::vector<SimRecord> records;
  SimSummary summary;
};

struct SimulationSetup {
  PlantModel plant;
  Conversion conversion;
  std::optional<Params> crypto;  // run the encrypted loop when present
  std::size_t horizon = 0;
  std::uint64_t seed = 1;
};

namespace detail {

inline double inf_dist(std::span<const double> a, const VectorXd& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b(static_cast<Index>(i))));
  return e;
}

inline double inf_dist(std::span<const double> a, std::span<const double> b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
  return e;
}

inline std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline VectorXd to_eigen(std::span<const double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

}  // namespace detail

// Runs the reference, modular and (optionally) encrypted controllers in
// lockstep on identical plant copies. An unreduced integer runtime shadows
// the modular loop to detect band violations and overflow; a second modular
// runtime fed the encrypted loop's measurements isolates the cryptosystem
// error.
inline SimTrace closed_loop_simulate(const SimulationSetup& setup) {
  const Conversion& cv = setup.conversion;
  const ModularController& mc = cv.modular;
  SimTrace trace;
  trace.records.reserve(setup.horizon);

  Plant plant_ref(setup.plant), plant_mod(setup.plant), plant_enc(setup.plant);
  ReferenceRuntime ref(cv.original);
  ModularRuntime mod(mc);
  IntegerRuntime integer(cv.integer);
  bool integer_alive = true;

  std::optional<EncryptedController> enc;
  std::optional<TrustedEndpoint> endpoint;
  ModularRuntime shadow(mc);
  if (setup.crypto) {
    SeededRng rng(setup.seed);
    SecretKey sk = keygen(*setup.crypto, rng);
    enc.emplace(encrypt_controller(mc, sk, *setup.crypto, rng));
    endpoint.emplace(std::move(sk), *setup.crypto, mc, rng.fork(1)());
    trace.summary.encrypted = true;
  }

  const auto v0 = mc.offsets();
  const long double unit = static_cast<long double>(mc.scales.L) /
                           (static_cast<long double>(mc.scales.r) * mc.scales.s * mc.scales.s);
  double gap_sum = 0.0;

  for (std::size_t t = 0; t < setup.horizon; ++t) {
    SimRecord rec;
    rec.t = t;

    const VectorXd y_ref = plant_ref.output();
    const VectorXd u_ref = ref.step(y_ref);
    plant_ref.advance(u_ref);
    rec.y = detail::to_std(y_ref);
    rec.u_ref = detail::to_std(u_ref);

    const std::vector<double> y_mod = detail::to_std(plant_mod.output());
    const ZqVector yq = quantize_input(y_mod, mc.scales.r, mc.scales.L, mc.q);
    const ZqVector u = mod.output(yq);
    mod.advance(yq, requantize_output(u, mc));
    rec.u_modq = recover_output(u, mc);
    plant_mod.advance(detail::to_eigen(rec.u_modq));
    rec.err_modq = detail::inf_dist(rec.u_modq, u_ref);

    if (integer_alive) {
      try {
        const IntVector ybar = quantize_input_integer(y_mod, mc.scales.r, mc.scales.L);
        const IntVector ubar = integer.step(ybar);
        for (std::size_t i = 0; i < ubar.size(); ++i) {
          const long double lo = static_cast<long double>(mc.band.u_min[i]) - mc.band.epsilon;
          const long double hi = static_cast<long double>(mc.band.u_max[i]) + mc.band.epsilon;
          const long double ub = static_cast<long double>(ubar[i]);
          const bool outside_band = ub < lo * unit || ub > hi * unit;
          const bool outside_window =
              ub < v0[i] || ub >= v0[i] + static_cast<long double>(mc.q.value());
          if (outside_band || outside_window) rec.band_violation = true;
          if (mc.q.reduce(ubar[i]) != u[i]) ++trace.summary.integer_mismatches;
        }
      } catch (const IntegerOverflowError& e) {
        integer_alive = false;
        trace.summary.integer_overflow_step = t;
        rec.band_violation = true;
      } catch (const CapacityError&) {
        integer_alive = false;
        trace.summary.integer_overflow_step = t;
        rec.band_violation = true;
      }
    }

    if (enc) {
      const std::vector<double> y_enc = detail::to_std(plant_enc.output());
      const auto y_ct = endpoint->encrypt_measurement(y_enc);
      const auto u_ct = enc->output(y_ct);
      const ZqVector u_dec = endpoint->decrypt_output(u_ct);
      rec.u_enc = recover_output(u_dec, mc);
      enc->advance(y_ct, endpoint->reencrypt(u_ct));
      plant_enc.advance(detail::to_eigen(rec.u_enc));
      rec.err_enc = detail::inf_dist(rec.u_enc, u_ref);

      const ZqVector yq_enc = quantize_input(y_enc, mc.scales.r, mc.scales.L, mc.q);
      const ZqVector u_sh = shadow.output(yq_enc);
      shadow.advance(yq_enc, requantize_output(u_sh, mc));
      if (u_sh != u_dec) ++trace.summary.encrypted_mismatches;
      rec.gap_enc = detail::inf_dist(rec.u_enc, recover_output(u_sh, mc));
      gap_sum += rec.gap_enc;
    }

    SimSummary& s = trace.summary;
    s.sup_err_modq = std::max(s.sup_err_modq, rec.err_modq);
    s.sup_err_enc = std::max(s.sup_err_enc, rec.err_enc);
    s.sup_gap_enc = std::max(s.sup_gap_enc, rec.gap_enc);
    if (rec.band_violation && !s.first_band_violation) s.first_band_violation = t;
    trace.records.push_back(std::move(rec));
  }
  trace.summary.steps = setup.horizon;
  if (setup.horizon > 0) trace.summary.mean_gap_enc = gap_sum / static_cast<double>(setup.horizon);
  return trace;
}

// ---------------------------------------------------------------------------
// Scale search

struct ScaleSearchResult {
  Scales scales;
  double sup_err = 0.0;
  std::size_t evaluations = 0;
};

// Largest r = s (starting at `start`, halving, then bisecting) for which the
// modular loop tracks the reference within `tolerance` (default: the band's
// epsilon) without band violations.
inline ScaleSearchResult tune_scales(const PlantModel& plant, const PlainController& c,
                                     const OutputBand& band, std::uint64_t L, std::size_t horizon,
                                     double start = 1e-2, int bisect_steps = 8,
                                     const ConversionOptions& opt = {},
                                     std::optional<double> tolerance = std::nullopt) {
  const double tol = tolerance.value_or(band.epsilon);
  ScaleSearchResult best;
  auto passes = [&](double scale, double& err) {
    ++best.evaluations;
    try {
      SimulationSetup setup{plant, convert_controller(c, Scales{scale, scale, L}, band, opt),
                            std::nullopt, horizon, 1};
      const SimTrace tr = closed_loop_simulate(setup);
      err = tr.summary.sup_err_modq;
      return err <= tol && !tr.summary.first_band_violation;
    } catch (const CapacityError&) {
      err = std::numeric_limits<double>::infinity();
      return false;
    }
  };
  double err = 0.0;
  double hi = start;
  if (passes(hi, err)) {
    best.scales = Scales{hi, hi, L};
    best.sup_err = err;
    return best;
  }
  double lo = hi;
  for (int i = 0; i < 40; ++i) {
    lo /= 2;
    if (passes(lo, err)) break;
    hi = lo;
    if (i == 39) throw CapacityError("no passing scale found; the loop may violate its band");
  }
  best.scales = Scales{lo, lo, L};
  best.sup_err = err;
  for (int i = 0; i < bisect_steps; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (passes(mid, err)) {
      lo = mid;
      best.scales = Scales{mid, mid, L};
      best.sup_err = err;
    } else {
      hi = mid;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// The scalar recursion x(t+1) = -0.25 x(t) + 1, u = x, x(0) = 1

inline std::vector<double> example_reference_outputs(std::size_t steps) {
  std::vector<double> u;
  double x = 1.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    x = -0.25 * x + 1.0;
    u.push_back(x);
  }
  return u;
}

// Naively scaled by 100 per step: z(t+1) = -25 z(t) + 100^(t+1), z(0) = 1.
// Returns u(1..steps); throws once a value leaves 128-bit range.
inline std::vector<__int128> example_naive_outputs(std::size_t steps) {
  std::vector<__int128> u;
  __int128 z = 1, pow = 100;
  for (std::size_t t = 1; t <= steps; ++t) {
    __int128 next, term;
    if (__builtin_mul_overflow(pow, static_cast<__int128>(100), &term) ||
        __builtin_mul_overflow(z, static_cast<__int128>(-25), &next) ||
        __builtin_add_overflow(next, pow, &next)) {
      throw IntegerOverflowError("naive example left 128-bit range", t);
    }
    z = next;
    pow = term;
    u.push_back(z);
  }
  return u;
}

// First t with u(t) outside [0, q); nullopt if none within max_steps.
inline std::optional<std::size_t> example_first_overflow(std::uint64_t q, std::size_t max_steps) {
  __int128 z = 1, pow = 100;
  for (std::size_t t = 1; t <= max_steps; ++t) {
    __int128 next, term;
    if (__builtin_mul_overflow(z, static_cast<__int128>(-25), &next) ||
        __builtin_add_overflow(next, pow, &next)) {
      return t;
    }
    z = next;
    if (z < 0 || z >= static_cast<__int128>(q)) return t;
    if (__builtin_mul_overflow(pow, static_cast<__int128>(100), &term)) return t + 1;
    pow = term;
  }
  return std::nullopt;
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_RUNTIME_HPP_
