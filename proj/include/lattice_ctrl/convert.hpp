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

#ifndef LATTICE_CTRL_CONVERT_HPP_
#define LATTICE_CTRL_CONVERT_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/gsw.hpp"
#include "lattice_ctrl/matrix.hpp"
#include "lattice_ctrl/params.hpp"
#include "lattice_ctrl/ring.hpp"

namespace lattice_ctrl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// x(t+1) = F x(t) + G y(t),  u(t) = H x(t) + J y(t),  x(0) = x0.
struct PlainController {
  MatrixXd F, G, H, J;
  VectorXd x0;

  Index state_dim() const { return F.rows(); }
  Index input_dim() const { return G.cols(); }
  Index output_dim() const { return H.rows(); }

  void validate() const {
    const Index l = F.rows();
    if (F.cols() != l || G.rows() != l || H.cols() != l || J.rows() != H.rows() ||
        J.cols() != G.cols() || x0.size() != l) {
      throw ParameterError("controller matrices have inconsistent dimensions");
    }
    if (l == 0 || H.rows() == 0 || G.cols() == 0) {
      throw ParameterError("controller needs at least one state, input and output");
    }
    if (!F.allFinite() || !G.allFinite() || !H.allFinite() || !J.allFinite() ||
        !x0.allFinite()) {
      throw ParameterError("controller matrices contain non-finite values");
    }
  }
};

// Scale factors: 1/r for signals, 1/s for parameters, L for messages.
struct Scales {
  double r = 1.0;
  double s = 1.0;
  std::uint64_t L = 1;

  void validate() const {
    if (!(r > 0.0) || !(s > 0.0) || !std::isfinite(r) || !std::isfinite(s)) {
      throw ParameterError("scales r and s must be positive");
    }
    if (L == 0) throw ParameterError("scale L must be a positive integer");
  }
};

struct OutputBand {
  std::vector<double> u_min;
  std::vector<double> u_max;
  double epsilon = 0.0;

  std::size_t size() const { return u_min.size(); }

  void validate(std::size_t m) const {
    if (u_min.size() != m || u_max.size() != m) {
      throw ParameterError("output band must have one entry per controller output");
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!(u_max[i] >= u_min[i])) throw ParameterError("output band needs u_max >= u_min");
    }
    if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be non-negative");
  }
};

// ---------------------------------------------------------------------------
// Observability

// [H; HF; ...; HF^(l-1)]
inline MatrixXd observability_matrix(const MatrixXd& F, const MatrixXd& H) {
  const Index l = F.rows(), m = H.rows();
  MatrixXd O(m * l, l);
  MatrixXd block = H;
  for (Index k = 0; k < l; ++k) {
    O.middleRows(k * m, m) = block;
    block = block * F;
  }
  return O;
}

inline Index numerical_rank(const MatrixXd& A, double rel_tol) {
  if (A.size() == 0) return 0;
  const double scale = A.norm();
  if (scale == 0.0) return 0;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
  qr.setThreshold(rel_tol * scale / std::max(qr.maxPivot(), 1e-300));
  return qr.rank();
}

inline Index observability_rank(const MatrixXd& F, const MatrixXd& H,
                                 double rel_tol = 1e-9) {
  return numerical_rank(observability_matrix(F, H), rel_tol);
}

inline double condition_number(const MatrixXd& A) {
  Eigen::JacobiSVD<MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double lo = sv(sv.size() - 1);
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : sv(0) / lo;
}

struct ObservableReduction {
  PlainController reduced;
  Index original_dim = 0;
  Index rank = 0;
  MatrixXd W1;  // rank x original_dim, orthonormal rows

  bool changed() const { return rank != original_dim; }
};

// Keeps the observable part z1 = W1 x, with W1 spanning the row space of the
// observability matrix.
inline ObservableReduction observable_reduce_detailed(const PlainController& c,
                                                      double rel_tol = 1e-9) {
  c.validate();
  const Index l = c.state_dim();
  const MatrixXd O = observability_matrix(c.F, c.H);
  ObservableReduction out;
  out.original_dim = l;
  const double scale = O.norm();
  if (scale == 0.0) {
    throw PreconditionError("controller output does not depend on its state");
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(O.transpose());
  qr.setThreshold(rel_tol * scale / std::max(qr.maxPivot(), 1e-300));
  out.rank = qr.rank();
  if (out.rank == l) {
    out.reduced = c;
    out.W1 = MatrixXd::Identity(l, l);
    return out;
  }
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(l, l);
  MatrixXd W1 = Q.leftCols(out.rank).transpose();
  for (Index i = 0; i < W1.rows(); ++i) {
    Index arg = 0;
    W1.row(i).cwiseAbs().maxCoeff(&arg);
    if (W1(i, arg) < 0) W1.row(i) *= -1.0;
  }
  out.W1 = W1;
  out.reduced.F = W1 * c.F * W1.transpose();
  out.reduced.G = W1 * c.G;
  out.reduced.H = c.H * W1.transpose();
  out.reduced.J = c.J;
  out.reduced.x0 = W1 * c.x0;
  return out;
}

inline PlainController observable_reduce(const PlainController& c, double rel_tol = 1e-9) {
  return observable_reduce_detailed(c, rel_tol).reduced;
}

// ---------------------------------------------------------------------------
// Integer reparametrization: choose R, T with T(F - RH)T^-1 integer.

enum class TargetKind {
  kEigenvalues,            // eigenvalues of F - RH
  kCompanionCoefficients,  // last column k of the companion form (single output)
};

struct ReparamOptions {
  double residual_tol = 1e-6;
  double max_condition = 1e8;
  double rank_tol = 1e-9;
  std::uint64_t seed = 0x51ed2701;
};

struct ReparamResult {
  MatrixXd T;
  MatrixXd T_inv;
  MatrixXd R;
  IntMatrix Fint;
  double residual = 0.0;   // max |T(F-RH)T^-1 - Fint| before rounding
  double condition = 1.0;  // 2-norm condition number of T
  bool companion = true;   // single-output canonical-form path
};

namespace detail {

inline MatrixXd companion(const VectorXd& a) {
  const Index l = a.size();
  MatrixXd A = MatrixXd::Zero(l, l);
  for (Index i = 0; i + 1 < l; ++i) A(i + 1, i) = 1.0;
  A.col(l - 1) = a;
  return A;
}

// Coefficients k with prod (s - lambda_i) = s^l - sum_j k_(j+1) s^j.
inline std::vector<std::int64_t> coefficients_from_roots(std::span<const std::int64_t> roots) {
  std::vector<__int128> c{1};  // monic, c[j] multiplies s^j
  for (auto lam : roots) {
    std::vector<__int128> next(c.size() + 1, 0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += c[j];
      next[j] -= c[j] * lam;
    }
    for (auto v : next) {
      if (v > (static_cast<__int128>(1) << 62) || v < -(static_cast<__int128>(1) << 62)) {
        throw CapacityError("characteristic polynomial coefficients overflow");
      }
    }
    c = std::move(next);
  }
  std::vector<std::int64_t> k(roots.size());
  for (std::size_t j = 0; j < roots.size(); ++j) k[j] = static_cast<std::int64_t>(-c[j]);
  return k;
}

struct CompanionFit {
  MatrixXd T, T_inv, R;  // R is l x 1
};

// Observable canonical form for a single output row h; returns R placing
// the companion coefficients k.
inline CompanionFit companion_fit(const MatrixXd& F, const MatrixXd& h,
                                  std::span<const std::int64_t> k) {
  const Index l = F.rows();
  const MatrixXd O = observability_matrix(F, h);
  Eigen::FullPivLU<MatrixXd> lu(O);
  if (!lu.isInvertible()) throw PreconditionError("pair (F, H) is not observable");
  MatrixXd Fl = MatrixXd::Identity(l, l);
  for (Index i = 0; i < l; ++i) Fl = Fl * F;
  const VectorXd a = O.transpose().fullPivLu().solve((h * Fl).transpose());
  MatrixXd Co = MatrixXd::Zero(1, l);
  Co(0, l - 1) = 1.0;
  const MatrixXd Oo = observability_matrix(companion(a), Co);
  CompanionFit fit;
  fit.T = Oo.fullPivLu().solve(O);
  fit.T_inv = fit.T.fullPivLu().inverse();
  VectorXd diff(l);
  for (Index i = 0; i < l; ++i) diff(i) = a(i) - static_cast<double>(k[i]);
  fit.R = fit.T_inv * diff;
  return fit;
}

inline double max_abs_residual(const MatrixXd& A, const IntMatrix& B) {
  double r = 0.0;
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      r = std::max(r, std::fabs(A(i, j) - static_cast<double>(B(i, j))));
    }
  }
  return r;
}

inline void finish_reparam(ReparamResult& out, const MatrixXd& F, const MatrixXd& H,
                           const ReparamOptions& opt) {
  out.condition = condition_number(out.T);
  if (!(out.condition <= opt.max_condition)) {
    std::ostringstream msg;
    msg << "transformation T is ill-conditioned (cond = " << out.condition
        << " > " << opt.max_condition << "); choose different integer targets";
    throw ConditioningError(msg.str(), out.condition);
  }
  const MatrixXd M = out.T * (F - out.R * H) * out.T_inv;
  out.residual = max_abs_residual(M, out.Fint);
  if (!(out.residual <= opt.residual_tol)) {
    std::ostringstream msg;
    msg << "T(F-RH)T^-1 deviates from the integer target by " << out.residual
        << " (tolerance " << opt.residual_tol << ", cond(T) = " << out.condition << ")";
    throw ConditioningError(msg.str(), out.condition);
  }
}

}  // namespace detail

inline ReparamResult integer_reparam(const MatrixXd& F, const MatrixXd& H,
                                     std::span<const std::int64_t> targets = {},
                                     const ReparamOptions& opt = {},
                                     TargetKind kind = TargetKind::kEigenvalues) {
  const Index l = F.rows(), m = H.rows();
  if (F.cols() != l || H.cols() != l || l == 0 || m == 0) {
    throw ParameterError("integer_reparam: F must be square and H must have matching columns");
  }
  if (!targets.empty() && static_cast<Index>(targets.size()) != l) {
    throw ParameterError("integer_reparam: need one target per state");
  }
  if (numerical_rank(observability_matrix(F, H), opt.rank_tol) != l) {
    throw PreconditionError("pair (F, H) is not observable; reduce it first");
  }
  std::vector<std::int64_t> tv(targets.begin(), targets.end());
  if (tv.empty()) tv.assign(static_cast<std::size_t>(l), 0);

  ReparamResult out;
  if (m == 1) {
    const std::vector<std::int64_t> k =
        kind == TargetKind::kEigenvalues ? detail::coefficients_from_roots(tv) : tv;
    const auto fit = detail::companion_fit(F, H, k);
    out.T = fit.T;
    out.T_inv = fit.T_inv;
    out.R = fit.R;
    out.Fint = IntMatrix(l, l, 0);
    for (Index i = 0; i + 1 < l; ++i) out.Fint(i + 1, i) = 1;
    for (Index i = 0; i < l; ++i) out.Fint(i, l - 1) = k[i];
    out.companion = true;
    detail::finish_reparam(out, F, H, opt);
    return out;
  }

  if (kind != TargetKind::kEigenvalues) {
    throw ParameterError("multi-output controllers take eigenvalue targets");
  }
  if (targets.empty()) {
    throw ParameterError("multi-output controllers need distinct integer eigenvalue targets");
  }
  {
    auto sorted = tv;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ParameterError("eigenvalue targets must be distinct integers");
    }
  }

  // Reduce to a single output row w^T H that keeps (F', w^T H) observable,
  // optionally after a random pre-feedback R0.
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double fscale = std::max(F.norm(), 1.0) / std::max(H.norm(), 1e-300);
  MatrixXd R0 = MatrixXd::Zero(l, m);
  VectorXd w;
  bool found = false;
  for (int attempt = 0; attempt < 8 && !found; ++attempt) {
    if (attempt > 0) {
      for (Index i = 0; i < l; ++i) {
        for (Index j = 0; j < m; ++j) R0(i, j) = fscale * normal(rng);
      }
    }
    const MatrixXd Fp = F - R0 * H;
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < m + 16; ++c) {
      VectorXd cand = VectorXd::Zero(m);
      if (c < m) {
        cand(c) = 1.0;
      } else {
        for (Index j = 0; j < m; ++j) cand(j) = normal(rng);
      }
      const MatrixXd O = observability_matrix(Fp, cand.transpose() * H);
      if (numerical_rank(O, opt.rank_tol) != l) continue;
      const double cond = condition_number(O);
      if (cond < best) {
        best = cond;
        w = cand;
      }
    }
    found = std::isfinite(best);
  }
  if (!found) throw ConditioningError("no single-output projection keeps the pair observable",
                                      std::numeric_limits<double>::infinity());

  const MatrixXd Fp = F - R0 * H;
  const MatrixXd h = w.transpose() * H;
  const auto fit = detail::companion_fit(Fp, h, detail::coefficients_from_roots(tv));
  out.R = R0 + fit.R * w.transpose();
  const MatrixXd M = F - out.R * H;

  Eigen::EigenSolver<MatrixXd> es(M);
  const auto ev = es.eigenvalues();
  const auto evec = es.eigenvectors();
  MatrixXd V(l, l);
  std::vector<bool> used(static_cast<std::size_t>(l), false);
  for (Index t = 0; t < l; ++t) {
    Index pick = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < l; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double d = std::abs(ev(i) - std::complex<double>(static_cast<double>(tv[t]), 0.0));
      if (d < dist) {
        dist = d;
        pick = i;
      }
    }
    used[static_cast<std::size_t>(pick)] = true;
    VectorXd col = evec.col(pick).real();
    Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    col /= col(arg);
    V.col(t) = col / col.norm();
  }
  out.T_inv = V;
  out.T = V.fullPivLu().inverse();
  out.Fint = IntMatrix(l, l, 0);
  for (Index i = 0; i < l; ++i) out.Fint(i, i) = tv[static_cast<std::size_t>(i)];
  out.companion = false;
  detail::finish_reparam(out, F, H, opt);
  return out;
}

// ---------------------------------------------------------------------------
// Quantization over Z

struct IntegerController {
  IntMatrix F, G, R, H, J;
  IntVector z0;
  Scales scales;

  std::size_t state_dim() const { return F.rows(); }
  std::size_t input_dim() const { return G.cols(); }
  std::size_t output_dim() const { return H.rows(); }
};

namespace detail {

inline IntMatrix round_scaled(const MatrixXd& A, long double divisor) {
  IntMatrix out(static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()));
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      out(i, j) = round_nearest(static_cast<long double>(A(i, j)) / divisor);
    }
  }
  return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::uint64_t b) {
  const __int128 p = static_cast<__int128>(a) * static_cast<__int128>(b);
  if (p > std::numeric_limits<std::int64_t>::max() ||
      p < std::numeric_limits<std::int64_t>::min()) {
    throw CapacityError("scaled value does not fit in int64; use a smaller L");
  }
  return static_cast<std::int64_t>(p);
}

}  // namespace detail

// Fbar = Fint, Gbar = [T(G-RJ)/s], Rbar = [TR/s], Hbar = [HT^-1/s],
// Jbar = [J/s^2], z0bar = L [T x0 / (rs)].
inline IntegerController quantize_controller(const PlainController& c, const ReparamResult& rp,
                                             const Scales& sc) {
  c.validate();
  sc.validate();
  if (rp.T.rows() != c.state_dim() || rp.R.cols() != c.output_dim()) {
    throw ParameterError("reparametrization does not match controller dimensions");
  }
  const long double s = sc.s, r = sc.r;
  IntegerController ic;
  ic.scales = sc;
  ic.F = rp.Fint;
  ic.G = detail::round_scaled(rp.T * (c.G - rp.R * c.J), s);
  ic.R = detail::round_scaled(rp.T * rp.R, s);
  ic.H = detail::round_scaled(c.H * rp.T_inv, s);
  ic.J = detail::round_scaled(c.J, s * s);
  const VectorXd tx0 = rp.T * c.x0;
  ic.z0.resize(static_cast<std::size_t>(tx0.size()));
  for (Index i = 0; i < tx0.size(); ++i) {
    ic.z0[static_cast<std::size_t>(i)] =
        detail::checked_mul(round_nearest(static_cast<long double>(tx0(i)) / (r * s)), sc.L);
  }
  return ic;
}

// ybar = L [y / r]
inline IntVector quantize_input_integer(std::span<const double> y, double r, std::uint64_t L) {
  IntVector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = detail::checked_mul(
        round_nearest(static_cast<long double>(y[i]) / static_cast<long double>(r)), L);
  }
  return out;
}

// L [ (s^2 / L) ubar ], the feedback term of the integer system.
inline std::int64_t requantize_integer(std::int64_t ubar, const Scales& sc) {
  const long double s = sc.s;
  const long double v = s * s * static_cast<long double>(ubar) / static_cast<long double>(sc.L);
  return detail::checked_mul(round_nearest(v), sc.L);
}

// Q(y) = L [y / r] mod q
inline ZqVector quantize_input(std::span<const double> y, double r, std::uint64_t L,
                               const Modulus& q) {
  const IntVector v = quantize_input_integer(y, r, L);
  return mod_reduce(v, q);
}

// ---------------------------------------------------------------------------
// Modulus selection and projection onto Z_q

// max_i L (u_max - u_min + 2 eps) / (r s^2) + 1
inline long double modulus_bound(const OutputBand& band, const Scales& sc) {
  sc.validate();
  long double worst = 0;
  const long double denom = static_cast<long double>(sc.r) * sc.s * sc.s;
  for (std::size_t i = 0; i < band.size(); ++i) {
    const long double span =
        static_cast<long double>(band.u_max[i]) - band.u_min[i] + 2.0L * band.epsilon;
    worst = std::max(worst, static_cast<long double>(sc.L) * span / denom);
  }
  return worst + 1.0L;
}

inline Modulus select_modulus(const OutputBand& band, const Scales& sc) {
  band.validate(band.size());
  const long double bound = modulus_bound(band, sc);
  for (unsigned k = Modulus::kMinLog2; k <= Modulus::kMaxLog2; ++k) {
    if (std::ldexp(1.0L, static_cast<int>(k)) >= bound) return Modulus(k);
  }
  std::ostringstream msg;
  msg << "required modulus " << bound << " exceeds 2^" << Modulus::kMaxLog2
      << "; increase s or r, or decrease L";
  throw CapacityError(msg.str());
}

struct ModularController {
  Modulus q{2};
  ZqMatrix F, G, H, J, R;
  ZqVector z0;
  OutputBand band;
  Scales scales;

  std::size_t state_dim() const { return F.rows(); }
  std::size_t input_dim() const { return G.cols(); }
  std::size_t output_dim() const { return H.rows(); }

  // Lower ends L (u_min - eps) / (r s^2) of the recovery windows.
  std::vector<long double> offsets() const {
    std::vector<long double> v(band.size());
    const long double denom = static_cast<long double>(scales.r) * scales.s * scales.s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = static_cast<long double>(scales.L) *
             (static_cast<long double>(band.u_min[i]) - band.epsilon) / denom;
    }
    return v;
  }
};

namespace detail {

inline ZqMatrix reduce_matrix(const IntMatrix& A, const Modulus& q) {
  ZqMatrix out(A.rows(), A.cols());
  for (std::size_t k = 0; k < A.size(); ++k) out.data()[k] = q.reduce(A.data()[k]);
  return out;
}

}  // namespace detail

inline ModularController project_mod_q(const IntegerController& ic, const Modulus& q,
                                       const OutputBand& band) {
  band.validate(ic.output_dim());
  ModularController mc;
  mc.q = q;
  mc.F = detail::reduce_matrix(ic.F, q);
  mc.G = detail::reduce_matrix(ic.G, q);
  mc.H = detail::reduce_matrix(ic.H, q);
  mc.J = detail::reduce_matrix(ic.J, q);
  mc.R = detail::reduce_matrix(ic.R, q);
  mc.z0 = mod_reduce(ic.z0, q);
  mc.band = band;
  mc.scales = ic.scales;
  return mc;
}

// ubar recovered from u via the biased window.
inline IntVector unwrap_output(std::span<const std::uint64_t> u, const ModularController& mc) {
  if (u.size() != mc.output_dim()) throw DomainError("output length mismatch");
  const auto v0 = mc.offsets();
  IntVector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = biased_mod(static_cast<std::int64_t>(u[i]), mc.q.value(), v0[i]);
  }
  return out;
}

// Q'(u) = L [ (s^2 / L) (u mod(q, v0)) ] mod q
inline ZqVector requantize_output(std::span<const std::uint64_t> u, const ModularController& mc) {
  const IntVector ubar = unwrap_output(u, mc);
  ZqVector out(ubar.size());
  for (std::size_t i = 0; i < ubar.size(); ++i) {
    out[i] = mc.q.reduce(requantize_integer(ubar[i], mc.scales));
  }
  return out;
}

// g(u) = (r s^2 / L) (u mod(q, v0))
inline std::vector<double> recover_output(std::span<const std::uint64_t> u,
                                          const ModularController& mc) {
  const IntVector ubar = unwrap_output(u, mc);
  const long double f = static_cast<long double>(mc.scales.r) * mc.scales.s * mc.scales.s /
                        static_cast<long double>(mc.scales.L);
  std::vector<double> out(ubar.size());
  for (std::size_t i = 0; i < ubar.size(); ++i) {
    out[i] = static_cast<double>(f * static_cast<long double>(ubar[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct ConversionOptions {
  std::vector<std::int64_t> targets;  // empty: all zeros (single output)
  TargetKind target_kind = TargetKind::kEigenvalues;
  ReparamOptions reparam;
};

struct Conversion {
  PlainController original;
  ObservableReduction reduction;
  ReparamResult reparam;
  IntegerController integer;
  ModularController modular;
  long double modulus_bound = 0;
};

// Reduce, reparametrize, quantize, size q and project.
inline Conversion convert_controller(const PlainController& c, const Scales& sc,
                                     const OutputBand& band,
                                     const ConversionOptions& opt = {}) {
  c.validate();
  sc.validate();
  band.validate(static_cast<std::size_t>(c.output_dim()));
  Conversion out;
  out.original = c;
  out.reduction = observable_reduce_detailed(c, opt.reparam.rank_tol);
  const PlainController& rc = out.reduction.reduced;
  if (!opt.targets.empty() && static_cast<Index>(opt.targets.size()) != rc.state_dim()) {
    throw ParameterError("targets must match the observable state dimension (" +
                         std::to_string(rc.state_dim()) + ")");
  }
  out.reparam = integer_reparam(rc.F, rc.H, opt.targets, opt.reparam, opt.target_kind);
  out.integer = quantize_controller(rc, out.reparam, sc);
  out.modulus_bound = modulus_bound(band, sc);
  out.modular = project_mod_q(out.integer, select_modulus(band, sc), band);
  return out;
}

// ---------------------------------------------------------------------------
// Advisory error budget

struct ErrorBudgetReport {
  // Quantization perturbations, bounding ||e_x||, ||e_u||, ||e_0||.
  double alpha_x = 0, alpha_u = 0, alpha_0 = 0, alpha = 0;
  // Cryptosystem perturbations after division by L.
  double beta_x = 0, beta_u = 0, beta_0 = 0, beta = 0;
};

namespace detail {

inline double inf_norm(const MatrixXd& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().rowwise().sum().maxCoeff();
}

inline double inf_norm(const IntMatrix& A) {
  double best = 0.0;
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (auto v : A.row(i)) s += std::fabs(static_cast<double>(v));
    best = std::max(best, s);
  }
  return best;
}

// || A y - (step [A/step]) (r [y/r]) || for ||y|| <= Y.
inline double product_error(const MatrixXd& A, double Y, double r, double step) {
  const double cols = static_cast<double>(A.cols());
  return inf_norm(A) * r / 2 + cols / 2 * Y * step + cols / 4 * r * step;
}

}  // namespace detail

// M bounds the plain signals ||y||, ||x||, ||u|| (infinity norms).
// Pass crypto = nullptr for the quantization part only.
inline ErrorBudgetReport error_budget(const PlainController& c, const ReparamResult& rp,
                                      const Scales& sc, double M, double epsilon,
                                      const Params* crypto = nullptr) {
  using detail::inf_norm;
  using detail::product_error;
  const double r = sc.r, s = sc.s, L = static_cast<double>(sc.L);
  const double Mx = M + epsilon, Mu = M + epsilon;
  const double l = static_cast<double>(c.state_dim());
  const double T_inv = inf_norm(rp.T_inv);
  const double R_gain = std::max(inf_norm(rp.T * rp.R), inf_norm(rp.R));

  ErrorBudgetReport b;
  const double e_z = product_error(rp.T * (c.G - rp.R * c.J), M, r, s) +
                     product_error(rp.T * rp.R, Mu, r, s);
  const double z_norm = inf_norm(rp.T) * Mx;
  const double e_u = l * s / 2 * z_norm + product_error(c.J, M, r, s * s);
  b.alpha_u = e_u;
  b.alpha_x = T_inv * e_z + R_gain * e_u;
  b.alpha_0 = T_inv * r * s / 2;
  b.alpha = std::max({b.alpha_x, b.alpha_u, b.alpha_0});

  if (crypto != nullptr) {
    const IntegerController ic = quantize_controller(c, rp, sc);
    const double fresh = crypto->noise.bound();
    const double dm = static_cast<double>(delta_mult(*crypto));
    const double p = static_cast<double>(c.input_dim());
    const double m = static_cast<double>(c.output_dim());
    const double dz = (inf_norm(ic.G) + inf_norm(ic.R)) * fresh + (l + p + m) * dm;
    const double du = inf_norm(ic.J) * fresh + (l + p) * dm;
    b.beta_u = r * s * s / L * du;
    b.beta_x = r * s / L * T_inv * dz + R_gain * b.beta_u;
    b.beta_0 = r * s / L * T_inv * fresh;
    b.beta = std::max({b.beta_x, b.beta_u, b.beta_0});
  }
  return b;
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_CONVERT_HPP_
