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

// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "commands.hpp"
#include "lattice_ctrl/lattice_ctrl.hpp"

namespace {

using namespace lattice_ctrl;
using boost::multiprecision::cpp_int;

const std::string kData = LATTICE_CTRL_DATA_DIR;
constexpr double kEps = 0.01;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << " FAILED(" << what << ")";
    }
  }
};

RunConfig Fixture() { return load_run_config(kData + "/double_integrator.json"); }

OutputBand FixtureBand(const RunConfig& rc) {
  return estimate_output_band(*rc.plant, rc.controller.controller, 1000, rc.margin, kEps);
}

// Largest r = s passing at L = 1 with the given tolerance.
Scales TunedScales(const RunConfig& rc, const OutputBand& band, double tolerance) {
  return tune_scales(*rc.plant, rc.controller.controller, band, 1, 1000, 1e-2, 8, {}, tolerance)
      .scales;
}

// ---------------------------------------------------------------------------

void ScalarExample(Outcome& o) {
  const std::vector<double> ref = example_reference_outputs(4);
  o.require(ref == std::vector<double>{0.75, 0.8125, 0.796875, 0.80078125}, "reference u(1..4)");

  const auto naive = example_naive_outputs(4);
  o.require(naive[0] == 75 && naive[1] == 8125 && naive[2] == 796875 && naive[3] == 80078125,
            "naive u(1..4)");

  // Unbounded-integer oracle.
  const cpp_int q = cpp_int(1) << 48;
  cpp_int z = 1, p = 100;
  std::size_t oracle = 0;
  for (std::size_t t = 1; t <= 64 && oracle == 0; ++t) {
    z = -25 * z + p;
    p *= 100;
    if (z < 0 || z >= q) oracle = t;
  }
  const auto first = example_first_overflow(std::uint64_t{1} << 48, 64);
  o.require(first.has_value() && *first == oracle, "first overflow matches oracle");
  o.require(first.has_value() && *first <= 10, "overflow within 10 steps");
  o.detail << " u_ref=0.75,0.8125,0.796875,0.80078125 naive=75,8125,796875,80078125"
           << " first overflow beyond q=2^48 at t=" << (first ? *first : 0)
           << " (oracle " << oracle << ")";
}

void SecuritySizing(Outcome& o) {
  const double thr = min_n_threshold(80, 48, 10.0);
  const std::size_t n = min_n(80, 48, 10.0);
  const double entries = 3.0 * 717.0 * 717.0;
  o.require(n >= 715 && n <= 717, "min_n within 716 +/- 1");
  o.require(std::fabs(entries - 1.54e6) <= 0.01 * 1.54e6, "d(n+1)^2 within 1% of 1.54e6");
  o.detail << std::fixed << std::setprecision(2) << " min_n=" << n << " (threshold " << thr
           << ") d(n+1)^2=" << std::setprecision(0) << entries;
}

void NoiseBounds(Outcome& o) {
  const Params p = Params::make(50, 48, 10.0, 6);
  SeededRng rng(2024);
  const SecretKey sk = keygen(p, rng);
  std::int64_t worst_fresh = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t m = sample_uniform(p.q, rng);
    const std::int64_t e = p.q.centered(p.q.sub(decrypt(encrypt(m, sk, p, rng), sk), m));
    worst_fresh = std::max<std::int64_t>(worst_fresh, std::abs(e));
  }
  const std::uint64_t dm = delta_mult(p);
  std::int64_t worst_mult = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t k = sample_uniform(p.q, rng), m = sample_uniform(p.q, rng);
    const LweCiphertext c = encrypt(m, sk, p, rng);
    const GswCiphertext C = gsw_encrypt(k, sk, p, rng);
    const std::uint64_t expect = p.q.mul(k, decrypt(c, sk));
    const std::int64_t e =
        p.q.centered(p.q.sub(decrypt(external_product(C, c), sk), expect));
    worst_mult = std::max<std::int64_t>(worst_mult, std::abs(e));
  }
  o.require(worst_fresh <= 60, "fresh error <= n0 sigma");
  o.require(static_cast<std::uint64_t>(worst_mult) <= dm, "product error <= delta_mult");
  o.detail << " max|e_fresh|=" << worst_fresh << " <= 60, max|e_mult|=" << worst_mult
           << " <= delta_mult=" << dm;
}

void ExactOracle(Outcome& o) {
  const Params p = Params::make(50, 16, 0.0);
  SeededRng rng(16);
  const SecretKey sk = keygen(p, rng);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + rng() % 4, cols = 1 + rng() % 4;
    ZqMatrix F(rows, cols);
    for (std::size_t i = 0; i < F.size(); ++i) F.data()[i] = sample_uniform(p.q, rng);
    ZqVector x(cols);
    for (auto& v : x) v = sample_uniform(p.q, rng);
    const auto got = decrypt_vector(
        matvec_mult(gsw_encrypt_matrix(F, sk, p, rng), encrypt_vector(x, sk, p, rng)), sk);
    for (std::size_t i = 0; i < rows; ++i) {
      std::uint64_t acc = 0;
      for (std::size_t j = 0; j < cols; ++j) acc = (acc + F(i, j) * x[j]) % 65536;
      mismatches += got[i] != acc;
    }
  }

  // Fixture trajectory on q = 2^16 with coarse scales.
  const RunConfig rc = Fixture();
  const OutputBand band = FixtureBand(rc);
  const Conversion cv = convert_controller(rc.controller.controller, Scales{0.05, 0.05, 1}, band);
  o.require(cv.modular.q.log2() <= 16, "fixture fits q = 2^16");
  const ModularController mc = project_mod_q(cv.integer, Modulus(16), band);
  ModularRuntime oracle(mc);
  EncryptedController ec = encrypt_controller(mc, sk, p, rng);
  TrustedEndpoint te(sk, p, mc, 17);
  Plant plant(*rc.plant);
  std::size_t traj_mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::vector<double> y = detail::to_std(plant.output());
    const ZqVector yq = quantize_input(y, mc.scales.r, mc.scales.L, mc.q);
    const auto y_ct = encrypt_vector(yq, sk, p, rng);
    const auto u_ct = ec.output(y_ct);
    const ZqVector u_dec = decrypt_vector(u_ct, sk);
    const ZqVector u_or = oracle.output(yq);
    ec.advance(y_ct, te.reencrypt(u_ct));
    oracle.advance(yq, requantize_output(u_or, mc));
    traj_mismatches += u_dec != u_or;
    traj_mismatches += decrypt_vector(ec.state(), sk) != oracle.state();
    plant.advance(detail::to_eigen(recover_output(u_dec, mc)));
  }
  o.require(mismatches == 0, "matvec bit-exact");
  o.require(traj_mismatches == 0, "trajectory bit-exact");
  o.detail << " matvec mismatches " << mismatches << "/1000 instances, trajectory mismatches "
           << traj_mismatches << " over 1000 steps";
}

void QuantizedLoop(Outcome& o) {
  const RunConfig rc = Fixture();
  const OutputBand band = FixtureBand(rc);
  const auto res =
      tune_scales(*rc.plant, rc.controller.controller, band, 1, 1000, 1e-2, 8);
  const Conversion cv = convert_controller(rc.controller.controller, res.scales, band);
  const SimTrace tr = closed_loop_simulate({*rc.plant, cv, std::nullopt, 1000, 1});
  o.require(tr.summary.sup_err_modq <= kEps, "sup error <= eps");
  o.require(!tr.summary.first_band_violation, "no band violation");
  o.require(tr.summary.integer_mismatches == 0, "integer and modular trajectories agree");
  o.detail << std::setprecision(4) << " r=s=" << res.scales.r << " (L=1, "
           << res.evaluations << " bisection runs) sup|g(u)-u|=" << tr.summary.sup_err_modq
           << " <= " << kEps << " q=2^" << cv.modular.q.log2();
}

void EncryptedLoop(Outcome& o) {
  const RunConfig rc = Fixture();
  const OutputBand band = FixtureBand(rc);
  const Scales base = TunedScales(rc, band, kEps / 2);
  double prev_mean = INFINITY, prev_sup = INFINITY, err_at_top = 0;
  o.detail << std::setprecision(3) << " r=s=" << base.r;
  for (unsigned k : {10u, 15u, 20u}) {
    const Conversion cv =
        convert_controller(rc.controller.controller, Scales{base.r, base.s, 1ULL << k}, band);
    const Params p = Params::make(50, cv.modular.q.log2(), 10.0);
    const SimTrace tr = closed_loop_simulate({*rc.plant, cv, p, 1000, 3});
    o.require(tr.summary.mean_gap_enc < prev_mean, "mean crypto error decreases at L=2^" + std::to_string(k));
    o.require(tr.summary.sup_gap_enc < prev_sup, "sup crypto error decreases at L=2^" + std::to_string(k));
    prev_mean = tr.summary.mean_gap_enc;
    prev_sup = tr.summary.sup_gap_enc;
    err_at_top = tr.summary.sup_err_enc;
    o.detail << " | L=2^" << k << " q=2^" << cv.modular.q.log2() << " crypto err mean "
             << tr.summary.mean_gap_enc << " sup " << tr.summary.sup_gap_enc << " sup|g(Dec u)-u| "
             << tr.summary.sup_err_enc;
  }
  o.require(err_at_top <= kEps, "encrypted loop within eps at L=2^20");
}

void UnlimitedHorizon(Outcome& o) {
  const RunConfig rc = Fixture();
  const OutputBand band = FixtureBand(rc);
  const Scales base = TunedScales(rc, band, kEps / 2);
  const Conversion cv =
      convert_controller(rc.controller.controller, Scales{base.r, base.s, 1ULL << 20}, band);
  const Params p = Params::make(50, cv.modular.q.log2(), 10.0);
  const SimTrace tr = closed_loop_simulate({*rc.plant, cv, p, 10000, 4});
  o.require(tr.summary.sup_err_enc <= 2 * kEps, "error stays below 2 eps");
  o.require(!tr.summary.first_band_violation, "no band violation");
  double late = 0;
  for (std::size_t t = 9000; t < tr.records.size(); ++t) late = std::max(late, tr.records[t].err_enc);
  o.detail << std::setprecision(4) << " 10000 steps sigma=10 sup|g(Dec u)-u|=" << tr.summary.sup_err_enc
           << " (last 1000 steps " << late << ") <= " << 2 * kEps;
}

void GadgetIdentity(Outcome& o) {
  const GadgetSpec g{1, 8};
  const Modulus q8(8);
  std::size_t bad = 0;
  for (std::uint64_t x = 0; x < 256; ++x) {
    const std::vector<std::uint64_t> v{x};
    bad += recompose(decompose(v, g), g, q8)[0] != x;
  }
  const Modulus q48(48);
  const GadgetSpec g48 = GadgetSpec::for_modulus(q48);
  SeededRng rng(8);
  std::size_t bad48 = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::uint64_t> v(1 + rng() % 8);
    for (auto& x : v) x = sample_uniform(q48, rng);
    bad48 += recompose(decompose(v, g48), g48, q48) != v;
  }
  o.require(bad == 0, "exhaustive Z_256");
  o.require(bad48 == 0, "random q = 2^48");
  o.detail << " Z_256 (nu=2, d=8): " << 256 - bad << "/256; q=2^48 (nu=2^16, d=3): "
           << 10000 - bad48 << "/10000 random vectors";
}

void MpcCorrectness(Outcome& o) {
  const Params p = Params::make(16, 5, 0.0);
  SeededRng rng(9);
  mpc::KeyHolder unit1(keygen(p, rng), p, 10);
  mpc::Evaluator unit2(p, 11);
  mpc::Channel ch;
  std::size_t good = 0;
  for (std::uint64_t a = 0; a < 32; ++a)
    for (std::uint64_t b = 0; b < 32; ++b)
      good += unit1.reveal(mpc::two_party_mult(a, b, unit1, unit2, ch)) == (a * b) % 32;

  std::size_t shares = 0;
  for (std::uint64_t m = 0; m < 64; ++m) {
    bool ok = mpc::reconstruct(mpc::share(m, 64, rng), 64) == m;
    for (std::uint64_t r = 0; r < 64; ++r) ok = ok && mpc::reconstruct(mpc::share_with(m, r, 64), 64) == m;
    shares += ok;
  }

  mpc::KeyHolder k2(keygen(p, rng), p, 12);
  mpc::Evaluator e2(p, 13);
  mpc::Channel ch2;
  std::vector<double> counts(32 * 32, 0.0);
  for (int i = 0; i < 10000; ++i) {
    mpc::two_party_mult(7, 19, k2, e2, ch2);
    const auto [a, b] = k2.views().back();
    counts[a * 32 + b] += 1;
  }
  const double expect = 10000.0 / counts.size();
  double stat = 0;
  for (double c : counts) stat += (c - expect) * (c - expect) / expect;
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  const double pval = boost::math::cdf(boost::math::complement(dist, stat));

  o.require(good == 1024, "two-party products");
  o.require(shares == 64, "share round trips");
  o.require(pval > 0.01, "masked view uniform");
  o.require(mpc::evaluator_audit_clean(unit2) && mpc::evaluator_audit_clean(e2), "evaluator audit");
  o.detail << std::setprecision(3) << " products " << good << "/1024 over Z_32, shares " << shares
           << "/64 over Z_64, unit1 view chi2 p=" << pval;
}

void BenchHarness(Outcome& o) {
  cli::BenchOptions opt;
  opt.reps = 5;
  std::ostringstream out, err;
  const int code = cli::cmd_bench(opt, out, err);
  const std::string text = out.str();
  std::size_t rows = 0;
  for (const char* op : {"Enc ", "Dec ", "Enc'", "External product"}) rows += text.find(op) != std::string::npos;
  o.require(code == cli::kPass, "bench exit code");
  o.require(rows == 4, "four timing rows");
  o.require(text.find("(50,2^48,3)") != std::string::npos &&
                text.find("(1000,2^48,3)") != std::string::npos,
            "both presets");
  o.detail << " presets (50,2^48,3) and (1000,2^48,3), " << rows << " rows\n" << text;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "scalar example trajectory and overflow", 1, ScalarExample},
      {2, "security sizing", 1, SecuritySizing},
      {3, "fresh and product noise bounds", 30, NoiseBounds},
      {4, "exact oracle equivalence (sigma=0, q=2^16)", 60, ExactOracle},
      {5, "quantized loop within eps (L=1)", 120, QuantizedLoop},
      {6, "encrypted loop within eps, crypto error falls with L", 300, EncryptedLoop},
      {7, "unlimited horizon (10^4 steps)", 600, UnlimitedHorizon},
      {8, "gadget identity", 1, GadgetIdentity},
      {9, "MPC correctness", 30, MpcCorrectness},
      {10, "benchmark harness", 600, BenchHarness},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail << " FAILED(runtime " << secs << " s > " << c.limit_s << " s)";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << " ("
              << std::fixed << std::setprecision(2) << secs << " s)" << std::defaultfloat
              << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
