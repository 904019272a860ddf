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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lattice_ctrl/lattice_ctrl.hpp"

namespace lattice_ctrl::cli {
namespace {

namespace fs = std::filesystem;

fs::path output_dir(const CommonOptions& c) {
  const fs::path dir = c.out.value_or(fs::path("."));
  if (!fs::is_directory(dir)) throw IoError("output directory " + dir.string() + " does not exist");
  return dir;
}

void check_writable(const fs::path& p, bool force) {
  if (fs::exists(p) && !force) {
    throw IoError("refusing to overwrite " + p.string() + " (pass --force)");
  }
}

void check_sigma(double sigma, const CommonOptions& c) {
  if (sigma == 0.0 && !c.insecure_sigma0) {
    throw ParameterError("sigma = 0 disables all noise; pass --insecure-sigma0 to run it anyway");
  }
}

RunConfig require_config(const CommonOptions& c) {
  if (!c.config) throw ParameterError("--config is required");
  return load_run_config(*c.config);
}

OutputBand band_for(const RunConfig& rc) {
  if (rc.band) return *rc.band;
  if (!rc.plant) {
    throw ParameterError("no output band: add \"band\" to the config or supply a plant to estimate it");
  }
  return estimate_output_band(*rc.plant, rc.controller.controller, std::max<std::size_t>(rc.horizon, 100),
                              rc.margin, rc.epsilon);
}

ConversionOptions conversion_options(const RunConfig& rc) {
  ConversionOptions opt;
  opt.targets = rc.controller.targets;
  return opt;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const std::size_t idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_keygen(const KeygenOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CryptoConfig cc;
    if (opt.common.config) cc = load_run_config(*opt.common.config).crypto;
    const std::size_t n = opt.n.value_or(cc.n);
    const unsigned log2_q = opt.log2_q.value_or(cc.log2_q.value_or(48));
    const double sigma = opt.sigma.value_or(cc.sigma);
    check_sigma(sigma, opt.common);
    const Params p = Params::make(n, log2_q, sigma, cc.n0, cc.log2_nu);
    const fs::path path = output_dir(opt.common) / "secret.key";
    check_writable(path, opt.common.force);

    SeededRng rng = opt.common.seed ? SeededRng(*opt.common.seed) : SeededRng::from_entropy();
    const SecretKey sk = keygen(p, rng);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    write_secret_key(os, sk, p, ExportSecret{});
    if (!os) throw IoError("write failed for " + path.string());
    if (p.insecure()) err << "warning: sigma = 0 key material offers no security\n";
    out << "wrote " << path.string() << " (n=" << n << ", q=2^" << log2_q << ", sigma=" << sigma
        << ")\n";
    return static_cast<int>(kPass);
  });
}

int cmd_convert(const ConvertOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig rc = require_config(opt.common);
    const OutputBand band = band_for(rc);
    const Conversion cv =
        convert_controller(rc.controller.controller, rc.scales(), band, conversion_options(rc));

    json doc = conversion_to_json(cv);
    const double M = std::max(std::fabs(band.u_min[0]), std::fabs(band.u_max[0]));
    doc["error_budget"] = error_budget_to_json(
        error_budget(cv.reduction.reduced, cv.reparam, rc.scales(), M, band.epsilon));

    const auto& r = doc["report"];
    out << "state dimension   " << cv.reduction.original_dim << " -> " << cv.reduction.rank
        << (cv.reduction.changed() ? " (unobservable part removed)" : "") << '\n'
        << "cond(T)           " << cv.reparam.condition << '\n'
        << "residual          " << cv.reparam.residual << '\n'
        << "modulus bound     " << r["modulus_bound"].get<double>() << '\n'
        << "q                 2^" << cv.modular.q.log2() << '\n';
    for (std::size_t i = 0; i < band.size(); ++i) {
      out << "band u" << i << "          [" << band.u_min[i] << ", " << band.u_max[i]
          << "] eps " << band.epsilon << '\n';
    }
    if (opt.common.out) {
      const fs::path path = output_dir(opt.common) / "controller_modular.json";
      check_writable(path, opt.common.force);
      write_text_file(path, doc.dump(2) + "\n");
      out << "wrote " << path.string() << '\n';
    } else {
      out << doc.dump(2) << '\n';
    }
    return static_cast<int>(kPass);
  });
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig rc = require_config(opt.common);
    if (!rc.plant) throw ParameterError("simulate needs a plant in the config");
    const std::size_t horizon = opt.horizon.value_or(rc.horizon);
    const std::uint64_t seed = opt.common.seed.value_or(rc.seed);
    const OutputBand band = band_for(rc);
    const ConversionOptions copt = conversion_options(rc);

    Scales sc = rc.scales();
    if (opt.tune) {
      const auto tuned = tune_scales(*rc.plant, rc.controller.controller, band, 1,
                                     std::max<std::size_t>(horizon, 1), 1e-2, 8, copt,
                                     band.epsilon / 2);
      sc.r = tuned.scales.r;
      sc.s = tuned.scales.s;
      out << "tuned r = s = " << sc.r << " (" << tuned.evaluations << " runs)\n";
    }
    Conversion cv = convert_controller(rc.controller.controller, sc, band, copt);
    std::optional<unsigned> forced = opt.log2_q;
    if (!forced && rc.crypto.log2_q && *rc.crypto.log2_q > cv.modular.q.log2()) forced = rc.crypto.log2_q;
    if (forced) cv.modular = project_mod_q(cv.integer, Modulus(*forced), band);

    std::optional<Params> crypto;
    if (rc.encrypted && !opt.plain_only) {
      check_sigma(rc.crypto.sigma, opt.common);
      crypto = Params::make(rc.crypto.n, cv.modular.q.log2(), rc.crypto.sigma, rc.crypto.n0,
                            rc.crypto.log2_nu);
    }
    const SimTrace trace = closed_loop_simulate({*rc.plant, cv, crypto, horizon, seed});
    const SimSummary& s = trace.summary;

    const bool within = s.sup_err_modq <= band.epsilon && (!crypto || s.sup_err_enc <= band.epsilon);
    const bool flagged = s.first_band_violation.has_value() || s.integer_overflow_step.has_value();
    json summary = summary_to_json(s);
    summary["epsilon"] = band.epsilon;
    summary["pass"] = within && !flagged;
    summary["scales"] = scales_to_json(sc);
    summary["band"] = band_to_json(band);
    summary["log2_q"] = cv.modular.q.log2();
    summary["seed"] = seed;
    if (crypto) summary["params"] = params_to_json(*crypto);

    if (opt.common.out) {
      const fs::path dir = output_dir(opt.common);
      const fs::path csv = dir / "trace.csv", js = dir / "summary.json";
      check_writable(csv, opt.common.force);
      check_writable(js, opt.common.force);
      std::ostringstream os;
      write_trace_csv(os, trace);
      write_text_file(csv, os.str());
      write_text_file(js, summary.dump(2) + "\n");
      out << "wrote " << csv.string() << " and " << js.string() << '\n';
    }
    out << summary.dump(2) << '\n';
    if (crypto && crypto->insecure()) err << "warning: sigma = 0 run is not encrypted in any meaningful sense\n";
    if (flagged) {
      err << "diagnostic: ";
      if (s.first_band_violation) err << "band violation first at t=" << *s.first_band_violation << ' ';
      if (s.integer_overflow_step) err << "integer overflow at t=" << *s.integer_overflow_step;
      err << '\n';
      return static_cast<int>(kDiagnostic);
    }
    return static_cast<int>(within ? kPass : kDiagnostic);
  });
}

int cmd_estimate(const EstimateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Params p = Params::make(opt.n, opt.log2_q, opt.sigma, opt.n0, opt.log2_nu);
    json doc{{"n", opt.n}, {"log2_q", opt.log2_q}, {"sigma", opt.sigma},
             {"d", p.gadget.d}, {"delta_mult", delta_mult(p)},
             {"gsw_entries", p.gadget.d * p.width() * p.width()}};
    out << std::fixed << std::setprecision(1);
    if (opt.sigma > 0) {
      const double lam = security_estimate(opt.n, opt.log2_q, opt.sigma);
      const double thr = min_n_threshold(opt.lambda, opt.log2_q, opt.sigma);
      doc["lambda"] = lam;
      doc["target_lambda"] = opt.lambda;
      doc["min_n_threshold"] = thr;
      doc["min_n"] = min_n(opt.lambda, opt.log2_q, opt.sigma);
      out << "lambda            " << lam << '\n'
          << "min n (lambda=" << opt.lambda << ") " << min_n(opt.lambda, opt.log2_q, opt.sigma)
          << std::setprecision(2) << " (threshold " << thr << ")\n";
    } else {
      doc["lambda"] = nullptr;
      out << "lambda            n/a (sigma = 0)\n";
    }
    out << std::setprecision(0) << "delta_mult        " << delta_mult(p) << '\n'
        << "d                 " << p.gadget.d << '\n'
        << "d (n+1)^2         " << p.gadget.d * p.width() * p.width() << '\n';

    if (opt.common.config) {
      const RunConfig rc = load_run_config(*opt.common.config);
      const OutputBand band = band_for(rc);
      const Conversion cv =
          convert_controller(rc.controller.controller, rc.scales(), band, conversion_options(rc));
      const auto b = error_budget(cv.reduction.reduced, cv.reparam, rc.scales(), opt.signal_bound,
                                  band.epsilon, &p);
      doc["error_budget"] = error_budget_to_json(b);
      out << std::scientific << std::setprecision(3) << "alpha             " << b.alpha << '\n'
          << "beta              " << b.beta << '\n'
          << "alpha + beta      " << b.alpha + b.beta << " vs eps " << band.epsilon << '\n';
    }
    if (opt.common.out) {
      const fs::path path = output_dir(opt.common) / "estimate.json";
      check_writable(path, opt.common.force);
      write_text_file(path, doc.dump(2) + "\n");
    }
    return static_cast<int>(kPass);
  });
}

std::vector<BenchRow> run_bench(std::size_t n, unsigned log2_q, unsigned log2_nu, double sigma,
                                std::size_t reps, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  const Params p = Params::make(n, log2_q, sigma, 6, log2_nu);
  SeededRng rng(seed);
  const SecretKey sk = keygen(p, rng);
  std::vector<double> t_enc, t_dec, t_genc, t_ext;
  auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
  volatile std::uint64_t sink = 0;
  for (std::size_t i = 0; i < std::max<std::size_t>(reps, 1); ++i) {
    const std::uint64_t m = sample_uniform(p.q, rng);
    auto t0 = clock::now();
    const LweCiphertext c = encrypt(m, sk, p, rng);
    auto t1 = clock::now();
    sink = sink + decrypt(c, sk);
    auto t2 = clock::now();
    const GswCiphertext C = gsw_encrypt(3, sk, p, rng);
    auto t3 = clock::now();
    const LweCiphertext prod = external_product(C, c);
    auto t4 = clock::now();
    sink = sink + prod.body()[0];
    t_enc.push_back(ms(t1 - t0));
    t_dec.push_back(ms(t2 - t1));
    t_genc.push_back(ms(t3 - t2));
    t_ext.push_back(ms(t4 - t3));
  }
  auto row = [&](const char* op, const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    return BenchRow{op, p.width(), v.size(), mean, percentile(v, 0.5), percentile(v, 0.9)};
  };
  return {row("Enc", t_enc), row("Dec", t_dec), row("Enc'", t_genc),
          row("External product", t_ext)};
}

int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.reps == 0) throw ParameterError("--reps must be positive");
    const std::uint64_t seed = opt.common.seed.value_or(1);
    std::vector<std::vector<BenchRow>> all;
    for (std::size_t n : opt.dims) all.push_back(run_bench(n, opt.log2_q, opt.log2_nu, opt.sigma, opt.reps, seed));

    const unsigned d = (opt.log2_q + opt.log2_nu - 1) / opt.log2_nu;
    out << std::left << std::setw(18) << "op";
    for (std::size_t n : opt.dims) {
      std::ostringstream h;
      h << "(" << n + 1 << ",2^" << opt.log2_q << "," << d << ") mean/p50/p90 ms";
      out << " | " << std::setw(34) << h.str();
    }
    out << '\n' << std::fixed << std::setprecision(4);
    for (std::size_t op = 0; op < 4; ++op) {
      out << std::setw(18) << all[0][op].op;
      for (const auto& rows : all) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(4) << rows[op].mean_ms << " / " << rows[op].p50_ms
             << " / " << rows[op].p90_ms;
        out << " | " << std::setw(34) << cell.str();
      }
      out << '\n';
    }
    out << "samples per op: " << opt.reps << '\n';
    if (opt.common.out) {
      const fs::path path = output_dir(opt.common) / "bench.csv";
      check_writable(path, opt.common.force);
      std::ostringstream csv;
      csv << "op,width,log2_q,d,samples,mean_ms,p50_ms,p90_ms\n" << std::setprecision(9);
      for (const auto& rows : all) {
        for (const auto& r : rows) {
          csv << '"' << r.op << "\"," << r.width << ',' << opt.log2_q << ',' << d << ','
              << r.samples << ',' << r.mean_ms << ',' << r.p50_ms << ',' << r.p90_ms << '\n';
        }
      }
      write_text_file(path, csv.str());
    }
    return static_cast<int>(kPass);
  });
}

int cmd_mpc_demo(const MpcDemoOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SeededRng rng(opt.common.seed.value_or(1));
    const std::uint64_t q = opt.q;
    if (q < 2) throw ParameterError("--q must be at least 2");
    if (opt.message >= q) throw ParameterError("--message must lie in [0, q)");

    out << "== secret sharing over Z_" << q << " ==\n";
    const std::uint64_t r = opt.mask.value_or(sample_uniform(q, rng));
    const mpc::SharePair p = mpc::share_with(opt.message, r % q, q);
    out << "m = " << opt.message << ", r = " << r % q << "  ->  c1 = " << p.c1
        << " (unit 1), c2 = " << p.c2 << " (unit 2)\n"
        << "reconstruct: " << p.c1 << " + " << p.c2 << " mod " << q << " = "
        << mpc::reconstruct(p, q) << '\n';
    const std::uint64_t m2 = sample_uniform(q, rng);
    const mpc::SharePair p2 = mpc::share(m2, q, rng);
    const mpc::SharePair sum = mpc::share_add(p, p2, q);
    out << "add m' = " << m2 << " shared as (" << p2.c1 << ", " << p2.c2 << "): sum shares ("
        << sum.c1 << ", " << sum.c2 << ") reconstruct to " << mpc::reconstruct(sum, q) << '\n';

    out << "\n== two-party multiplication over Z_2^" << opt.log2_q << " (sigma = 0 demo mode) ==\n";
    const Params params = Params::make(16, opt.log2_q, 0.0);
    const std::uint64_t seed = rng();
    SeededRng krng(seed);
    mpc::KeyHolder unit1(keygen(params, krng), params, seed + 1);
    mpc::Evaluator unit2(params, seed + 2);
    mpc::Channel ch;
    json runs = json::array();
    auto run = [&](std::uint64_t a, std::uint64_t b) {
      const std::size_t before = ch.transcript().size();
      const LweCiphertext c = mpc::two_party_mult(a, b, unit1, unit2, ch);
      const std::uint64_t got = unit1.reveal(c);
      const std::uint64_t want = params.q.mul(params.q.reduce(a), params.q.reduce(b));
      const auto view = unit1.views().back();
      out << "x1 = " << a << ", x2 = " << b << '\n';
      for (std::size_t i = before; i < ch.transcript().size(); ++i) {
        const auto& m = ch.transcript().entries()[i];
        out << "  [" << m.seq << "] " << m.from << " -> " << m.to << "  " << std::setw(8) << std::left
            << m.kind << std::right;
        for (const auto& ct : m.ciphertexts) {
          out << ' ' << std::hex << std::setw(16) << std::setfill('0') << mpc::digest(ct)
              << std::dec << std::setfill(' ');
        }
        out << '\n';
      }
      out << "  unit1 saw masked values " << view.first << ", " << view.second << '\n'
          << "  product " << got << (got == want ? " (verified)" : " (MISMATCH)") << '\n';
      runs.push_back({{"x1", a}, {"x2", b}, {"masked", {view.first, view.second}},
                      {"product", got}, {"verified", got == want}});
      return got == want;
    };
    bool ok = run(opt.x1, opt.x2);
    ok = run(0, opt.x2) && ok;
    ok = run(1, opt.x2) && ok;
    out << "unit2 operations: ";
    for (const auto& op : unit2.ops()) out << op << ' ';
    out << (mpc::evaluator_audit_clean(unit2) ? "(no decryption)" : "(AUDIT FAILED)") << '\n';
    ok = ok && mpc::evaluator_audit_clean(unit2);

    json doc{{"runs", runs}, {"transcript", ch.transcript().to_json()}};
    if (opt.exhaustive) {
      const Params small = Params::make(16, 5, 0.0);
      SeededRng srng(seed ^ 0x5a5a);
      mpc::KeyHolder k(keygen(small, srng), small, seed + 3);
      mpc::Evaluator e(small, seed + 4);
      mpc::Channel c;
      std::size_t good = 0;
      for (std::uint64_t a = 0; a < 32; ++a)
        for (std::uint64_t b = 0; b < 32; ++b)
          good += k.reveal(mpc::two_party_mult(a, b, k, e, c)) == (a * b) % 32;
      std::size_t shares_ok = 0;
      for (std::uint64_t m = 0; m < 64; ++m) shares_ok += mpc::reconstruct(mpc::share(m, 64, srng), 64) == m;
      out << "\nexhaustive: " << good << "/1024 products over Z_32, " << shares_ok
          << "/64 share round trips over Z_64\n";
      doc["exhaustive"] = {{"products_ok", good}, {"shares_ok", shares_ok}};
      ok = ok && good == 1024 && shares_ok == 64;
    }
    if (opt.common.out) {
      const fs::path path = output_dir(opt.common) / "transcript.json";
      check_writable(path, opt.common.force);
      write_text_file(path, doc.dump(2) + "\n");
      out << "wrote " << path.string() << '\n';
    }
    return static_cast<int>(ok ? kPass : kError);
  });
}

}  // namespace lattice_ctrl::cli
