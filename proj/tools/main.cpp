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

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace cli = lattice_ctrl::cli;

namespace {

void add_common(CLI::App* sub, cli::CommonOptions& c, bool config) {
  if (config) sub->add_option("--config", c.config, "Run configuration or controller JSON");
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--out", c.out, "Output directory (must exist)");
  sub->add_flag("--force", c.force, "Overwrite existing output files");
  sub->add_flag("--insecure-sigma0", c.insecure_sigma0, "Allow sigma = 0 (no noise)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted linear control over LWE/GSW"};
  app.require_subcommand(1);

  cli::KeygenOptions keygen;
  auto* k = app.add_subcommand("keygen", "Generate a secret key container");
  add_common(k, keygen.common, true);
  k->add_option("--n", keygen.n, "Key dimension");
  k->add_option("--log2-q", keygen.log2_q, "log2 of the modulus");
  k->add_option("--sigma", keygen.sigma, "Noise standard deviation");

  cli::ConvertOptions convert;
  auto* c = app.add_subcommand("convert", "Convert a controller to integer and modular form");
  add_common(c, convert.common, true);

  cli::SimulateOptions simulate;
  auto* s = app.add_subcommand("simulate", "Run the closed loop and write a trace");
  add_common(s, simulate.common, true);
  s->add_option("--horizon", simulate.horizon, "Number of steps");
  s->add_option("--log2-q", simulate.log2_q, "Force the modulus (diagnostics)");
  s->add_flag("--plain", simulate.plain_only, "Skip the encrypted loop");
  s->add_flag("--tune", simulate.tune, "Search r = s before running");

  cli::EstimateOptions estimate;
  auto* e = app.add_subcommand("estimate", "Security level and error budget");
  add_common(e, estimate.common, true);
  e->add_option("--n", estimate.n, "Key dimension")->capture_default_str();
  e->add_option("--log2-q", estimate.log2_q, "log2 of the modulus")->capture_default_str();
  e->add_option("--sigma", estimate.sigma, "Noise standard deviation")->capture_default_str();
  e->add_option("--lambda", estimate.lambda, "Target security level")->capture_default_str();
  e->add_option("--n0", estimate.n0, "Noise tail factor")->capture_default_str();
  e->add_option("--log2-nu", estimate.log2_nu, "log2 of the gadget base")->capture_default_str();
  e->add_option("--signal-bound", estimate.signal_bound, "Bound M on signal norms")
      ->capture_default_str();

  cli::BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Time Enc, Dec, Enc' and the external product");
  add_common(b, bench.common, false);
  b->add_option("--reps", bench.reps, "Samples per operation")->capture_default_str();
  b->add_option("--dims", bench.dims, "Key dimensions n (width n+1)");
  b->add_option("--log2-q", bench.log2_q, "log2 of the modulus")->capture_default_str();

  cli::MpcDemoOptions mpc;
  auto* m = app.add_subcommand("mpc-demo", "Secret sharing and two-party multiplication demo");
  add_common(m, mpc.common, false);
  m->add_option("--q", mpc.q, "Sharing modulus")->capture_default_str();
  m->add_option("--message", mpc.message, "Message to share")->capture_default_str();
  m->add_option("--mask", mpc.mask, "Fixed sharing mask r");
  m->add_option("--log2-q", mpc.log2_q, "log2 of the two-party modulus")->capture_default_str();
  m->add_option("--x1", mpc.x1, "First factor")->capture_default_str();
  m->add_option("--x2", mpc.x2, "Second factor")->capture_default_str();
  m->add_flag("--exhaustive", mpc.exhaustive, "Verify all pairs over Z_32");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : cli::kError;
  }

  if (k->parsed()) return cli::cmd_keygen(keygen, std::cout, std::cerr);
  if (c->parsed()) return cli::cmd_convert(convert, std::cout, std::cerr);
  if (s->parsed()) return cli::cmd_simulate(simulate, std::cout, std::cerr);
  if (e->parsed()) return cli::cmd_estimate(estimate, std::cout, std::cerr);
  if (b->parsed()) return cli::cmd_bench(bench, std::cout, std::cerr);
  if (m->parsed()) return cli::cmd_mpc_demo(mpc, std::cout, std::cerr);
  return cli::kError;
}
