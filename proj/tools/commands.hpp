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

#ifndef LATTICE_CTRL_TOOLS_COMMANDS_HPP_
#define LATTICE_CTRL_TOOLS_COMMANDS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lattice_ctrl::cli {

enum ExitCode : int { kPass = 0, kError = 1, kDiagnostic = 2 };

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool force = false;
  bool insecure_sigma0 = false;
};

struct KeygenOptions {
  CommonOptions common;
  std::optional<std::size_t> n;
  std::optional<unsigned> log2_q;
  std::optional<double> sigma;
};

struct ConvertOptions {
  CommonOptions common;
};

struct SimulateOptions {
  CommonOptions common;
  std::optional<std::size_t> horizon;
  std::optional<unsigned> log2_q;  // overrides the selected modulus
  bool plain_only = false;         // skip the encrypted loop
  bool tune = false;               // search r = s before running
};

struct EstimateOptions {
  CommonOptions common;
  std::size_t n = 1000;
  unsigned log2_q = 48;
  double sigma = 10.0;
  double lambda = 80.0;
  unsigned n0 = 6;
  unsigned log2_nu = 16;
  double signal_bound = 1.0;  // M for the error budget
};

struct BenchOptions {
  CommonOptions common;
  std::size_t reps = 10;
  std::vector<std::size_t> dims{49, 999};  // ciphertext widths 50 and 1000
  unsigned log2_q = 48;
  unsigned log2_nu = 16;
  double sigma = 10.0;
};

struct BenchRow {
  std::string op;
  std::size_t width = 0;  // n + 1
  std::size_t samples = 0;
  double mean_ms = 0, p50_ms = 0, p90_ms = 0;
};

struct MpcDemoOptions {
  CommonOptions common;
  std::uint64_t q = 5;
  std::uint64_t message = 3;
  std::optional<std::uint64_t> mask;
  unsigned log2_q = 16;
  std::uint64_t x1 = 1234, x2 = 567;
  bool exhaustive = false;
};

int cmd_keygen(const KeygenOptions& opt, std::ostream& out, std::ostream& err);
int cmd_convert(const ConvertOptions& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_estimate(const EstimateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err);
int cmd_mpc_demo(const MpcDemoOptions& opt, std::ostream& out, std::ostream& err);

// Timing rows for one parameter preset (Enc, Dec, Enc', external product).
std::vector<BenchRow> run_bench(std::size_t n, unsigned log2_q, unsigned log2_nu, double sigma,
                                std::size_t reps, std::uint64_t seed);

}  // namespace lattice_ctrl::cli

#endif  // LATTICE_CTRL_TOOLS_COMMANDS_HPP_
