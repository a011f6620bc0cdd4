// Copyright 2026 The cvqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Subcommands of the cvqkd tool. Each cmd_* writes its report to `out` and
// returns the process exit code; domain errors propagate as exceptions and
// are mapped to kExitUsage by run().

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cvqkd/gaussian_core.hpp"

namespace cvqkd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

/// Shortest of 12 significant digits, no locale. -0 prints as 0.
std::string format_number(double value);

struct ChannelArgs {
  double v = 12.0;
  std::optional<double> t;
  std::optional<double> loss_db;
  double eps = 0.0;
  bool json = false;
};

/// Exactly one of t / loss_db must be set.
ChannelParams resolve_channel(const ChannelArgs& args);

struct SweepSpec {
  double v = 12.0;
  double eps = 0.01;
  double start_db = 0.0;
  double stop_db = 20.0;
  double step_db = 0.5;
  unsigned threads = 0;
};

struct SweepRow {
  double loss_db = 0.0;
  double transmittance = 0.0;
  double chi = 0.0;
  double rho_plus = 0.0;
  double k_dr_heis = 0.0;
  double k_dr_opt = 0.0;
  double k_rr_heis = 0.0;
  double k_rr_opt = 0.0;
  double k_dr_hom = 0.0;
  double k_rr_hom = 0.0;
};

inline constexpr const char* kSweepHeader =
    "loss_db,T,chi,rho_plus,k_dr_heis,k_dr_opt,k_rr_heis,k_rr_opt,k_dr_hom,"
    "k_rr_hom";

/// Grid start + i * step up to stop; start == stop gives one row.
std::vector<SweepRow> compute_sweep(const SweepSpec& spec);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct VerifyArgs : ChannelArgs {
  /// optimal | teleportation | feed-forward | beamsplitter
  std::string scheme = "optimal";
  /// plus | minus (teleportation only)
  std::string root = "plus";
  double tolerance = 1e-10;
};

struct SearchArgs : ChannelArgs {
  /// dr | rr
  std::string direction = "dr";
  std::uint64_t seed = 1;
  int starts = 32;
  bool unconstrained = false;
  unsigned threads = 0;
};

struct McArgs : ChannelArgs {
  /// none | optimal | teleportation | feed-forward
  std::string attack = "optimal";
  std::size_t n = 1'000'000;
  std::uint64_t seed = 1;
  int batches = 16;
  std::string shots_out;
  unsigned threads = 0;
};

int cmd_rate(const ChannelArgs& args, std::ostream& out);
int cmd_sweep(const SweepSpec& spec, const std::string& out_path,
              std::ostream& out);
int cmd_verify_attack(const VerifyArgs& args, std::ostream& out);
int cmd_search(const SearchArgs& args, std::ostream& out);
int cmd_mc(const McArgs& args, std::ostream& out);

/// Full command line: parses argv and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cvqkd::cli
