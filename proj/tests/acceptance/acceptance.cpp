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
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cvqkd/attack_search.hpp"
#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/keyrates.hpp"
#include "cvqkd/mc_sim.hpp"
#include "cvqkd/optical_attacks.hpp"

using namespace cvqkd;

namespace {

constexpr double kV = 12.0;
const std::vector<double> kGridT{0.2, 0.4, 0.6, 0.8, 0.99};
const std::vector<double> kGridEps{0.0, 0.01, 0.05, 0.2};

/// Collects failure messages for one criterion.
class Verdict {
 public:
  void require(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 5) messages_.push_back(what);
  }
  [[nodiscard]] bool passed() const { return failures_ == 0; }
  [[nodiscard]] int failures() const { return failures_; }
  [[nodiscard]] const std::vector<std::string>& messages() const { return messages_; }
  std::string note;

 private:
  int failures_ = 0;
  std::vector<std::string> messages_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string at(double t, double eps) { return "T=" + fmt(t) + " eps=" + fmt(eps); }

bool close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

/// Heisenberg products for one attack, gathered for criterion 8.
struct HeisenbergSample {
  std::string label;
  double a_product;
  double b_product;
};

std::vector<HeisenbergSample>& heisenberg_samples() {
  static std::vector<HeisenbergSample> samples;
  return samples;
}

void record_heisenberg(const std::string& label, const ProtocolParams& p,
                       const ChannelParams& ch, QuadraturePair a_given_e,
                       QuadraturePair b_given_e) {
  const double vab = v_a_given_b(p, ch);
  const double vba = v_b_given_a(p, ch);
  auto& s = heisenberg_samples();
  s.push_back({label + " x", a_given_e.x * vab, b_given_e.x * vba});
  s.push_back({label + " p", a_given_e.p * vab, b_given_e.p * vba});
}

void record_attack(const std::string& label, const ProtocolParams& p,
                   const ChannelParams& ch, const AttackSolution& s) {
  record_heisenberg(label, p, ch, s.v_a_given_e, s.v_b_given_e);
}

int g_failed = 0;

void report(int id, const std::string& title, double budget_s,
            const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0) {
    v.require(elapsed < budget_s, "runtime " + fmt(elapsed) + " s over " + fmt(budget_s) + " s");
  }
  if (!v.passed()) ++g_failed;
  std::cout << (v.passed() ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << " ("
            << fmt(elapsed) << " s";
  if (budget_s > 0.0) std::cout << ", limit " << fmt(budget_s) << " s";
  std::cout << ")";
  if (!v.note.empty()) std::cout << "  " << v.note;
  std::cout << '\n';
  for (const std::string& m : v.messages()) std::cout << "      " << m << '\n';
  if (v.failures() > static_cast<int>(v.messages().size())) {
    std::cout << "      ... " << v.failures() - static_cast<int>(v.messages().size())
              << " more\n";
  }
  std::cout.flush();
}

void criterion_optimizer(Verdict& v) {
  const ProtocolParams p = make_protocol(kV);
  double worst = 0.0;
  for (double t : kGridT) {
    for (double eps : kGridEps) {
      const ChannelParams ch = make_channel(t, eps);
      const double rho_plus = solve_rho(ch).rho_plus;
      for (Direction d : {Direction::Direct, Direction::Reverse}) {
        SearchConfig cfg;
        cfg.seed = 1;
        const SearchResult r = optimize_attack(p, ch, d, cfg);
        const double rel = std::abs(r.best.rho_achieved - rho_plus) / rho_plus;
        worst = std::max(worst, rel);
        v.require(rel <= 1e-6, at(t, eps) + " " + std::string(to_string(d)) +
                                   " rho=" + fmt(r.best.rho_achieved) +
                                   " rho_plus=" + fmt(rho_plus));
        record_attack("search " + at(t, eps) + " " + std::string(to_string(d)), p, ch,
                      evaluate_attack(p, ch, r.best.s_pair));
      }
    }
  }
  v.note = "worst relative error " + fmt(worst);
}

void check_circuit(Verdict& v, const std::string& name, const ProtocolParams& p,
                   const ChannelParams& ch, const CircuitReport& r, double target_eve,
                   double& worst) {
  const double bvar = ch.transmittance * (p.v + ch.chi);
  const double ab = std::sqrt(ch.transmittance * (p.v * p.v - 1.0));
  const double values[] = {r.b_variance_x, r.b_variance_p, r.ab_correlation_x,
                           r.ab_correlation_p, r.v_a_given_e.x, r.v_a_given_e.p,
                           r.v_b_given_e.x, r.v_b_given_e.p};
  const double targets[] = {bvar, bvar, ab, ab, target_eve, target_eve, target_eve, target_eve};
  for (int i = 0; i < 8; ++i) {
    const double err = std::abs(values[i] - targets[i]);
    worst = std::max(worst, err);
    v.require(err <= 1e-10,
              name + " " + at(ch.transmittance, ch.excess_noise) + " entry " +
                  std::to_string(i) + " off by " + fmt(err));
  }
  record_heisenberg(name + " " + at(ch.transmittance, ch.excess_noise), p, ch,
                    r.v_a_given_e, r.v_b_given_e);
}

void criterion_circuits(Verdict& v) {
  const ProtocolParams p = make_protocol(kV);
  double worst = 0.0;
  for (double t : kGridT) {
    for (double eps : kGridEps) {
      const ChannelParams ch = make_channel(t, eps);
      const double target = eve_variance(p, solve_rho(ch).rho_plus);
      check_circuit(v, "teleportation", p, ch,
                    teleportation_channel(p, solve_teleportation(ch)), target, worst);
      check_circuit(v, "feed-forward", p, ch, feed_forward_channel(p, solve_feed_forward(ch)),
                    target, worst);
    }
  }
  v.note = "worst absolute error " + fmt(worst);
}

void criterion_rho_below_chi(Verdict& v) {
  const ProtocolParams p = make_protocol(kV);
  int points = 0;
  auto check = [&](const ChannelParams& ch) {
    if (ch.chi <= 0.0) return;
    ++points;
    const std::string where = at(ch.transmittance, ch.excess_noise);
    v.require(solve_rho(ch).rho_plus < ch.chi, where + " rho_plus >= chi");
    v.require(optimal_dr(p, ch).rate_bits > heisenberg_dr(p, ch).rate_bits,
              where + " DR optimal not above Heisenberg");
    v.require(optimal_rr(p, ch).rate_bits > heisenberg_rr(p, ch).rate_bits,
              where + " RR optimal not above Heisenberg");
  };
  for (double t : kGridT) {
    for (double eps : kGridEps) check(make_channel(t, eps));
  }
  for (int i = 1; i <= 200; ++i) check(channel_from_loss_db(0.1 * i, 0.01));
  v.note = std::to_string(points) + " points";
}

/// Loss at which `rate` crosses zero, by bisection between two sweep rows.
double zero_crossing(const std::function<double(double)>& rate, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion_rate_curves(Verdict& v) {
  const ProtocolParams p = make_protocol(kV);
  cli::SweepSpec dr_spec;
  dr_spec.v = kV;
  dr_spec.eps = 0.01;
  dr_spec.start_db = 0.0;
  dr_spec.stop_db = 6.0;
  dr_spec.step_db = 0.01;
  const auto dr = cli::compute_sweep(dr_spec);

  auto first_loss_at_or_below_zero = [&](auto member) -> int {
    for (std::size_t i = 0; i < dr.size(); ++i) {
      if (dr[i].*member <= 0.0) return static_cast<int>(i);
    }
    return -1;
  };
  const int heis_idx = first_loss_at_or_below_zero(&cli::SweepRow::k_dr_heis);
  const int opt_idx = first_loss_at_or_below_zero(&cli::SweepRow::k_dr_opt);
  v.require(dr.front().k_dr_heis > 0.0 && dr.front().k_dr_opt > 0.0,
            "DR rates not positive at 0 dB");
  v.require(heis_idx > 0, "DR Heisenberg rate does not reach zero by 6 dB");
  v.require(opt_idx > 0, "DR optimal rate does not reach zero by 6 dB");
  if (heis_idx > 0 && opt_idx > 0) {
    const double heis = zero_crossing(
        [&](double db) { return heisenberg_dr(p, channel_from_loss_db(db, 0.01)).rate_bits; },
        dr[heis_idx - 1].loss_db, dr[heis_idx].loss_db);
    const double opt = zero_crossing(
        [&](double db) { return optimal_dr(p, channel_from_loss_db(db, 0.01)).rate_bits; },
        dr[opt_idx - 1].loss_db, dr[opt_idx].loss_db);
    v.require(opt > heis, "optimal DR crossing " + fmt(opt) + " dB not above Heisenberg " +
                              fmt(heis) + " dB");
    v.note = "DR zero: Heisenberg " + fmt(heis) + " dB, optimal " + fmt(opt) + " dB";
  }

  cli::SweepSpec rr_spec = dr_spec;
  rr_spec.stop_db = 20.0;
  double min_rr = INFINITY;
  for (const cli::SweepRow& r : cli::compute_sweep(rr_spec)) {
    min_rr = std::min(min_rr, r.k_rr_opt);
    v.require(r.k_rr_opt > 0.0, "RR optimal rate not positive at " + fmt(r.loss_db) + " dB");
  }
  v.note += "; min RR optimal " + fmt(min_rr) + " bits";
}

void criterion_heterodyne_vs_homodyne(Verdict& v) {
  cli::SweepSpec spec;
  spec.v = kV;
  spec.eps = 0.01;
  spec.start_db = 0.0;
  spec.stop_db = 20.0;
  spec.step_db = 0.01;
  const auto rows = cli::compute_sweep(spec);
  int sign_changes = 0;
  double threshold = NAN;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const cli::SweepRow& r = rows[i];
    v.require(r.k_rr_opt > r.k_rr_hom,
              "RR heterodyne not above homodyne at " + fmt(r.loss_db) + " dB");
    v.require(r.k_dr_opt - r.k_dr_hom != 0.0, "DR difference exactly zero at " +
                                                 fmt(r.loss_db) + " dB");
    if (i > 0) {
      const double before = rows[i - 1].k_dr_opt - rows[i - 1].k_dr_hom;
      const double now = r.k_dr_opt - r.k_dr_hom;
      if ((before > 0.0) != (now > 0.0)) {
        ++sign_changes;
        threshold = r.loss_db;
      }
    }
  }
  v.require(rows.front().k_dr_opt > rows.front().k_dr_hom,
            "DR heterodyne not ahead at 0 dB");
  v.require(sign_changes == 1, "DR difference changes sign " + std::to_string(sign_changes) +
                                   " times");
  v.note = std::to_string(rows.size()) + " points, DR threshold near " + fmt(threshold) + " dB";
}

void criterion_collapses(Verdict& v) {
  const ProtocolParams p = make_protocol(kV);
  double worst = 0.0;
  for (double t : kGridT) {
    const ChannelParams ch = make_channel(t, 0.0);
    const double rho = solve_rho(ch).rho_plus;
    const double err = std::abs(rho - (1.0 - t) / (1.0 + t));
    worst = std::max(worst, err);
    v.require(err <= 1e-12, at(t, 0.0) + " rho_plus off by " + fmt(err));
    const FeedForwardConfig ff = solve_feed_forward(ch);
    v.require(std::abs(ff.tap_transmittance - t) <= 1e-12,
              at(t, 0.0) + " feed-forward G=" + fmt(ff.tap_transmittance));
    v.require(std::abs(ff.gain) <= 1e-12, at(t, 0.0) + " feed-forward g=" + fmt(ff.gain));
    record_heisenberg("feed-forward " + at(t, 0.0), p, ch,
                      feed_forward_channel(p, ff).v_a_given_e,
                      feed_forward_channel(p, ff).v_b_given_e);
  }
  const ChannelParams half = make_channel(0.5, 0.0);
  const TeleportationConfig tc = solve_teleportation(half);
  const double cosh2r = std::cosh(2.0 * tc.r_sq);
  const double residual = teleportation_residual(half, tc);
  v.require(std::abs(cosh2r - 3.0) <= 1e-12, "cosh 2r = " + fmt(cosh2r));
  v.require(std::abs(residual) < 1e-12, "teleportation residual " + fmt(residual));
  v.note = "worst rho error " + fmt(worst) + ", teleportation residual " + fmt(residual);
}

void criterion_monte_carlo(Verdict& v) {
  const ProtocolParams p = make_protocol(kV);
  const ChannelParams ch = make_channel(0.5, 0.01);
  const AttackSolution attack = construct_optimal(p, ch, Direction::Direct);
  record_attack("mc optimal", p, ch, attack);

  SimConfig cfg;
  cfg.protocol = p;
  cfg.channel = ch;
  cfg.attack = attack.s_pair;
  cfg.n_samples = 1'000'000;
  cfg.seed = 20261016;
  const EstimatorResult r = run_sim(cfg);

  const double eve = eve_variance(p, solve_rho(ch).rho_plus);
  const double eve_m = heterodyne_conditioned_variance(eve);
  struct Entry {
    const char* name;
    QuadraturePair value;
    QuadraturePair se;
    double expected;
  };
  const Estimates& e = r.value;
  const Estimates& s = r.standard_error;
  const Entry entries[] = {
      {"V_A|B", e.a_given_b, s.a_given_b, v_a_given_b(p, ch)},
      {"V_B|A", e.b_given_a, s.b_given_a, v_b_given_a(p, ch)},
      {"V_AM|BM", e.am_given_bm, s.am_given_bm, v_am_given_bm(p, ch)},
      {"V_BM|AM", e.bm_given_am, s.bm_given_am, v_bm_given_am(ch)},
      {"V_A|E", e.a_given_e, s.a_given_e, eve},
      {"V_B|E", e.b_given_e, s.b_given_e, eve},
      {"V_AM|E", e.am_given_e, s.am_given_e, eve_m},
      {"V_BM|E", e.bm_given_e, s.bm_given_e, eve_m},
  };
  double worst_rel = 0.0, worst_z = 0.0;
  for (const Entry& en : entries) {
    for (int q = 0; q < 2; ++q) {
      const double got = q == 0 ? en.value.x : en.value.p;
      const double se = q == 0 ? en.se.x : en.se.p;
      const std::string name = std::string(en.name) + (q == 0 ? " x" : " p");
      const double rel = std::abs(got - en.expected) / en.expected;
      const double z = std::abs(got - en.expected) / se;
      worst_rel = std::max(worst_rel, rel);
      worst_z = std::max(worst_z, z);
      v.require(rel <= 0.01, name + " relative error " + fmt(rel));
      v.require(z <= 4.0, name + " off by " + fmt(z) + " standard errors");
    }
  }
  const double k_dr = optimal_dr(p, ch).rate_bits;
  const double k_rr = optimal_rr(p, ch).rate_bits;
  const double dr_rel = std::abs(e.rate_dr - k_dr) / std::abs(k_dr);
  const double rr_rel = std::abs(e.rate_rr - k_rr) / std::abs(k_rr);
  v.require(dr_rel <= 0.02, "DR rate " + fmt(e.rate_dr) + " vs " + fmt(k_dr) + " (relative " +
                                fmt(dr_rel) + ")");
  v.require(rr_rel <= 0.02, "RR rate " + fmt(e.rate_rr) + " vs " + fmt(k_rr) + " (relative " +
                                fmt(rr_rel) + ")");
  v.note = "seed " + std::to_string(cfg.seed) + ", worst variance error " + fmt(worst_rel) +
           " (" + fmt(worst_z) + " SE), DR " + fmt(dr_rel) + ", RR " + fmt(rr_rel);
}

void criterion_heisenberg(Verdict& v) {
  // Attacks not already produced by the criteria above.
  const ProtocolParams p = make_protocol(kV);
  for (double t : kGridT) {
    for (double eps : kGridEps) {
      const ChannelParams ch = make_channel(t, eps);
      const RhoSolution rho = solve_rho(ch);
      for (double target : {rho.rho_plus, rho.rho_minus}) {
        for (CosBranch b : {CosBranch::Positive, CosBranch::Negative}) {
          record_attack("construct " + at(t, eps), p, ch, construct_attack(p, ch, target, b));
        }
      }
      const CircuitReport minus =
          teleportation_channel(p, solve_teleportation(ch, RootChoice::Minus));
      record_heisenberg("teleportation minus " + at(t, eps), p, ch, minus.v_a_given_e,
                        minus.v_b_given_e);
      const SearchResult stress =
          unconstrained_stress_search(p, ch, Direction::Reverse, {.starts = 4});
      record_attack("stress " + at(t, eps), p, ch, stress.best);
    }
    const ChannelParams loss = make_channel(t, 0.0);
    record_attack("beamsplitter " + at(t, 0.0), p, loss,
                  evaluate_attack(p, loss, beamsplitter_heterodyne_attack(t)));
  }
  double worst = INFINITY;
  for (const HeisenbergSample& s : heisenberg_samples()) {
    worst = std::min({worst, s.a_product, s.b_product});
    v.require(s.a_product >= 1.0 - 1e-9, s.label + " V_A|E V_A|B = " + fmt(s.a_product));
    v.require(s.b_product >= 1.0 - 1e-9, s.label + " V_B|E V_B|A = " + fmt(s.b_product));
  }
  v.note = std::to_string(heisenberg_samples().size()) + " attack quadratures, smallest product " +
           fmt(worst);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_determinism(Verdict& v) {
  const auto dir = std::filesystem::temp_directory_path() / "cvqkd_acceptance";
  std::filesystem::create_directories(dir);
  const std::string cli = CVQKD_CLI_PATH;
  struct Case {
    std::string name;
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Case> cases{
      {"sweep", "sweep --v 12 --eps 0.01 --start 0 --stop 20 --step 0.1 --out {}/sweep.csv",
       {"sweep.csv"}},
      {"mc", "mc --v 12 --t 0.5 --eps 0.01 --attack optimal --n 200000 --seed 20261016 --json",
       {}},
      {"mc shots", "mc --t 0.3 --eps 0.05 --attack teleportation --n 20000 --seed 3 "
                   "--shots-out {}/shots.csv", {"shots.csv"}},
  };
  for (const Case& c : cases) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const auto run_dir = dir / std::to_string(run);
      std::filesystem::create_directories(run_dir);
      std::string args = c.args;
      for (auto pos = args.find("{}"); pos != std::string::npos; pos = args.find("{}")) {
        args.replace(pos, 2, run_dir.string());
      }
      const auto stdout_path = run_dir / "stdout.txt";
      const std::string command = cli + " " + args + " > " + stdout_path.string();
      const int status = std::system(command.c_str());
      v.require(status == 0, c.name + " exited with status " + std::to_string(status));
      outputs[run] = slurp(stdout_path);
      for (const std::string& f : c.files) outputs[run] += "\n--\n" + slurp(run_dir / f);
    }
    v.require(outputs[0].size() > 100, c.name + " produced almost no output");
    v.require(outputs[0] == outputs[1], c.name + " outputs differ between runs");
  }
  std::filesystem::remove_all(dir);
  v.note = std::to_string(cases.size()) + " command lines compared";
}

}  // namespace

int main() {
  std::cout << "cvqkd acceptance, V=" << kV << "\n";
  report(1, "optimizer reproduces rho_plus on the T x eps x direction grid", 120.0,
         criterion_optimizer);
  report(2, "teleportation and feed-forward circuits attain the optimal channel", 5.0,
         criterion_circuits);
  report(3, "rho_plus < chi and optimal rate above Heisenberg-limited rate", 0.0,
         criterion_rho_below_chi);
  report(4, "DR zero crossings ordered, RR optimal positive to 20 dB", 10.0,
         criterion_rate_curves);
  report(5, "heterodyne vs homodyne rate ordering", 10.0, criterion_heterodyne_vs_homodyne);
  report(6, "zero excess noise collapses", 0.0, criterion_collapses);
  report(7, "Monte-Carlo estimates agree with closed forms", 60.0, criterion_monte_carlo);
  report(8, "Heisenberg products of every attack", 0.0, criterion_heisenberg);
  report(9, "sweep and mc output byte-identical across runs", 0.0, criterion_determinism);
  std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) +
                                                             " criteria failed")
            << '\n';
  return g_failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
