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
#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <variant>

#include "cli/json_config.hpp"
#include "cvqkd/attack_search.hpp"
#include "cvqkd/keyrates.hpp"
#include "cvqkd/mc_sim.hpp"
#include "cvqkd/optical_attacks.hpp"
#include "cvqkd/parallel.hpp"

namespace cvqkd::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string render_scalar(const Json& v) {
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s = "[";
    for (const Json& e : v) s += (s.size() > 1 ? ", " : "") + render_scalar(e);
    return s + "]";
  }
  return v.dump();
}

// Text form of a report: one "key: value" line per scalar, nested keys
// joined with dots, arrays of objects as one line per element.
void write_text(std::ostream& out, const Json& doc, const std::string& prefix) {
  for (const auto& [key, value] : doc.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      write_text(out, value, name);
    } else if (value.is_array() && !value.empty() && value.front().is_object()) {
      for (const Json& element : value) {
        out << name;
        for (const auto& [k, v] : element.items()) out << "  " << k << "=" << render_scalar(v);
        out << '\n';
      }
    } else {
      out << name << ": " << render_scalar(value) << '\n';
    }
  }
}

void emit(std::ostream& out, const Json& doc, bool as_json) {
  if (as_json) {
    out << doc.dump(2) << '\n';
  } else {
    write_text(out, doc, "");
  }
}

class Checks {
 public:
  void near(const std::string& name, double value, double expected, double tol) {
    const double residual = value - expected;
    add(name, std::abs(residual) <= tol * std::max(1.0, std::abs(expected)),
        {{"value", value}, {"expected", expected}, {"residual", residual}});
  }

  void within_se(const std::string& name, double value, double expected,
                 double se, double sigmas) {
    const double residual = value - expected;
    add(name, std::abs(residual) <= sigmas * se,
        {{"value", value}, {"expected", expected}, {"se", se},
         {"z", se > 0.0 ? residual / se : 0.0}});
  }

  void at_least(const std::string& name, double value, double bound) {
    add(name, value >= bound, {{"value", value}, {"bound", bound}});
  }

  void at_most(const std::string& name, double value, double bound) {
    add(name, value <= bound, {{"value", value}, {"bound", bound}});
  }

  [[nodiscard]] bool passed() const { return passed_; }

  void attach(Json& doc) const {
    doc["checks"] = items_;
    doc["result"] = passed_ ? "PASS" : "FAIL";
  }

 private:
  void add(const std::string& name, bool pass, const Json& fields) {
    Json item;
    item["status"] = pass ? "PASS" : "FAIL";
    item["name"] = name;
    for (const auto& [k, v] : fields.items()) item[k] = v;
    items_.push_back(std::move(item));
    passed_ = passed_ && pass;
  }

  Json items_ = Json::array();
  bool passed_ = true;
};

Json pair_json(const QuadraturePair& q) { return {{"x", q.x}, {"p", q.p}}; }

Json channel_json(const ProtocolParams& p, const ChannelParams& ch) {
  return {{"V", p.v},
          {"T", ch.transmittance},
          {"loss_db", transmittance_to_loss_db(ch.transmittance)},
          {"eps", ch.excess_noise},
          {"chi", ch.chi}};
}

Json report_json(const KeyRateReport& r) {
  return {{"protocol", std::string(to_string(r.protocol))},
          {"direction", std::string(to_string(r.direction))},
          {"bound", std::string(to_string(r.bound))},
          {"v_given_partner", r.v_given_partner},
          {"v_given_eve", r.v_given_eve},
          {"rate_bits", r.rate_bits},
          {"has_key", r.has_key()}};
}

Direction parse_direction(const std::string& s) {
  if (s == "dr") return Direction::Direct;
  if (s == "rr") return Direction::Reverse;
  throw DomainError("direction must be dr or rr, got '" + s + "'");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw DomainError("cannot write '" + path + "'");
  return file;
}

// Moments of Bob's mode and its correlation with Alice, p sign flipped.
struct ChannelMoments {
  double b_var_x;
  double b_var_p;
  double ab_x;
  double ab_p;
};

void channel_checks(Checks& checks, const ProtocolParams& p,
                    const ChannelParams& ch, const ChannelMoments& m,
                    double tol) {
  const double b_var = ch.transmittance * (p.v + ch.chi);
  const double ab = std::sqrt(ch.transmittance * (p.v * p.v - 1.0));
  checks.near("var_x_b", m.b_var_x, b_var, tol);
  checks.near("var_p_b", m.b_var_p, b_var, tol);
  checks.near("cov_x_ab", m.ab_x, ab, tol);
  checks.near("cov_p_ab", m.ab_p, ab, tol);
}

void eve_checks(Checks& checks, const ProtocolParams& p, const ChannelParams& ch,
                const QuadraturePair& vae, const QuadraturePair& vbe,
                double expected, double tol) {
  checks.near("v_a_given_e.x", vae.x, expected, tol);
  checks.near("v_a_given_e.p", vae.p, expected, tol);
  checks.near("v_b_given_e.x", vbe.x, expected, tol);
  checks.near("v_b_given_e.p", vbe.p, expected, tol);
  const double vab = v_a_given_b(p, ch);
  const double vba = v_b_given_a(p, ch);
  checks.at_least("heisenberg_a", std::min(vae.x, vae.p) * vab, 1.0 - 1e-9);
  checks.at_least("heisenberg_b", std::min(vbe.x, vbe.p) * vba, 1.0 - 1e-9);
}

int finish(Checks& checks, Json& doc, bool as_json, std::ostream& out) {
  checks.attach(doc);
  emit(out, doc, as_json);
  return checks.passed() ? kExitOk : kExitVerificationFailed;
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 12);
  return std::string(buf.data(), res.ptr);
}

ChannelParams resolve_channel(const ChannelArgs& args) {
  if (args.t.has_value() == args.loss_db.has_value()) {
    throw DomainError("give exactly one of --t and --loss-db");
  }
  if (args.t) return make_channel(*args.t, args.eps);
  return channel_from_loss_db(*args.loss_db, args.eps);
}

std::vector<SweepRow> compute_sweep(const SweepSpec& spec) {
  if (!std::isfinite(spec.start_db) || !std::isfinite(spec.stop_db) ||
      !(spec.start_db <= spec.stop_db)) {
    throw DomainError("sweep needs start <= stop");
  }
  if (!(spec.step_db > 0.0) || !std::isfinite(spec.step_db)) {
    throw DomainError("sweep step must be positive");
  }
  const ProtocolParams p = make_protocol(spec.v);
  make_channel(1.0, spec.eps);
  const auto n = static_cast<std::size_t>(
                     std::floor((spec.stop_db - spec.start_db) / spec.step_db + 1e-9)) +
                 1;
  std::vector<SweepRow> rows(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const double loss = spec.start_db + static_cast<double>(i) * spec.step_db;
        const ChannelParams ch = channel_from_loss_db(loss, spec.eps);
        SweepRow& r = rows[i];
        r.loss_db = loss;
        r.transmittance = ch.transmittance;
        r.chi = ch.chi;
        r.rho_plus = solve_rho(ch).rho_plus;
        r.k_dr_heis = heisenberg_dr(p, ch).rate_bits;
        r.k_dr_opt = optimal_dr(p, ch).rate_bits;
        r.k_rr_heis = heisenberg_rr(p, ch).rate_bits;
        r.k_rr_opt = optimal_rr(p, ch).rate_bits;
        r.k_dr_hom = homodyne_dr(p, ch).rate_bits;
        r.k_rr_hom = homodyne_rr(p, ch).rate_bits;
      },
      spec.threads);
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    const std::array<double, 10> cols{r.loss_db,   r.transmittance, r.chi,
                                      r.rho_plus,  r.k_dr_heis,     r.k_dr_opt,
                                      r.k_rr_heis, r.k_rr_opt,      r.k_dr_hom,
                                      r.k_rr_hom};
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i > 0) out << ',';
      out << format_number(cols[i]);
    }
    out << '\n';
  }
}

int cmd_rate(const ChannelArgs& args, std::ostream& out) {
  const ProtocolParams p = make_protocol(args.v);
  const ChannelParams ch = resolve_channel(args);
  const RhoSolution rho = solve_rho(ch);

  Json doc = channel_json(p, ch);
  doc["rho_plus"] = rho.rho_plus;
  doc["rho_minus"] = rho.rho_minus;
  doc["v_a_given_b"] = v_a_given_b(p, ch);
  doc["v_b_given_a"] = v_b_given_a(p, ch);
  doc["v_eve_heisenberg_dr"] = heisenberg_dr(p, ch).v_given_eve;
  doc["v_eve_heisenberg_rr"] = heisenberg_rr(p, ch).v_given_eve;
  doc["v_eve_optimal"] = eve_variance(p, rho.rho_plus);

  Json rates = Json::array();
  bool any_key = false;
  for (const KeyRateReport& r :
       {heisenberg_dr(p, ch), optimal_dr(p, ch), heisenberg_rr(p, ch),
        optimal_rr(p, ch), homodyne_dr(p, ch), homodyne_rr(p, ch)}) {
    rates.push_back(report_json(r));
    any_key = any_key || r.has_key();
  }
  doc["rates"] = rates;
  doc["no_key"] = !any_key;
  emit(out, doc, args.json);
  return kExitOk;
}

int cmd_sweep(const SweepSpec& spec, const std::string& out_path,
              std::ostream& out) {
  const std::vector<SweepRow> rows = compute_sweep(spec);
  if (out_path.empty()) {
    write_sweep_csv(out, rows);
    return kExitOk;
  }
  std::ofstream file = open_output(out_path);
  write_sweep_csv(file, rows);
  file.close();
  if (!file) throw DomainError("failed writing '" + out_path + "'");
  return kExitOk;
}

int cmd_verify_attack(const VerifyArgs& args, std::ostream& out) {
  const ProtocolParams p = make_protocol(args.v);
  const ChannelParams ch = resolve_channel(args);
  const RhoSolution rho = solve_rho(ch);
  if (args.root != "plus" && args.root != "minus") {
    throw DomainError("root must be plus or minus, got '" + args.root + "'");
  }
  if (args.root == "minus" && args.scheme != "teleportation") {
    throw DomainError("--root minus applies to the teleportation scheme only");
  }
  const double target_rho = args.root == "plus" ? rho.rho_plus : rho.rho_minus;
  const double expected_eve = eve_variance(p, target_rho);

  Json doc = channel_json(p, ch);
  doc["scheme"] = args.scheme;
  doc["rho"] = target_rho;
  Checks checks;
  const double tol = args.tolerance;

  if (args.scheme == "optimal" || args.scheme == "beamsplitter") {
    const SymplecticPair pair = args.scheme == "optimal"
                                    ? construct_optimal(p, ch, Direction::Direct).s_pair
                                    : beamsplitter_heterodyne_attack(ch.transmittance);
    const AttackSolution s = evaluate_attack(p, ch, pair);
    const MultiModeCovariance cov = apply_attack(p, pair);
    channel_checks(checks, p, ch,
                   {cov.x_block(kModeB, kModeB), cov.p_block(kModeB, kModeB),
                    cov.x_block(kModeA, kModeB), -cov.p_block(kModeA, kModeB)},
                   tol);
    doc["v_eve"] = s.v_a_given_e.x;
    doc["v_a_given_e"] = pair_json(s.v_a_given_e);
    doc["v_b_given_e"] = pair_json(s.v_b_given_e);
    eve_checks(checks, p, ch, s.v_a_given_e, s.v_b_given_e, expected_eve, tol);
    checks.at_most("symplectic_residual", pair.commutator_residual(), tol);
    checks.at_least("uncertainty_margin", uncertainty_margin(cov), -1e-9);
  } else if (args.scheme == "teleportation" || args.scheme == "feed-forward") {
    CircuitReport r;
    if (args.scheme == "teleportation") {
      const TeleportationConfig cfg = solve_teleportation(
          ch, args.root == "plus" ? RootChoice::Plus : RootChoice::Minus);
      doc["r_sq"] = cfg.r_sq;
      doc["cosh_2r"] = std::cosh(2.0 * cfg.r_sq);
      doc["gain"] = cfg.gain;
      checks.at_most("squeezing_condition",
                     std::abs(teleportation_residual(ch, cfg)), tol);
      r = teleportation_channel(p, cfg);
    } else {
      const FeedForwardConfig cfg = solve_feed_forward(ch);
      doc["tap_transmittance"] = cfg.tap_transmittance;
      doc["gain"] = cfg.gain;
      r = feed_forward_channel(p, cfg);
    }
    doc["v_eve"] = r.v_a_given_e.x;
    doc["v_a_given_e"] = pair_json(r.v_a_given_e);
    doc["v_b_given_e"] = pair_json(r.v_b_given_e);
    channel_checks(checks, p, ch,
                   {r.b_variance_x, r.b_variance_p, r.ab_correlation_x,
                    r.ab_correlation_p},
                   tol);
    eve_checks(checks, p, ch, r.v_a_given_e, r.v_b_given_e, expected_eve, tol);
  } else {
    throw DomainError("scheme must be optimal, teleportation, feed-forward or "
                      "beamsplitter, got '" + args.scheme + "'");
  }
  return finish(checks, doc, args.json, out);
}

int cmd_search(const SearchArgs& args, std::ostream& out) {
  const ProtocolParams p = make_protocol(args.v);
  const ChannelParams ch = resolve_channel(args);
  const Direction direction = parse_direction(args.direction);
  SearchConfig cfg;
  cfg.seed = args.seed;
  cfg.starts = args.starts;
  cfg.threads = args.threads;

  Json doc = channel_json(p, ch);
  doc["direction"] = std::string(to_string(direction));
  doc["mode"] = args.unconstrained ? "unconstrained" : "symmetric";
  doc["seed"] = args.seed;
  Checks checks;
  SearchResult result;
  try {
    result = args.unconstrained ? unconstrained_stress_search(p, ch, direction, cfg)
                                : optimize_attack(p, ch, direction, cfg);
  } catch (const SearchError& e) {
    doc["error"] = e.what();
    doc["result"] = "FAIL";
    emit(out, doc, args.json);
    return kExitVerificationFailed;
  }
  const AttackSolution& best = result.best;
  const double rho_plus = solve_rho(ch).rho_plus;
  doc["rho"] = best.rho_achieved;
  doc["rho_plus"] = rho_plus;
  doc["objective"] = best.objective;
  doc["v_a_given_e"] = pair_json(best.v_a_given_e);
  doc["v_b_given_e"] = pair_json(best.v_b_given_e);
  doc["residuals"] = {best.residuals[0], best.residuals[1]};
  doc["params"] = {{"theta", best.params.theta},
                   {"xi", best.params.xi},
                   {"phi", best.params.phi}};
  doc["feasible_starts"] = result.diagnostics.feasible_starts;
  doc["starts"] = result.diagnostics.starts;

  const double closed = eve_variance(p, rho_plus);
  if (args.unconstrained) {
    const double symmetric_objective = 2.0 * std::log(closed);
    doc["symmetric_objective"] = symmetric_objective;
    checks.at_least("not_below_symmetric", best.objective,
                    symmetric_objective - 1e-8);
  } else {
    const double rel = rho_plus > 0.0 ? std::abs(best.rho_achieved - rho_plus) / rho_plus
                                      : std::abs(best.rho_achieved);
    checks.at_most("rho_relative_error", rel, 1e-6);
  }
  checks.at_most("symplectic_residual", best.s_pair.commutator_residual(), 1e-9);
  checks.at_least("heisenberg_a",
                  std::min(best.v_a_given_e.x, best.v_a_given_e.p) * v_a_given_b(p, ch),
                  1.0 - 1e-9);
  checks.at_least("heisenberg_b",
                  std::min(best.v_b_given_e.x, best.v_b_given_e.p) * v_b_given_a(p, ch),
                  1.0 - 1e-9);
  return finish(checks, doc, args.json, out);
}

int cmd_mc(const McArgs& args, std::ostream& out) {
  const ProtocolParams p = make_protocol(args.v);
  const ChannelParams ch = resolve_channel(args);
  SimConfig cfg;
  cfg.protocol = p;
  cfg.channel = ch;
  cfg.n_samples = args.n;
  cfg.seed = args.seed;
  cfg.batches = args.batches;
  cfg.threads = args.threads;
  if (args.attack == "none") {
    cfg.attack = NoAttack{};
  } else if (args.attack == "optimal") {
    cfg.attack = construct_optimal(p, ch, Direction::Direct).s_pair;
  } else if (args.attack == "teleportation") {
    cfg.attack = solve_teleportation(ch);
  } else if (args.attack == "feed-forward") {
    cfg.attack = solve_feed_forward(ch);
  } else {
    throw DomainError("attack must be none, optimal, teleportation or "
                      "feed-forward, got '" + args.attack + "'");
  }
  validate(cfg);
  if (!args.shots_out.empty()) {
    std::ofstream file = open_output(args.shots_out);
    write_shots_csv(file, sample_shots(cfg));
    file.close();
    if (!file) throw DomainError("failed writing '" + args.shots_out + "'");
  }
  const EstimatorResult r = run_sim(cfg);

  Json doc = channel_json(p, ch);
  doc["attack"] = args.attack;
  doc["n"] = args.n;
  doc["batches"] = args.batches;
  doc["seed"] = args.seed;
  doc["stream_version"] = kRandomStreamVersion;
  Checks checks;
  constexpr double kSigmas = 4.0;

  const double b_var = ch.transmittance * (p.v + ch.chi);
  const double ab = std::sqrt(ch.transmittance * (p.v * p.v - 1.0));
  struct Entry {
    const char* name;
    int i;
    int j;
    double expected_x;
    double expected_p;
  };
  for (const Entry& e : {Entry{"var_a", kSimA, kSimA, p.v, p.v},
                         Entry{"var_b", kSimB, kSimB, b_var, b_var},
                         Entry{"cov_ab", kSimA, kSimB, ab, -ab}}) {
    checks.within_se(std::string(e.name) + ".x", r.moments_x(e.i, e.j), e.expected_x,
                     r.moments_se_x(e.i, e.j), kSigmas);
    checks.within_se(std::string(e.name) + ".p", r.moments_p(e.i, e.j), e.expected_p,
                     r.moments_se_p(e.i, e.j), kSigmas);
  }

  auto estimate = [&](const std::string& name, const QuadraturePair& value,
                      const QuadraturePair& se, double expected) {
    checks.within_se(name + ".x", value.x, expected, se.x, kSigmas);
    checks.within_se(name + ".p", value.p, expected, se.p, kSigmas);
  };
  const Estimates& v = r.value;
  const Estimates& se = r.standard_error;
  estimate("v_a_given_b", v.a_given_b, se.a_given_b, v_a_given_b(p, ch));
  estimate("v_b_given_a", v.b_given_a, se.b_given_a, v_b_given_a(p, ch));
  estimate("v_am_given_bm", v.am_given_bm, se.am_given_bm, v_am_given_bm(p, ch));
  estimate("v_bm_given_am", v.bm_given_am, se.bm_given_am, v_bm_given_am(ch));
  doc["i_ab"] = v.i_ab;
  if (r.has_eve) {
    const double eve = eve_variance(p, solve_rho(ch).rho_plus);
    const double eve_m = heterodyne_conditioned_variance(eve);
    estimate("v_a_given_e", v.a_given_e, se.a_given_e, eve);
    estimate("v_b_given_e", v.b_given_e, se.b_given_e, eve);
    estimate("v_am_given_e", v.am_given_e, se.am_given_e, eve_m);
    estimate("v_bm_given_e", v.bm_given_e, se.bm_given_e, eve_m);
    doc["i_ae"] = v.i_ae;
    doc["i_be"] = v.i_be;
    doc["rate_dr"] = {{"empirical", v.rate_dr},
                      {"se", se.rate_dr},
                      {"closed_form", optimal_dr(p, ch).rate_bits}};
    doc["rate_rr"] = {{"empirical", v.rate_rr},
                      {"se", se.rate_rr},
                      {"closed_form", optimal_rr(p, ch).rate_bits}};
    doc["displacement_rms"] = r.displacement_rms;
  }
  return finish(checks, doc, args.json, out);
}

namespace {

void add_channel_options(CLI::App* sub, ChannelArgs& a) {
  sub->add_option("--v", a.v, "Alice's variance V in shot-noise units (>= 1)")
      ->capture_default_str();
  sub->add_option("--t", a.t, "channel transmittance T in (0, 1]");
  sub->add_option("--loss-db", a.loss_db, "line loss in dB; T = 10^(-dB/10)");
  sub->add_option("--eps", a.eps, "excess noise referred to the input")
      ->capture_default_str();
  sub->add_flag("--json", a.json, "print the report as JSON");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secret key rates and optimal Gaussian attacks for the "
               "no-switching CV-QKD protocol.",
               "cvqkd"};
  app.footer(
      "Losses in dB map to transmittance as T = 10^(-dB/10).\n"
      "Exit codes: 0 ok, 1 verification failed, 2 usage or domain error.");
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "JSON file of option values; flags win");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  ChannelArgs rate_args;
  CLI::App* rate = app.add_subcommand("rate", "key rates at one channel point");
  add_channel_options(rate, rate_args);

  SweepSpec sweep_spec;
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "CSV of key rates over line loss");
  sweep->add_option("--v", sweep_spec.v, "Alice's variance V")->capture_default_str();
  sweep->add_option("--eps", sweep_spec.eps, "excess noise")->capture_default_str();
  sweep->add_option("--start", sweep_spec.start_db, "first loss in dB")
      ->capture_default_str();
  sweep->add_option("--stop", sweep_spec.stop_db, "last loss in dB")->capture_default_str();
  sweep->add_option("--step", sweep_spec.step_db, "loss step in dB")->capture_default_str();
  sweep->add_option("--out", sweep_out, "output path (default: stdout)");
  sweep->add_option("--threads", sweep_spec.threads, "worker threads, 0 = all cores");

  VerifyArgs verify_args;
  CLI::App* verify =
      app.add_subcommand("verify-attack", "check an attack against the closed forms");
  add_channel_options(verify, verify_args);
  verify->add_option("--scheme", verify_args.scheme,
                     "optimal | teleportation | feed-forward | beamsplitter")
      ->capture_default_str();
  verify->add_option("--root", verify_args.root, "plus | minus (teleportation)")
      ->capture_default_str();
  verify->add_option("--tol", verify_args.tolerance, "tolerance")->capture_default_str();

  SearchArgs search_args;
  CLI::App* search = app.add_subcommand("search", "numerical attack optimisation");
  add_channel_options(search, search_args);
  search->add_option("--direction", search_args.direction, "dr | rr")
      ->capture_default_str();
  search->add_option("--seed", search_args.seed, "seed for the start points")
      ->capture_default_str();
  search->add_option("--starts", search_args.starts, "number of starts")
      ->capture_default_str();
  search->add_flag("--unconstrained", search_args.unconstrained,
                   "drop the equal-information constraint");
  search->add_option("--threads", search_args.threads, "worker threads, 0 = all cores");

  McArgs mc_args;
  CLI::App* mc = app.add_subcommand("mc", "Monte-Carlo cross-check");
  add_channel_options(mc, mc_args);
  mc->add_option("--attack", mc_args.attack,
                 "none | optimal | teleportation | feed-forward")
      ->capture_default_str();
  mc->add_option("--n", mc_args.n, "number of shots")->capture_default_str();
  mc->add_option("--seed", mc_args.seed, "random seed")->capture_default_str();
  mc->add_option("--batches", mc_args.batches, "batches for standard errors")
      ->capture_default_str();
  mc->add_option("--shots-out", mc_args.shots_out, "write raw shots as CSV");
  mc->add_option("--threads", mc_args.threads, "worker threads, 0 = all cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*rate) return cmd_rate(rate_args, out);
    if (*sweep) return cmd_sweep(sweep_spec, sweep_out, out);
    if (*verify) return cmd_verify_attack(verify_args, out);
    if (*search) return cmd_search(search_args, out);
    if (*mc) return cmd_mc(mc_args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cvqkd::cli
