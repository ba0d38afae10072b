#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "acgn/capacity.hpp"
#include "acgn/coding.hpp"
#include "acgn/config.hpp"
#include "acgn/version.hpp"

namespace acgn {

// Verbosity from ACGN_LOG: quiet/0, info/1 (default), debug/2.
inline int log_level() {
  const char* v = std::getenv("ACGN_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "quiet" || s == "0") return 0;
  if (s == "debug" || s == "2") return 2;
  return 1;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[acgn] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[acgn:debug] " << msg << "\n";
}

namespace detail {

inline std::string fmt6(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%.6g", v);
  return b;
}

inline std::string fmt17(double v) {
  char b[40];
  std::snprintf(b, sizeof(b), "%.17g", v);
  return b;
}

inline nlohmann::json mat_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline nlohmann::json ivec_json(const IVec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline void print_matrix(std::ostream& os, const std::string& name, const Mat& m) {
  os << name << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << " ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      char b[40];
      std::snprintf(b, sizeof(b), " %12.6g", m(i, j));
      os << b;
    }
    os << "\n";
  }
}

inline nlohmann::json config_json(const ChannelConfig& cfg) {
  nlohmann::json j;
  j["n"] = cfg.model.n();
  j["budget"] = cfg.budget;
  j["p"] = cfg.model.p();
  j["q"] = cfg.model.q();
  nlohmann::json fs = nlohmann::json::array();
  for (const Mat& f : cfg.model.F) fs.push_back(mat_json(f));
  nlohmann::json gs = nlohmann::json::array();
  for (const Mat& g : cfg.model.G) gs.push_back(mat_json(g));
  j["F"] = std::move(fs);
  j["G"] = std::move(gs);
  j["Vhat"] = mat_json(cfg.model.Vhat);
  j["options"] = {{"sign", cfg.sign == SignPolicy::automatic
                               ? "auto"
                               : (cfg.sign == SignPolicy::plus ? "+" : "-")},
                  {"steps", cfg.steps},
                  {"seed", cfg.seed},
                  {"nodes", cfg.nodes},
                  {"restarts", cfg.restarts}};
  return j;
}

inline nlohmann::json result_json(const CapacityResult& res) {
  nlohmann::json j;
  j["lower_bound_bits"] = res.lower_bound_bits;
  j["budget"] = res.budget;
  j["method"] = method_name(res.method);
  j["vhat_eigs"] = vec_json(res.design.vhat_eigs);
  j["allocation_P"] = vec_json(res.design.alloc.P);
  j["pole_magnitudes"] = vec_json(res.design.alloc.a);
  j["signs"] = ivec_json(res.design.alloc.signs);
  j["transmit_power"] = res.design.transmit_power;
  j["are_residual"] = res.design.are_residual;
  j["A"] = mat_json(res.design.A);
  j["C"] = mat_json(res.design.C);
  j["Khat"] = mat_json(res.design.Khat);
  j["P"] = mat_json(res.design.P);
  j["U"] = mat_json(res.design.U);
  j["diagnostics"] = {{"starts", res.diagnostics.starts},
                      {"sweeps", res.diagnostics.sweeps},
                      {"evals", res.diagnostics.evals},
                      {"start_rate", res.diagnostics.start_rate},
                      {"budget_residual", res.diagnostics.budget_residual},
                      {"polished", res.diagnostics.polished},
                      {"notes", res.diagnostics.notes}};
  return j;
}

inline nlohmann::json record_json(const std::string& command, const ChannelConfig& cfg,
                                  double wall_ms) {
  nlohmann::json j;
  j["tool_version"] = kVersion;
  j["command"] = command;
  j["wall_time_ms"] = wall_ms;
  j["config"] = config_json(cfg);
  return j;
}

inline void print_allocation(std::ostream& os, const CapacityResult& res) {
  os << "  l   vhat          P             a           sign\n";
  for (Eigen::Index l = 0; l < res.design.vhat_eigs.size(); ++l) {
    char b[160];
    std::snprintf(b, sizeof(b), "  %-3ld %-13s %-13s %-11s %s\n", static_cast<long>(l + 1),
                  fmt6(res.design.vhat_eigs(l)).c_str(), fmt6(res.design.alloc.P(l)).c_str(),
                  fmt6(res.design.alloc.a(l)).c_str(),
                  res.design.alloc.signs(l) > 0 ? "+" : "-");
    os << b;
  }
}

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Solver dispatch: white noise goes to water-filling, diagonal models to
/// the per-channel Lagrangian, anything else to the general search.
inline CapacityResult solve_config(const ChannelConfig& cfg) {
  const ArmaNoiseModel& m = cfg.model;
  require_valid(m);
  if (m.p() == 0 && m.q() == 0) {
    SymEig se = sym_eig(m.Vhat);
    Allocation wf = waterfill(se.lambda, cfg.budget);
    const int s = cfg.sign == SignPolicy::minus ? -1 : +1;
    CapacityResult res;
    res.method = Method::waterfill;
    res.budget = cfg.budget;
    res.design = detail::design_in_basis(m, se.U, se.lambda, wf.P,
                                         IVec::Constant(m.n(), s));
    res.lower_bound_bits = res.design.alloc.rate_bits;
    res.diagnostics.budget_residual =
        (res.design.transmit_power - cfg.budget) / cfg.budget;
    return res;
  }
  if (detail::is_diagonal_model(m)) return solve_independent(m, cfg.budget, cfg.sign);
  return solve_general(m, cfg.budget, cfg.sign, cfg.restarts, cfg.seed);
}

inline int cmd_capacity(const ChannelConfig& cfg, bool json, std::ostream& out) {
  detail::WallClock clock;
  CapacityResult res = solve_config(cfg);
  log_debug("optimizer evals: " + std::to_string(res.diagnostics.evals) +
            ", starts: " + std::to_string(res.diagnostics.starts));
  if (json) {
    nlohmann::json j = detail::record_json("capacity", cfg, clock.ms());
    j["result"] = detail::result_json(res);
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "feedback capacity lower bound\n";
  out << "  rate            " << detail::fmt6(res.lower_bound_bits) << " bits/use\n";
  out << "  method          " << method_name(res.method) << "\n";
  out << "  budget          " << detail::fmt6(res.budget) << "\n";
  out << "  transmit power  " << detail::fmt6(res.design.transmit_power) << "\n";
  detail::print_allocation(out, res);
  return 0;
}

inline int cmd_design(const ChannelConfig& cfg, bool json, std::ostream& out) {
  detail::WallClock clock;
  CapacityResult res = solve_config(cfg);
  if (json) {
    nlohmann::json j = detail::record_json("design", cfg, clock.ms());
    j["result"] = detail::result_json(res);
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "channel design (rate " << detail::fmt6(res.lower_bound_bits) << " bits/use, method "
      << method_name(res.method) << ")\n";
  detail::print_allocation(out, res);
  detail::print_matrix(out, "A", res.design.A);
  detail::print_matrix(out, "C", res.design.C);
  detail::print_matrix(out, "Khat", res.design.Khat);
  detail::print_matrix(out, "P", res.design.P);
  return 0;
}

inline int cmd_waterfill(const Vec& eigs, double budget, bool json, std::ostream& out) {
  detail::WallClock clock;
  Allocation al = waterfill(eigs, budget);
  double level = 0.0;
  for (Eigen::Index l = 0; l < eigs.size(); ++l)
    if (al.P(l) > 0.0) level = std::max(level, eigs(l) + al.P(l));
  if (json) {
    nlohmann::json j;
    j["tool_version"] = kVersion;
    j["command"] = "waterfill";
    j["wall_time_ms"] = clock.ms();
    j["eigs"] = detail::vec_json(eigs);
    j["budget"] = budget;
    j["allocation_P"] = detail::vec_json(al.P);
    j["water_level"] = level;
    j["rate_bits"] = al.rate_bits;
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "water-filling allocation\n";
  out << "  budget       " << detail::fmt6(budget) << "\n";
  out << "  water level  " << detail::fmt6(level) << "\n";
  out << "  rate         " << detail::fmt6(al.rate_bits) << " bits/use\n";
  out << "  l   vhat          P\n";
  for (Eigen::Index l = 0; l < eigs.size(); ++l) {
    char b[120];
    std::snprintf(b, sizeof(b), "  %-3ld %-13s %s\n", static_cast<long>(l + 1),
                  detail::fmt6(eigs(l)).c_str(), detail::fmt6(al.P(l)).c_str());
    out << b;
  }
  return 0;
}

inline int cmd_simulate(const ChannelConfig& cfg, const std::string& dump_path,
                        bool json, std::ostream& out) {
  detail::WallClock clock;
  CapacityResult res = solve_config(cfg);
  CodingScheme scheme = synthesize(res.design, cfg.model);
  const bool keep = !dump_path.empty();
  SimulationReport rep = simulate(scheme, cfg.steps, cfg.seed, keep);
  if (keep) {
    std::ofstream f(dump_path);
    if (!f) throw std::invalid_argument("cannot open dump file: " + dump_path);
    const Eigen::Index n = rep.yp.cols();
    f << "k";
    for (Eigen::Index c = 0; c < n; ++c) f << ",yp_" << (c + 1);
    for (Eigen::Index c = 0; c < n; ++c) f << ",ep_" << (c + 1);
    f << "\n";
    for (Eigen::Index k = 0; k < rep.yp.rows(); ++k) {
      f << k;
      for (Eigen::Index c = 0; c < n; ++c) f << "," << detail::fmt17(rep.yp(k, c));
      for (Eigen::Index c = 0; c < n; ++c) f << "," << detail::fmt17(rep.ep(k, c));
      f << "\n";
    }
    log_info("wrote per-step dump to " + dump_path);
  }
  if (json) {
    nlohmann::json j = detail::record_json("simulate", cfg, clock.ms());
    j["result"] = detail::result_json(res);
    j["simulation"] = {{"steps", rep.steps},
                       {"burn_in", rep.burn_in},
                       {"seed", rep.seed},
                       {"empirical_power", rep.empirical_power},
                       {"predicted_power", rep.predicted_power},
                       {"power_rel_err", rep.power_rel_err},
                       {"empirical_cov", detail::mat_json(rep.empirical_cov)},
                       {"predicted_cov", detail::mat_json(rep.predicted_cov)},
                       {"cov_rel_err", rep.cov_rel_err},
                       {"window_power", {rep.window_power1, rep.window_power2}},
                       {"stationarity_gap", rep.stationarity_gap},
                       {"mc_tol", rep.mc_tol},
                       {"power_ok", rep.power_ok},
                       {"cov_ok", rep.cov_ok},
                       {"stationary_ok", rep.stationary_ok}};
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "closed-loop simulation\n";
  out << "  steps             " << rep.steps << " (burn-in " << rep.burn_in << ")\n";
  out << "  seed              " << rep.seed << "\n";
  out << "  rate              " << detail::fmt6(scheme.rate_bits) << " bits/use\n";
  out << "  predicted power   " << detail::fmt6(rep.predicted_power) << "\n";
  out << "  empirical power   " << detail::fmt6(rep.empirical_power) << " (rel err "
      << detail::fmt6(rep.power_rel_err) << ", tol " << detail::fmt6(rep.mc_tol) << ")\n";
  out << "  cov rel err       " << detail::fmt6(rep.cov_rel_err) << "\n";
  out << "  window powers     " << detail::fmt6(rep.window_power1) << " / "
      << detail::fmt6(rep.window_power2) << "\n";
  out << "  stationary        " << (rep.stationary_ok ? "yes" : "no") << "\n";
  return 0;
}

inline int cmd_verify(const ChannelConfig& cfg, bool json, std::ostream& out) {
  detail::WallClock clock;
  CapacityResult res = solve_config(cfg);
  CodingScheme scheme = synthesize(res.design, cfg.model);
  VerificationReport rep = verify_design(scheme, cfg.steps, cfg.seed, cfg.nodes);
  bool any_inconclusive = false;
  for (const auto& c : rep.checks)
    if (c.status == CheckStatus::inconclusive) any_inconclusive = true;
  if (any_inconclusive)
    log_info("warning: Monte Carlo checks inconclusive at steps=" +
             std::to_string(cfg.steps) + " (need at least 1e5)");
  if (json) {
    nlohmann::json j = detail::record_json("verify", cfg, clock.ms());
    j["result"] = detail::result_json(res);
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rep.checks) {
      checks.push_back({{"name", c.name},
                        {"status", c.status == CheckStatus::pass
                                       ? "pass"
                                       : (c.status == CheckStatus::fail ? "fail"
                                                                        : "inconclusive")},
                        {"value", c.value},
                        {"tolerance", c.tolerance},
                        {"note", c.note}});
    }
    j["verification"] = {{"checks", std::move(checks)},
                         {"all_pass", rep.all_pass},
                         {"sim_steps", rep.sim_steps}};
    out << j.dump(2) << "\n";
    return rep.all_pass ? 0 : 1;
  }
  out << "design verification (rate " << detail::fmt6(res.lower_bound_bits) << " bits/use)\n";
  out << "  check                    status        value         tolerance\n";
  for (const auto& c : rep.checks) {
    const char* st = c.status == CheckStatus::pass
                         ? "pass"
                         : (c.status == CheckStatus::fail ? "FAIL" : "inconclusive");
    char b[200];
    std::snprintf(b, sizeof(b), "  %-24s %-13s %-13s %s\n", c.name.c_str(), st,
                  detail::fmt6(c.value).c_str(), detail::fmt6(c.tolerance).c_str());
    out << b;
    if (!c.note.empty()) out << "      note: " << c.note << "\n";
  }
  out << "verdict: " << (rep.all_pass ? "PASS" : "FAIL") << "\n";
  return rep.all_pass ? 0 : 1;
}

}  // namespace acgn
