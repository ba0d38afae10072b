// acgncap: lower bounds on the feedback capacity of parallel colored
// Gaussian noise channels, plus design, simulation and verification of the
// matching recursive coding schemes.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acgn/commands.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  double budget = 0.0;
  bool has_budget = false;
  long steps = 0;
  bool has_steps = false;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int nodes = 0;
  bool has_nodes = false;
  std::string sign = "";
  bool json = false;
};

void add_common(CLI::App* sub, CommonFlags* fl, bool needs_config) {
  auto* cfg = sub->add_option("--config", fl->config_path, "problem config file");
  if (needs_config) cfg->required();
  sub->add_option("--budget", fl->budget, "override the power budget")
      ->each([fl](const std::string&) { fl->has_budget = true; });
  sub->add_option("--steps", fl->steps, "override simulation steps")
      ->each([fl](const std::string&) { fl->has_steps = true; });
  sub->add_option("--seed", fl->seed, "override the RNG seed")
      ->each([fl](const std::string&) { fl->has_seed = true; });
  sub->add_option("--nodes", fl->nodes, "override quadrature nodes")
      ->each([fl](const std::string&) { fl->has_nodes = true; });
  sub->add_option("--sign", fl->sign, "pole sign policy")
      ->check(CLI::IsMember({"auto", "+", "-"}));
  sub->add_flag("--json", fl->json, "machine-readable JSON output");
}

acgn::ChannelConfig load_config(const CommonFlags& fl) {
  std::ifstream f(fl.config_path);
  if (!f) throw acgn::config_error("cannot open config file: " + fl.config_path);
  std::ostringstream ss;
  ss << f.rdbuf();
  acgn::ChannelConfig cfg = acgn::parse_channel_config(ss.str());
  if (fl.has_budget) {
    if (!(fl.budget > 0.0)) throw acgn::config_error("budget must be positive");
    cfg.budget = fl.budget;
  }
  if (fl.has_steps) {
    if (fl.steps < 1) throw acgn::config_error("steps must be positive");
    cfg.steps = fl.steps;
  }
  if (fl.has_seed) cfg.seed = fl.seed;
  if (fl.has_nodes) {
    if (fl.nodes < 16 || fl.nodes % 2 != 0)
      throw acgn::config_error("nodes must be even and at least 16");
    cfg.nodes = fl.nodes;
  }
  if (fl.sign == "auto") cfg.sign = acgn::SignPolicy::automatic;
  else if (fl.sign == "+") cfg.sign = acgn::SignPolicy::plus;
  else if (fl.sign == "-") cfg.sign = acgn::SignPolicy::minus;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feedback capacity bounds for parallel colored Gaussian channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(acgn::kVersion));

  CommonFlags cap_fl, design_fl, sim_fl, ver_fl, wf_fl;
  std::string dump_path;
  std::vector<double> wf_eigs;
  double wf_budget = 0.0;

  CLI::App* cap = app.add_subcommand("capacity", "compute the capacity lower bound");
  add_common(cap, &cap_fl, true);

  CLI::App* design = app.add_subcommand("design", "print the full channel design");
  add_common(design, &design_fl, true);

  CLI::App* sim = app.add_subcommand("simulate", "run the coding scheme in closed loop");
  add_common(sim, &sim_fl, true);
  sim->add_option("--dump", dump_path, "write per-step y'/e' CSV to this path");

  CLI::App* ver = app.add_subcommand("verify", "run the design verification checks");
  add_common(ver, &ver_fl, true);

  CLI::App* wf = app.add_subcommand("waterfill", "classic water-filling allocation");
  wf->add_option("--eigs", wf_eigs, "noise variances (comma separated)")
      ->required()
      ->delimiter(',');
  wf->add_option("--budget", wf_budget, "power budget")->required();
  wf->add_flag("--json", wf_fl.json, "machine-readable JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (cap->parsed()) return acgn::cmd_capacity(load_config(cap_fl), cap_fl.json, std::cout);
    if (design->parsed())
      return acgn::cmd_design(load_config(design_fl), design_fl.json, std::cout);
    if (sim->parsed())
      return acgn::cmd_simulate(load_config(sim_fl), dump_path, sim_fl.json, std::cout);
    if (ver->parsed()) return acgn::cmd_verify(load_config(ver_fl), ver_fl.json, std::cout);
    if (wf->parsed()) {
      acgn::Vec eigs(static_cast<Eigen::Index>(wf_eigs.size()));
      for (std::size_t i = 0; i < wf_eigs.size(); ++i) eigs(i) = wf_eigs[i];
      return acgn::cmd_waterfill(eigs, wf_budget, wf_fl.json, std::cout);
    }
  } catch (const acgn::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const acgn::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
