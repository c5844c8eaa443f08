#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gapstress/experiments.hpp"

using namespace gapstress;

namespace {

struct GlobalOptions {
  std::string out;
  std::optional<std::size_t> nodes;
  unsigned threads = 1;
  std::string format = "csv";
};

SweepConfig load(const std::string& path, const GlobalOptions& g) {
  SweepConfig cfg = load_config(path);
  if (g.nodes) {
    cfg.disc.nodes = *g.nodes;
    cfg.disc.kind = Discretization::Kind::spectral;
  }
  cfg.threads = g.threads;
  cfg.validate();
  return cfg;
}

/// Writes through `fn` to --out, else the config's output path, else stdout.
template <class F>
void emit(const GlobalOptions& g, const std::string& cfg_out, F&& fn) {
  const std::string path = !g.out.empty() ? g.out : cfg_out;
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  fn(os);
}

void print_flags(const std::vector<std::string>& flags) {
  for (const auto& f : flags) std::cerr << "flag: " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-integral solver for the stress concentration between two nearly touching conductors"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--out", g.out, "Output file (default: config 'output', else stdout)");
  app.add_option("--nodes", g.nodes, "Nodes per curve; selects the spectral discretization")->check(CLI::Range(16, 4096));
  app.add_option("--threads", g.threads, "Worker threads for matrix assembly and field evaluation")->check(CLI::Range(1, 256));
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  std::string config;
  double eps = 0.0;
  std::string suite = "all";

  auto* solve = app.add_subcommand("solve", "Solve one gap and print the sweep-eps row");
  solve->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  solve->add_option("--eps", eps, "Gap width")->required();

  auto* sweep_eps = app.add_subcommand("sweep-eps", "Sweep the gap over params.eps_list");
  sweep_eps->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);

  auto* sweep_r = app.add_subcommand("sweep-rho", "Dumbbell truncation ladder over params.rho_list");
  sweep_r->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);

  auto* decay = app.add_subcommand("decay", "Midline profile of the residual gradient");
  decay->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  decay->add_option("--eps", eps, "Gap width (0 uses the dumbbell at the first rho)")->required();

  auto* ver = app.add_subcommand("verify", "Run an invariant suite and report as JSON");
  ver->add_option("--suite", suite, "Suite")->check(CLI::IsMember({"disk", "mobius", "oracle", "all"}));

  CLI11_PARSE(app, argc, argv);

  try {
    const bool json = g.format == "json";
    if (solve->parsed() || sweep_eps->parsed()) {
      SweepConfig cfg = load(config, g);
      EpsSweep s;
      if (solve->parsed()) {
        if (eps < min_supported_eps) throw std::invalid_argument("--eps must be >= 1e-3");
        s.rows.push_back(solve_point(cfg, eps));
        if (!s.rows.back().ok()) s.flags.push_back("solve failed: " + s.rows.back().error);
        for (const auto& w : s.rows.back().warnings) s.flags.push_back(w);
      } else {
        s = sweep_epsilon(cfg);
      }
      emit(g, cfg.output, [&](std::ostream& os) { json ? write_json(os, s, cfg) : write_csv(os, s); });
      print_flags(s.flags);
      for (const auto& r : s.rows)
        if (!r.ok()) return 1;
    } else if (sweep_r->parsed()) {
      SweepConfig cfg = load(config, g);
      const RhoSweep s = sweep_rho(cfg);
      emit(g, cfg.output, [&](std::ostream& os) { json ? write_json(os, s, cfg) : write_csv(os, s); });
      print_flags(s.flags);
      std::cerr << "alpha0_estimate " << format_number(s.alpha0_estimate) << " +- " << format_number(s.alpha0_uncertainty)
                << '\n';
    } else if (decay->parsed()) {
      SweepConfig cfg = load(config, g);
      cfg.eps = eps;
      const DecayProfile p = decay_profile(cfg);
      emit(g, cfg.output, [&](std::ostream& os) { json ? write_json(os, p, cfg) : write_csv(os, p); });
      std::cerr << "fit A " << format_number(p.fit.p) << " residual " << format_number(p.fit.residual) << " log range "
                << format_number(p.data_range) << '\n';
    } else if (ver->parsed()) {
      const VerifyReport r = verify(suite, g.threads);
      emit(g, "", [&](std::ostream& os) { write_json(os, r); });
      return r.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
