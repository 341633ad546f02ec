// dburr: simulate, fit and tabulate the discrete Burr distribution.

#include <CLI11/CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "dburr_tools/commands.hpp"

namespace {

using dburr::cli::ExperimentConfig;

// Flags shared by every verb; each one overrides the config file.
struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::optional<std::string> out;
};

void add_common(CLI::App* app, Common& c, const std::string& out_help) {
  app->add_option("--seed", c.seed, "Master seed (overrides the config file)");
  app->add_option("--config", c.config, "key = value configuration file");
  app->add_option("--out", c.out, out_help);
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config ? dburr::cli::load_config(*c.config) : ExperimentConfig{};
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

template <class T>
void apply(std::optional<T>& flag, T& field) {
  if (flag) field = *flag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Burr distribution: simulation, estimation and tables"};
  app.require_subcommand(1);

  // simulate
  Common sim;
  std::optional<std::size_t> sim_n;
  std::optional<std::vector<double>> sim_theta, sim_alpha;
  auto* simulate = app.add_subcommand("simulate", "Write one sample CSV per grid cell");
  add_common(simulate, sim, "Output directory (default: samples)");
  simulate->add_option("--n", sim_n, "Observations per cell");
  simulate->add_option("--theta", sim_theta, "Theta grid, comma separated")->delimiter(',');
  simulate->add_option("--alpha", sim_alpha, "Alpha grid, comma separated")->delimiter(',');

  // fit
  Common fit;
  std::string data, method = "mle";
  std::optional<double> fit_alpha, fit_theta, fit_a;
  std::optional<std::size_t> fit_iters, fit_burn;
  std::optional<std::string> chain_out;
  auto* fitcmd = app.add_subcommand("fit", "Estimate parameters from a sample CSV");
  add_common(fitcmd, fit, "Write the reported quantities as quantity,value CSV");
  fitcmd->add_option("--data", data, "Sample CSV")->required();
  fitcmd->add_option("--method", method, "closed-form | mh-alpha | mh-joint | mle")
      ->capture_default_str();
  fitcmd->add_option("--alpha", fit_alpha, "Known alpha");
  fitcmd->add_option("--theta", fit_theta, "Known theta");
  fitcmd->add_option("--a", fit_a, "Beta(a, 1) prior parameter for theta");
  fitcmd->add_option("--iters", fit_iters, "MH iterations");
  fitcmd->add_option("--burn-in", fit_burn, "MH burn-in");
  fitcmd->add_option("--chain-out", chain_out, "Write the MH chain CSV");

  // tables
  Common tab;
  std::optional<std::size_t> tab_n, tab_iters;
  std::optional<unsigned> tab_threads;
  auto* tables = app.add_subcommand("tables", "Run the simulation study grid");
  add_common(tables, tab, "Output directory (default: tables)");
  tables->add_option("--n", tab_n, "Observations per cell");
  tables->add_option("--iters", tab_iters, "MH iterations per chain");
  tables->add_option("--threads", tab_threads, "Worker threads (0 = all cores)");

  // pmf
  Common pm;
  double pmf_alpha = 0.0, pmf_theta = 0.0;
  std::size_t max_x = 20;
  auto* pmf = app.add_subcommand("pmf", "Print pmf, survival and hazard values");
  add_common(pmf, pm, "Output CSV (default: stdout)");
  pmf->add_option("--alpha", pmf_alpha, "Shape alpha > 0")->required();
  pmf->add_option("--theta", pmf_theta, "Parameter theta in (0, 1)")->required();
  pmf->add_option("--max-x", max_x, "Largest x to print")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      ExperimentConfig cfg = resolve(sim);
      apply(sim_n, cfg.n);
      apply(sim_theta, cfg.theta_grid);
      apply(sim_alpha, cfg.alpha_grid);
      const auto files = dburr::cli::cmd_simulate(cfg, sim.out.value_or("samples"));
      for (const auto& f : files) std::cout << f.string() << '\n';
    } else if (*fitcmd) {
      dburr::cli::FitRequest req;
      req.config = resolve(fit);
      apply(fit_a, req.config.a);
      if (fit_iters) {
        req.config.iters = *fit_iters;
        req.config.burn_in = req.config.iters / 10;
      }
      apply(fit_burn, req.config.burn_in);
      req.data = data;
      req.method = dburr::cli::parse_fit_method(method);
      req.alpha = fit_alpha;
      req.theta = fit_theta;
      if (fit.out) req.out = *fit.out;
      if (chain_out) req.chain_out = *chain_out;
      dburr::cli::cmd_fit(req, std::cout);
    } else if (*tables) {
      ExperimentConfig cfg = resolve(tab);
      apply(tab_n, cfg.n);
      if (tab_iters) {
        cfg.iters = *tab_iters;
        cfg.burn_in = cfg.iters / 10;
      }
      apply(tab_threads, cfg.threads);
      const auto dir = tab.out.value_or("tables");
      const auto result = dburr::cli::cmd_tables(cfg, dir);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote tables to " << dir << " in " << result.seconds << " s\n";
    } else if (*pmf) {
      if (pm.out) {
        std::ofstream out(*pm.out);
        if (!out) throw dburr::IoError("cannot open '" + *pm.out + "' for writing");
        dburr::cli::cmd_pmf(pmf_alpha, pmf_theta, max_x, out);
      } else {
        dburr::cli::cmd_pmf(pmf_alpha, pmf_theta, max_x, std::cout);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "dburr: " << e.what() << '\n';
    return dburr::cli::exit_code_for(e);
  }
  return 0;
}
