#include <cmath>
#include <fstream>
#include <ostream>

#include "dburr/closed_form.hpp"
#include "dburr/distribution.hpp"
#include "dburr/inference.hpp"
#include "dburr/sampling.hpp"
#include "dburr_tools/commands.hpp"
#include "format.hpp"

namespace dburr::cli {

namespace {

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir.string() + "'");
  }
}

void write_report_csv(const std::filesystem::path& path, const FitReport& report) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << "quantity,value\n";
  for (const auto& q : report.quantities) {
    out << q.name << ',' << format_full(q.value) << '\n';
  }
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

void print_quantities(const FitReport& report, std::ostream& text) {
  std::size_t width = 0;
  for (const auto& q : report.quantities) width = std::max(width, q.name.size());
  for (const auto& q : report.quantities) {
    text << "  " << q.name << std::string(width - q.name.size() + 2, ' ')
         << format_full(q.value) << '\n';
  }
}

FitReport fit_closed_form(const Sample& s, const FitRequest& req, std::ostream& text) {
  if (!req.alpha) {
    throw UsageError("fit --method closed-form needs the known --alpha");
  }
  const SuffStats stats = suff_stats(s, *req.alpha);
  const PriorSpec prior(req.config.a);
  const BayesEstimate product = theta_bayes_paper(stats, prior);
  const double exact_mean = exact_posterior_mean(stats, prior);
  const double exact_median = exact_posterior_median(stats, prior);
  const double log_z_product = log_paper_normalizer(stats, prior);
  const double log_z_exact = log_exact_normalizer(stats, prior);

  FitReport r;
  r.quantities = {
      {"theta_sq_product", product.value},
      {"theta_sq_product_raw", product.raw},
      {"theta_sq_exact", exact_mean},
      {"theta_abs_exact", exact_median},
      {"log_normalizer_product", log_z_product},
      {"log_normalizer_exact", log_z_exact},
      {"theta_sq_rel_diff", (product.raw - exact_mean) / exact_mean},
      {"normalizer_rel_diff", std::expm1(log_z_product - log_z_exact)},
  };
  if (product.out_of_range) {
    r.notes.push_back("product-form estimate " + format_full(product.raw) +
                      " lies outside (0, 1); reported clamped");
  }
  if (stats.size() > 1) {
    r.notes.push_back("product-form values are exact only for n = 1");
  }

  text << "closed-form theta posterior, alpha = " << format_full(*req.alpha)
       << ", a = " << format_full(req.config.a) << ", n = " << s.size() << "\n\n";
  text << "  quantity                 product-form        exact\n";
  const auto row = [&](const char* name, const std::string& p, const std::string& e) {
    std::string line = "  ";
    line += name;
    line.resize(27, ' ');
    line += p;
    line.resize(47, ' ');
    text << line << e << '\n';
  };
  row("theta (squared loss)", format_full(product.value), format_full(exact_mean));
  row("theta (absolute loss)", "-", format_full(exact_median));
  row("ln normalizer", format_full(log_z_product), format_full(log_z_exact));
  return r;
}

FitReport fit_mh_alpha(const Sample& s, const FitRequest& req, std::ostream& text) {
  if (!req.theta) {
    throw UsageError("fit --method mh-alpha needs the known --theta");
  }
  const FitResult fit = fit_alpha_mh(s, *req.theta, req.config.mh(req.config.seed));
  const PosteriorSummary& sm = fit.summary;
  FitReport r;
  r.quantities = {
      {"alpha_sq", sm.est_sq[0]},
      {"alpha_abs", sm.est_abs[0]},
      {"var_alpha", sm.variances[0]},
      {"ess_alpha", sm.ess[0]},
      {"acceptance_rate", sm.acceptance_rate},
      {"kernel_mean", fit.kernel_mean},
      {"draws", static_cast<double>(sm.draws)},
      {"total_iters", static_cast<double>(sm.total_iters)},
      {"seed", static_cast<double>(fit.chain.seed)},
  };
  r.notes = fit.warnings;
  if (req.chain_out) {
    write_chain_csv(*req.chain_out, fit.chain, {"alpha"});
  }
  text << "MH alpha posterior, theta = " << format_full(*req.theta)
       << ", n = " << s.size() << ", seed = " << fit.chain.seed << "\n\n";
  print_quantities(r, text);
  return r;
}

FitReport fit_mh_joint(const Sample& s, const FitRequest& req, std::ostream& text) {
  const FitResult fit = fit_joint_mh(s, req.config.mh(req.config.seed));
  const PosteriorSummary& sm = fit.summary;
  FitReport r;
  r.quantities = {
      {"alpha_sq", sm.est_sq[0]},
      {"alpha_abs", sm.est_abs[0]},
      {"theta_sq", sm.est_sq[1]},
      {"theta_abs", sm.est_abs[1]},
      {"var_alpha", sm.variances[0]},
      {"var_theta", sm.variances[1]},
      {"corr", sm.corr_alpha_theta.value_or(0.0)},
      {"ess_alpha", sm.ess[0]},
      {"ess_theta", sm.ess[1]},
      {"acceptance_rate", sm.acceptance_rate},
      {"kernel_mean", fit.kernel_mean},
      {"draws", static_cast<double>(sm.draws)},
      {"total_iters", static_cast<double>(sm.total_iters)},
      {"seed", static_cast<double>(fit.chain.seed)},
  };
  r.notes = fit.warnings;
  if (req.chain_out) {
    write_chain_csv(*req.chain_out, fit.chain, {"alpha", "theta"});
  }
  text << "MH joint posterior, a = " << format_full(req.config.a)
       << ", n = " << s.size() << ", seed = " << fit.chain.seed << "\n\n";
  print_quantities(r, text);
  return r;
}

FitReport fit_mle(const Sample& s, const FitRequest& req, std::ostream& text) {
  if (req.alpha && req.theta) {
    throw UsageError("fit --method mle: with both --alpha and --theta fixed there "
                     "is nothing to estimate");
  }
  MleResult m;
  std::string what;
  if (req.alpha) {
    m = mle_theta(s, *req.alpha);
    what = "theta (alpha = " + format_full(*req.alpha) + ")";
  } else if (req.theta) {
    m = mle_alpha(s, *req.theta);
    what = "alpha (theta = " + format_full(*req.theta) + ")";
  } else {
    m = mle_joint(s);
    what = "alpha and theta";
  }
  FitReport r;
  r.quantities = {
      {"alpha", m.alpha},
      {"theta", m.theta},
      {"log_likelihood", m.log_likelihood},
      {"at_boundary", m.at_boundary ? 1.0 : 0.0},
  };
  if (m.at_boundary) {
    r.notes.push_back("maximizer is on the search boundary; the value is a clamp");
  }
  text << "maximum likelihood for " << what << ", n = " << s.size() << "\n\n";
  print_quantities(r, text);
  return r;
}

}  // namespace

std::optional<double> FitReport::find(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return q.value;
  }
  return std::nullopt;
}

std::string sample_file_name(double theta, double alpha) {
  return "sample_theta" + format_full(theta) + "_alpha" + format_full(alpha) + ".csv";
}

std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& config,
                                                const std::filesystem::path& out_dir) {
  config.validate();
  ensure_directory(out_dir);
  std::vector<std::filesystem::path> written;
  std::size_t cell = 0;
  for (double theta : config.theta_grid) {
    for (double alpha : config.alpha_grid) {
      const std::uint64_t seed = cell_seeds(config.seed, cell++).data;
      SeededGenerator gen(seed);
      const Sample s = sample_dburr(gen, DBurrParams(alpha, theta), config.n);
      const auto path = out_dir / sample_file_name(theta, alpha);
      write_sample_csv(path, s, seed);
      written.push_back(path);
    }
  }
  return written;
}

FitMethod parse_fit_method(const std::string& name) {
  if (name == "closed-form") return FitMethod::closed_form;
  if (name == "mh-alpha") return FitMethod::mh_alpha;
  if (name == "mh-joint") return FitMethod::mh_joint;
  if (name == "mle") return FitMethod::mle;
  throw UsageError("unknown fit method '" + name +
                   "' (expected closed-form, mh-alpha, mh-joint or mle)");
}

FitReport cmd_fit(const FitRequest& req, std::ostream& text) {
  req.config.validate();
  const SampleFile file = read_sample_csv(req.data);
  FitReport report;
  switch (req.method) {
    case FitMethod::closed_form:
      report = fit_closed_form(file.sample, req, text);
      break;
    case FitMethod::mh_alpha:
      report = fit_mh_alpha(file.sample, req, text);
      break;
    case FitMethod::mh_joint:
      report = fit_mh_joint(file.sample, req, text);
      break;
    case FitMethod::mle:
      report = fit_mle(file.sample, req, text);
      break;
  }
  for (const auto& note : report.notes) {
    text << "note: " << note << '\n';
  }
  if (req.out) {
    write_report_csv(*req.out, report);
  }
  return report;
}

void cmd_pmf(double alpha, double theta, std::size_t max_x, std::ostream& out) {
  const DBurrParams p(alpha, theta);
  out << "x,pmf,log_pmf,survival,cdf,second_rate\n";
  for (std::size_t i = 0; i <= max_x; ++i) {
    const double x = static_cast<double>(i);
    out << i << ',' << format_full(dburr_pmf(x, p)) << ','
        << format_full(dburr_log_pmf(x, p)) << ','
        << format_full(dburr_survival(x, p)) << ',' << format_full(dburr_cdf(x, p))
        << ',' << format_full(second_rate_of_failure(x, p)) << '\n';
  }
}

}  // namespace dburr::cli
