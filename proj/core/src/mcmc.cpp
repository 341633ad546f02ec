#include "dburr/mcmc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "dburr/error.hpp"

namespace dburr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) {
    return *mid;
  }
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
  if (v.size() < 2) {
    return 0.0;
  }
  double acc = 0.0;
  for (double x : v) {
    acc += (x - mean) * (x - mean);
  }
  return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

// --- kernels ---------------------------------------------------------------

ProposalKernel ProposalKernel::gamma_independence(double mean, double shape) {
  if (!(mean > 0.0) || !(shape > 0.0) || !std::isfinite(mean) ||
      !std::isfinite(shape)) {
    throw DomainError("gamma_independence: mean and shape must be positive");
  }
  return ProposalKernel(Kind::gamma_independence, mean, shape);
}

ProposalKernel ProposalKernel::uniform_01() {
  return ProposalKernel(Kind::uniform_01, 0.0, 0.0);
}

ProposalKernel ProposalKernel::positive_random_walk(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("positive_random_walk: scale must be positive");
  }
  return ProposalKernel(Kind::positive_random_walk, scale, 0.0);
}

ProposalKernel ProposalKernel::log_random_walk(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("log_random_walk: scale must be positive");
  }
  return ProposalKernel(Kind::log_random_walk, scale, 0.0);
}

bool ProposalKernel::in_support(double x) const noexcept {
  switch (kind_) {
    case Kind::uniform_01:
      return x > 0.0 && x < 1.0;
    case Kind::gamma_independence:
    case Kind::positive_random_walk:
    case Kind::log_random_walk:
      return x > 0.0 && std::isfinite(x);
  }
  return false;
}

double ProposalKernel::propose(double current, SeededGenerator& gen) const {
  switch (kind_) {
    case Kind::gamma_independence:
      return gen.gamma(p2_, p1_ / p2_);
    case Kind::uniform_01:
      return gen.uniform_open();
    case Kind::positive_random_walk:
      return current + p1_ * gen.normal();
    case Kind::log_random_walk:
      return current * std::exp(p1_ * gen.normal());
  }
  return current;
}

double ProposalKernel::log_density(double x) const {
  // Unnormalized; constants cancel in the Hastings ratio.
  switch (kind_) {
    case Kind::gamma_independence:
      return (p2_ - 1.0) * std::log(x) - x * p2_ / p1_;
    case Kind::uniform_01:
    case Kind::positive_random_walk:
    case Kind::log_random_walk:
      return 0.0;
  }
  return 0.0;
}

double ProposalKernel::log_hastings(double current, double proposed) const {
  switch (kind_) {
    case Kind::positive_random_walk:
      return 0.0;  // symmetric
    case Kind::log_random_walk:
      return std::log(proposed) - std::log(current);
    default:
      return log_density(current) - log_density(proposed);
  }
}

// --- chain -----------------------------------------------------------------

std::vector<double> Chain::coordinate(std::size_t c) const {
  std::vector<double> out;
  out.reserve(size() - std::min(burn_in, size()));
  for (std::size_t i = burn_in; i < size(); ++i) {
    out.push_back(values[i * dim + c]);
  }
  return out;
}

Chain mh_run(const LogDensity& target, std::vector<double> init,
             const std::vector<ProposalKernel>& kernels, std::size_t iters,
             SeededGenerator& gen, std::size_t burn_in) {
  if (init.empty() || kernels.size() != init.size()) {
    throw DomainError("mh_run: need one kernel per coordinate");
  }
  std::vector<CoordinateUpdate> schedule;
  for (std::size_t c = 0; c < kernels.size(); ++c) {
    schedule.push_back({c, kernels[c]});
  }
  return mh_run(target, std::move(init), schedule, iters, gen, burn_in);
}

Chain mh_run(const LogDensity& target, std::vector<double> init,
             const std::vector<CoordinateUpdate>& schedule, std::size_t iters,
             SeededGenerator& gen, std::size_t burn_in) {
  if (init.empty() || schedule.empty()) {
    throw DomainError("mh_run: empty state or schedule");
  }
  for (const auto& u : schedule) {
    if (u.coordinate >= init.size()) {
      throw DomainError("mh_run: schedule names a coordinate out of range");
    }
  }
  if (iters == 0) {
    throw DomainError("mh_run: iters must be positive");
  }
  double current = target(init);
  if (!std::isfinite(current)) {
    throw DomainError("mh_run: target is not finite at the initial state");
  }

  Chain chain;
  chain.dim = init.size();
  chain.sweep_width = schedule.size();
  chain.burn_in = burn_in;
  chain.seed = gen.seed();
  chain.values.reserve(iters * chain.dim);
  chain.accepted.reserve(iters);
  chain.moves.reserve(iters * chain.sweep_width);

  std::vector<double> state = std::move(init);
  chain.values.insert(chain.values.end(), state.begin(), state.end());
  chain.accepted.push_back(false);
  chain.moves.insert(chain.moves.end(), chain.sweep_width, 0);

  for (std::size_t it = 1; it < iters; ++it) {
    bool any = false;
    for (const auto& [c, k] : schedule) {
      const double from = state[c];
      const double to = k.propose(from, gen);
      // Always consume the acceptance draw so the stream layout does not
      // depend on which branch is taken.
      const double log_u = std::log(gen.uniform_open());
      std::uint8_t moved = 0;
      if (!k.in_support(to)) {
        ++chain.out_of_support;
      } else {
        state[c] = to;
        const double proposed = target(state);
        const double log_ratio = std::isnan(proposed)
                                     ? kNegInf
                                     : proposed - current + k.log_hastings(from, to);
        if (log_u < log_ratio) {
          current = proposed;
          moved = 1;
          any = true;
        } else {
          state[c] = from;
        }
      }
      chain.moves.push_back(moved);
    }
    chain.values.insert(chain.values.end(), state.begin(), state.end());
    chain.accepted.push_back(any);
  }
  return chain;
}

double effective_sample_size(std::span<const double> draws) {
  const std::size_t n = draws.size();
  if (n < 4) {
    return static_cast<double>(n);
  }
  const double m = mean_of(draws);
  const auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) {
      acc += (draws[t] - m) * (draws[t + lag] - m);
    }
    return acc / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) {
    return static_cast<double>(n);
  }
  double sum_pairs = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (k == 0 ? gamma0 : autocov(2 * k)) + autocov(2 * k + 1);
    if (pair <= 0.0) {
      break;
    }
    pair = std::min(pair, prev_pair);  // initial monotone sequence
    sum_pairs += pair;
    prev_pair = pair;
  }
  const double tau = (-gamma0 + 2.0 * sum_pairs) / gamma0;
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

PosteriorSummary summarize(const Chain& chain) {
  if (chain.size() <= chain.burn_in) {
    throw DomainError("summarize: no draws after burn-in");
  }
  PosteriorSummary s;
  s.total_iters = chain.size();
  s.draws = chain.size() - chain.burn_in;

  std::vector<std::vector<double>> coords;
  for (std::size_t c = 0; c < chain.dim; ++c) {
    coords.push_back(chain.coordinate(c));
    const auto& v = coords.back();
    const double m = mean_of(v);
    s.est_sq.push_back(m);
    s.est_abs.push_back(median_of(v));
    s.variances.push_back(variance_of(v, m));
    s.ess.push_back(effective_sample_size(v));
  }
  if (chain.dim == 2) {
    const double sd0 = std::sqrt(s.variances[0]);
    const double sd1 = std::sqrt(s.variances[1]);
    double cov = 0.0;
    for (std::size_t i = 0; i < s.draws; ++i) {
      cov += (coords[0][i] - s.est_sq[0]) * (coords[1][i] - s.est_sq[1]);
    }
    cov = s.draws > 1 ? cov / static_cast<double>(s.draws - 1) : 0.0;
    s.corr_alpha_theta =
        (sd0 > 0.0 && sd1 > 0.0) ? std::clamp(cov / (sd0 * sd1), -1.0, 1.0) : 0.0;
  }

  const std::size_t first = std::max<std::size_t>(chain.burn_in, 1);
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  for (std::size_t i = first; i < chain.size(); ++i) {
    for (std::size_t u = 0; u < chain.sweep_width; ++u) {
      ++proposals;
      accepted += chain.moves[i * chain.sweep_width + u];
    }
  }
  s.acceptance_rate =
      proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  return s;
}

// --- fits ------------------------------------------------------------------

namespace {

void require_identifiable(const Sample& s, const char* who) {
  if (s.all_zero()) {
    throw DegenerateDataError(std::string(who) +
                              ": all observations are zero; alpha is not "
                              "identifiable from such data");
  }
}

void check_config(const MhConfig& config) {
  if (config.iters == 0) {
    throw DomainError("MH config: iters must be positive");
  }
  if (config.effective_burn_in() >= config.iters) {
    throw DomainError("MH config: burn-in must be smaller than iters");
  }
  if (!(config.kernel_shape > 0.0)) {
    throw DomainError("MH config: kernel shape must be positive");
  }
  if (!(config.alpha_walk_scale >= 0.0)) {
    throw DomainError("MH config: alpha walk scale must be non-negative");
  }
}

bool alpha_in_support(double alpha) {
  return alpha >= kAlphaMin && alpha <= kAlphaMax;
}

}  // namespace

FitResult fit_alpha_mh(const Sample& s, double theta_known, const MhConfig& config) {
  check_config(config);
  require_identifiable(s, "fit_alpha_mh");
  if (!(theta_known > 0.0 && theta_known < 1.0)) {
    throw DomainError("fit_alpha_mh: theta must lie in (0, 1)");
  }

  FitResult out;
  out.kernel_mean = 1.0;
  try {
    const MleResult m = mle_alpha(s, theta_known);
    if (m.at_boundary) {
      out.mle_fallback = true;
      out.warnings.push_back("alpha MLE on the search boundary; kernel mean set to 1");
    } else {
      out.kernel_mean = m.alpha;
    }
  } catch (const Error& e) {
    out.mle_fallback = true;
    out.warnings.push_back(std::string("alpha MLE failed (") + e.what() +
                           "); kernel mean set to 1");
  }

  const AlphaPosteriorCheck check = check_alpha_posterior(s, theta_known);
  if (!check.concentrated()) {
    out.warnings.push_back("alpha posterior has " +
                           std::to_string(check.upper_decade_mass) +
                           " of its mass in [100, 1000]; the 1/alpha prior "
                           "leaves the upper tail unresolved");
  }

  const auto target = [&](std::span<const double> x) {
    return alpha_in_support(x[0]) ? log_posterior_alpha(s, x[0], theta_known) : kNegInf;
  };
  std::vector<CoordinateUpdate> schedule{
      {0, ProposalKernel::gamma_independence(out.kernel_mean, config.kernel_shape)}};
  if (config.alpha_walk_scale > 0.0) {
    schedule.push_back({0, ProposalKernel::log_random_walk(config.alpha_walk_scale)});
  }
  SeededGenerator gen(config.seed);
  out.chain = mh_run(target, {out.kernel_mean}, schedule, config.iters, gen,
                     config.effective_burn_in());
  out.summary = summarize(out.chain);
  return out;
}

FitResult fit_joint_mh(const Sample& s, const MhConfig& config) {
  check_config(config);
  require_identifiable(s, "fit_joint_mh");

  FitResult out;
  out.kernel_mean = 1.0;
  try {
    const MleResult m = mle_joint(s);
    if (m.at_boundary) {
      out.mle_fallback = true;
      out.warnings.push_back("joint MLE on the search boundary; kernel mean set to 1");
    } else {
      out.kernel_mean = m.alpha;
    }
  } catch (const DegenerateDataError&) {
    throw;
  } catch (const Error& e) {
    out.mle_fallback = true;
    out.warnings.push_back(std::string("joint MLE failed (") + e.what() +
                           "); kernel mean set to 1");
  }

  const PriorSpec prior = config.prior;
  const auto target = [&](std::span<const double> x) {
    if (!alpha_in_support(x[0]) || !(x[1] > 0.0 && x[1] < 1.0)) {
      return kNegInf;
    }
    return log_posterior_joint(s, x[0], x[1], prior);
  };
  std::vector<CoordinateUpdate> schedule{
      {0, ProposalKernel::gamma_independence(out.kernel_mean, config.kernel_shape)}};
  if (config.alpha_walk_scale > 0.0) {
    schedule.push_back({0, ProposalKernel::log_random_walk(config.alpha_walk_scale)});
  }
  schedule.push_back({1, ProposalKernel::uniform_01()});
  SeededGenerator gen(config.seed);
  out.chain = mh_run(target, {out.kernel_mean, 0.5}, schedule, config.iters, gen,
                     config.effective_burn_in());
  out.summary = summarize(out.chain);
  return out;
}

FitResult fit_theta_mh(const Sample& s, double alpha_known, const MhConfig& config) {
  check_config(config);
  const SuffStats stats = suff_stats(s, alpha_known);
  const PriorSpec prior = config.prior;
  const auto target = [&](std::span<const double> x) {
    return (x[0] > 0.0 && x[0] < 1.0) ? log_posterior_theta(stats, x[0], prior)
                                      : kNegInf;
  };
  FitResult out;
  SeededGenerator gen(config.seed);
  out.chain = mh_run(target, {0.5}, {ProposalKernel::uniform_01()}, config.iters,
                     gen, config.effective_burn_in());
  out.summary = summarize(out.chain);
  return out;
}

void write_chain_csv(const std::filesystem::path& path, const Chain& chain,
                     const std::vector<std::string>& coordinate_names) {
  if (coordinate_names.size() != chain.dim) {
    throw DomainError("write_chain_csv: one name per coordinate is required");
  }
  int alpha_col = -1;
  int theta_col = -1;
  for (std::size_t c = 0; c < chain.dim; ++c) {
    if (coordinate_names[c] == "alpha") {
      alpha_col = static_cast<int>(c);
    } else if (coordinate_names[c] == "theta") {
      theta_col = static_cast<int>(c);
    } else {
      throw DomainError("write_chain_csv: unknown coordinate '" +
                        coordinate_names[c] + "'");
    }
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  char buf[64];
  const auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  out << "iter,alpha,theta,accepted\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out << i << ',';
    if (alpha_col >= 0) {
      put(chain.values[i * chain.dim + alpha_col]);
    }
    out << ',';
    if (theta_col >= 0) {
      put(chain.values[i * chain.dim + theta_col]);
    }
    out << ',' << (chain.accepted[i] ? 1 : 0) << '\n';
  }
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

}  // namespace dburr
