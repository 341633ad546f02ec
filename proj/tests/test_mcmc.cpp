#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <gtest/gtest.h>

#include "dburr/closed_form.hpp"
#include "dburr/error.hpp"
#include "dburr/mcmc.hpp"
#include "support/oracles.hpp"

namespace dburr {
namespace {

LogDensity beta_target(double p, double q) {
  return [=](std::span<const double> x) {
    if (!(x[0] > 0.0 && x[0] < 1.0)) return -std::numeric_limits<double>::infinity();
    return (p - 1.0) * std::log(x[0]) + (q - 1.0) * std::log1p(-x[0]);
  };
}

Chain constructed(const std::vector<double>& values, std::size_t burn_in = 0) {
  Chain c;
  c.dim = 1;
  c.sweep_width = 1;
  c.values = values;
  c.burn_in = burn_in;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool moved = i > 0 && values[i] != values[i - 1];
    c.accepted.push_back(moved);
    c.moves.push_back(moved ? 1 : 0);
  }
  return c;
}

TEST(Kernels, Validation) {
  EXPECT_THROW(ProposalKernel::gamma_independence(0.0, 1.0), DomainError);
  EXPECT_THROW(ProposalKernel::gamma_independence(1.0, -1.0), DomainError);
  EXPECT_THROW(ProposalKernel::positive_random_walk(0.0), DomainError);
  EXPECT_THROW(ProposalKernel::log_random_walk(-1.0), DomainError);
  EXPECT_FALSE(ProposalKernel::uniform_01().in_support(1.0));
  EXPECT_FALSE(ProposalKernel::positive_random_walk(1.0).in_support(-0.1));
}

TEST(Kernels, HastingsTerms) {
  // Symmetric walk: nothing to correct.
  const auto rw = ProposalKernel::positive_random_walk(0.3);
  EXPECT_EQ(rw.log_hastings(1.0, 2.5), 0.0);
  EXPECT_EQ(ProposalKernel::uniform_01().log_hastings(0.2, 0.9), 0.0);

  // Independence gamma: ln q(current) - ln q(proposed), from Boost's pdf.
  const auto g = ProposalKernel::gamma_independence(2.0, 10.0);
  const boost::math::gamma_distribution<double> gd(10.0, 0.2);
  for (auto [from, to] : {std::pair{1.0, 3.0}, std::pair{2.5, 0.4}}) {
    EXPECT_NEAR(g.log_hastings(from, to),
                std::log(boost::math::pdf(gd, from)) - std::log(boost::math::pdf(gd, to)),
                1e-12);
  }

  // Log walk: q(from | to) / q(to | from) with lognormal step densities.
  const double s = 0.7;
  const auto lw = ProposalKernel::log_random_walk(s);
  const double from = 1.3;
  const double to = 4.1;
  const double fwd = boost::math::pdf(boost::math::lognormal_distribution<double>(std::log(from), s), to);
  const double back = boost::math::pdf(boost::math::lognormal_distribution<double>(std::log(to), s), from);
  EXPECT_NEAR(lw.log_hastings(from, to), std::log(back / fwd), 1e-12);
}

TEST(MhRun, SymmetricKernelAcceptsOnTargetRatio) {
  // Replay the stream by hand: with a symmetric kernel the acceptance test
  // is u < exp(target(to) - target(from)).
  const LogDensity target = [](std::span<const double> x) { return -0.5 * x[0] * x[0]; };
  const auto kernel = ProposalKernel::positive_random_walk(0.8);
  SeededGenerator gen(404);
  const Chain chain = mh_run(target, {0.5}, {kernel}, 2000, gen);

  SeededGenerator replay(404);
  double state = 0.5;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const double to = state + 0.8 * replay.normal();
    const double u = replay.uniform_open();
    if (to > 0.0 && u < std::exp(-0.5 * to * to + 0.5 * state * state)) {
      state = to;
    }
    ASSERT_EQ(chain.state(i)[0], state) << i;
  }
}

TEST(MhRun, RejectsBadInit) {
  SeededGenerator gen(1);
  EXPECT_THROW(mh_run(beta_target(2, 2), {1.5}, {ProposalKernel::uniform_01()}, 10, gen),
               DomainError);
  EXPECT_THROW(mh_run(beta_target(2, 2), {0.5}, {ProposalKernel::uniform_01()}, 0, gen),
               DomainError);
  EXPECT_THROW(mh_run(beta_target(2, 2), {0.5}, std::vector<ProposalKernel>{}, 10, gen),
               DomainError);
}

TEST(MhRun, OutOfSupportIsCountedNotFatal) {
  SeededGenerator gen(3);
  const Chain chain = mh_run(beta_target(2, 2), {0.5},
                             {ProposalKernel::positive_random_walk(2.0)}, 2000, gen);
  EXPECT_GT(chain.out_of_support, 0u);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    EXPECT_GT(chain.state(i)[0], 0.0);
  }
}

TEST(MhRun, BetaTargets) {
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{1.0, 1.0}, std::pair{5.0, 1.0}}) {
    SeededGenerator gen(derive_seed(2, static_cast<std::uint64_t>(10 * p + q)));
    const Chain chain = mh_run(beta_target(p, q), {0.5}, {ProposalKernel::uniform_01()},
                               110000, gen, 10000);
    const auto draws = chain.coordinate(0);
    const auto [mean, var] = oracle::mean_var(draws);
    const double se = std::sqrt(var / effective_sample_size(draws));
    EXPECT_NEAR(mean, p / (p + q), 3.0 * se) << p << ',' << q;
  }
}

TEST(MhRun, RejectionBookkeeping) {
  Sample s({0.0, 1.0, 4.0, 2.0, 0.0, 9.0});
  MhConfig config;
  config.iters = 3000;
  config.seed = 6;
  const FitResult fit = fit_joint_mh(s, config);
  const Chain& c = fit.chain;
  ASSERT_EQ(c.size(), 3000u);
  ASSERT_EQ(c.moves.size(), c.size() * c.sweep_width);
  EXPECT_FALSE(c.accepted[0]);
  for (std::size_t i = 1; i < c.size(); ++i) {
    bool any = false;
    for (std::size_t u = 0; u < c.sweep_width; ++u) any |= c.moves[i * c.sweep_width + u] != 0;
    EXPECT_EQ(c.accepted[i], any);
    if (!c.accepted[i]) {
      EXPECT_TRUE(std::equal(c.state(i).begin(), c.state(i).end(), c.state(i - 1).begin()));
    }
  }
}

TEST(MhRun, Reproducible) {
  Sample s({0.0, 3.0, 1.0, 7.0, 2.0});
  MhConfig config;
  config.iters = 2000;
  config.seed = 99;
  const FitResult a = fit_joint_mh(s, config);
  const FitResult b = fit_joint_mh(s, config);
  EXPECT_EQ(a.chain.values, b.chain.values);
  EXPECT_EQ(a.chain.accepted, b.chain.accepted);
  config.seed = 100;
  EXPECT_NE(fit_joint_mh(s, config).chain.values, a.chain.values);
}

TEST(Ess, IndependentAndCorrelated) {
  SeededGenerator gen(12);
  std::vector<double> iid(20000);
  for (auto& x : iid) x = gen.normal();
  EXPECT_NEAR(effective_sample_size(iid) / 20000.0, 1.0, 0.1);

  // AR(1) with phi = 0.9 has integrated autocorrelation time 19.
  std::vector<double> ar(200000);
  double x = 0.0;
  for (auto& v : ar) {
    x = 0.9 * x + gen.normal();
    v = x;
  }
  EXPECT_NEAR(effective_sample_size(ar) / (200000.0 / 19.0), 1.0, 0.15);
}

TEST(Summarize, HandExamples) {
  const PosteriorSummary s = summarize(constructed({1.0, 2.0, 3.0}));
  EXPECT_DOUBLE_EQ(s.est_sq[0], 2.0);
  EXPECT_DOUBLE_EQ(s.est_abs[0], 2.0);
  EXPECT_DOUBLE_EQ(s.variances[0], 1.0);
  EXPECT_FALSE(s.corr_alpha_theta.has_value());
  EXPECT_EQ(s.draws, 3u);

  const PosteriorSummary flat = summarize(constructed({4.0, 4.0, 4.0, 4.0}));
  EXPECT_EQ(flat.variances[0], 0.0);
  EXPECT_EQ(flat.est_sq[0], 4.0);
  EXPECT_EQ(flat.est_abs[0], 4.0);
  EXPECT_EQ(flat.acceptance_rate, 0.0);

  const PosteriorSummary skew = summarize(constructed({1.0, 1.0, 1.0, 2.0, 10.0}));
  EXPECT_GT(skew.est_sq[0], skew.est_abs[0]);
}

TEST(Summarize, BurnInAndErrors) {
  const PosteriorSummary s = summarize(constructed({100.0, 1.0, 2.0, 3.0}, 1));
  EXPECT_DOUBLE_EQ(s.est_sq[0], 2.0);
  EXPECT_EQ(s.total_iters, 4u);
  EXPECT_EQ(s.draws, 3u);
  EXPECT_DOUBLE_EQ(s.acceptance_rate, 1.0);
  // Rows after burn-in: moved, stayed, moved.
  EXPECT_DOUBLE_EQ(summarize(constructed({100.0, 1.0, 1.0, 3.0}, 1)).acceptance_rate, 2.0 / 3.0);
  EXPECT_THROW(summarize(constructed({1.0, 2.0}, 2)), DomainError);
}

TEST(Summarize, CorrelationOfTwoCoordinates) {
  Chain c;
  c.dim = 2;
  c.sweep_width = 2;
  c.values = {1.0, 2.0, 2.0, 4.1, 3.0, 5.9, 4.0, 8.0};
  c.accepted = {false, true, true, true};
  c.moves = {0, 0, 1, 1, 1, 1, 1, 1};
  const PosteriorSummary s = summarize(c);
  ASSERT_TRUE(s.corr_alpha_theta.has_value());
  EXPECT_GT(*s.corr_alpha_theta, 0.99);
  EXPECT_LE(*s.corr_alpha_theta, 1.0);
}

TEST(Fits, SingleIterationSummarizesInit) {
  const Sample s({0.0, 1.0, 3.0, 2.0});
  MhConfig config;
  config.iters = 1;
  const FitResult fit = fit_alpha_mh(s, 0.3, config);
  EXPECT_EQ(fit.chain.size(), 1u);
  EXPECT_EQ(fit.summary.est_sq[0], fit.kernel_mean);
  EXPECT_EQ(fit.summary.est_abs[0], fit.kernel_mean);
  EXPECT_EQ(fit.summary.variances[0], 0.0);
}

TEST(Fits, RejectAllZeroData) {
  MhConfig config;
  config.iters = 100;
  EXPECT_THROW(fit_alpha_mh(Sample({0.0, 0.0}), 0.5, config), DegenerateDataError);
  EXPECT_THROW(fit_joint_mh(Sample({0.0, 0.0}), config), DegenerateDataError);
}

TEST(Fits, ConfigValidation) {
  MhConfig config;
  config.iters = 100;
  config.burn_in = 100;
  EXPECT_THROW(fit_theta_mh(Sample({1.0}), 1.0, config), DomainError);
  config.burn_in = 10;
  config.kernel_shape = 0.0;
  EXPECT_THROW(fit_alpha_mh(Sample({1.0}), 0.5, config), DomainError);
}

TEST(Fits, ThetaChainMatchesExactPosterior) {
  SeededGenerator data(77);
  const Sample s = sample_dburr(data, DBurrParams(1.5, 0.3), 8);
  const PriorSpec prior(2.0);
  MhConfig config;
  config.iters = 60000;
  config.seed = 78;
  config.prior = prior;
  const FitResult fit = fit_theta_mh(s, 1.5, config);
  const auto draws = fit.chain.coordinate(0);
  const double ess = effective_sample_size(draws);
  const double sd = std::sqrt(fit.summary.variances[0]);

  const SuffStats st = suff_stats(s, 1.5);
  const double mean = exact_posterior_mean(st, prior);
  const double median = exact_posterior_median(st, prior);
  EXPECT_NEAR(fit.summary.est_sq[0], mean, 3.0 * sd / std::sqrt(ess));
  // Asymptotic sd of a sample median: 1 / (2 f(m) sqrt(ESS)).
  const double med_se = 0.5 / (exact_posterior_density(st, prior, median) * std::sqrt(ess));
  EXPECT_NEAR(fit.summary.est_abs[0], median, 3.0 * med_se);
}

TEST(Fits, JointThetaMarginalWhenAlphaIsIrrelevant) {
  // With a single zero, the likelihood does not involve alpha, so the theta
  // marginal is the one-dimensional posterior.
  const Sample s({0.0});
  const PriorSpec prior(1.0);
  const auto target = [&](std::span<const double> x) {
    if (!(x[1] > 0.0 && x[1] < 1.0) || x[0] <= 0.0) return -std::numeric_limits<double>::infinity();
    return log_posterior_joint(s, x[0], x[1], prior);
  };
  SeededGenerator gen(321);
  const Chain chain = mh_run(target, {1.0, 0.5},
                             {ProposalKernel::gamma_independence(1.0, 1e4),
                              ProposalKernel::uniform_01()},
                             60000, gen, 6000);
  const auto theta = chain.coordinate(1);
  const auto [mean, var] = oracle::mean_var(theta);
  const double want = exact_posterior_mean(suff_stats(s, 1.0), prior);
  EXPECT_NEAR(want, (1.0 + std::numbers::ln2) / (2.0 * (2.0 + std::numbers::ln2)), 1e-12);
  EXPECT_NEAR(mean, want, 3.0 * std::sqrt(var / effective_sample_size(theta)));
}

TEST(Fits, AlphaChainMatchesQuadratureOnPlateau) {
  // No observation reaches 2, so the likelihood flattens for large alpha;
  // the extra log-scale walk is what lets the chain reach that tail.
  const Sample s({0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0});
  const double theta = 0.5;
  MhConfig config;
  config.iters = 200000;
  config.seed = 15;
  const FitResult fit = fit_alpha_mh(s, theta, config);
  const AlphaPosteriorCheck check = check_alpha_posterior(s, theta);
  EXPECT_FALSE(check.concentrated());
  EXPECT_FALSE(fit.warnings.empty());
  const auto draws = fit.chain.coordinate(0);
  const double se = std::sqrt(fit.summary.variances[0] / effective_sample_size(draws));
  EXPECT_NEAR(fit.summary.est_sq[0], check.mean, 3.0 * se);
}

TEST(Fits, AlphaChainMatchesQuadratureOnInformativeData) {
  SeededGenerator data(31);
  const Sample s = sample_dburr(data, DBurrParams(2.0, 0.2), 25);
  MhConfig config;
  config.iters = 50000;
  config.seed = 32;
  const FitResult fit = fit_alpha_mh(s, 0.2, config);
  const AlphaPosteriorCheck check = check_alpha_posterior(s, 0.2);
  const auto draws = fit.chain.coordinate(0);
  const double se = std::sqrt(fit.summary.variances[0] / effective_sample_size(draws));
  EXPECT_NEAR(fit.summary.est_sq[0], check.mean, 3.0 * se);
  EXPECT_NEAR(fit.summary.variances[0], check.variance, 0.1 * check.variance);
  EXPECT_FALSE(fit.mle_fallback);
}

TEST(Fits, DesignCellAlphaOneThetaTenth) {
  SeededGenerator data(derive_seed(12345, 0));
  const Sample s = sample_dburr(data, DBurrParams(1.0, 0.1), 25);
  MhConfig config;
  config.seed = derive_seed(12345, 1);
  const FitResult fit = fit_alpha_mh(s, 0.1, config);
  EXPECT_EQ(fit.summary.total_iters, 10000u);
  EXPECT_EQ(fit.summary.draws, 9000u);
  EXPECT_NEAR(fit.summary.est_sq[0], 1.0, 3.0 * std::sqrt(fit.summary.variances[0]));
  EXPECT_GT(fit.summary.acceptance_rate, 0.05);
}

TEST(Fits, LossEstimatesWithinInterdecileRange) {
  SeededGenerator data(88);
  const Sample s = sample_dburr(data, DBurrParams(3.0, 0.3), 25);
  MhConfig config;
  config.seed = 89;
  const FitResult fit = fit_joint_mh(s, config);
  for (std::size_t c = 0; c < 2; ++c) {
    auto v = fit.chain.coordinate(c);
    std::sort(v.begin(), v.end());
    const double idr = v[v.size() * 9 / 10] - v[v.size() / 10];
    EXPECT_LT(std::abs(fit.summary.est_sq[c] - fit.summary.est_abs[c]), idr);
  }
  ASSERT_TRUE(fit.summary.corr_alpha_theta.has_value());
  EXPECT_LE(std::abs(*fit.summary.corr_alpha_theta), 1.0);
  EXPECT_GT(fit.summary.est_sq[1], 0.0);
  EXPECT_LT(fit.summary.est_sq[1], 1.0);
}

TEST(ChainCsv, Layout) {
  const auto dir = std::filesystem::temp_directory_path() / "dburr_test_mcmc";
  std::filesystem::create_directories(dir);
  const Chain one = constructed({1.5, 1.5, 2.25});
  write_chain_csv(dir / "alpha.csv", one, {"alpha"});
  std::ifstream in(dir / "alpha.csv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "iter,alpha,theta,accepted");
  EXPECT_EQ(lines[1], "0,1.5,,0");
  EXPECT_EQ(lines[3], "2,2.25,,1");

  const Chain theta = constructed({0.25});
  write_chain_csv(dir / "theta.csv", theta, {"theta"});
  std::ifstream in2(dir / "theta.csv");
  std::string header, row;
  std::getline(in2, header);
  std::getline(in2, row);
  EXPECT_EQ(row, "0,,0.25,0");

  EXPECT_THROW(write_chain_csv(dir / "x.csv", one, {"beta"}), DomainError);
  EXPECT_THROW(write_chain_csv(dir / "none" / "x.csv", one, {"alpha"}), IoError);
}

}  // namespace
}  // namespace dburr
