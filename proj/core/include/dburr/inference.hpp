#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dburr/sampling.hpp"

namespace dburr {

/// Support used for alpha by both the MLE search and the MH targets.
inline constexpr double kAlphaMin = 1e-3;
inline constexpr double kAlphaMax = 1e3;
/// Clamp applied when a theta likelihood is monotone toward 0 or 1.
inline constexpr double kThetaMin = 1e-8;
inline constexpr double kThetaMax = 1.0 - 1e-8;

/// Per-observation transforms at a fixed alpha:
///   w1 = ln(1 + x^alpha),  w2 = ln(1 + (1+x)^alpha),  w = w2 - w1 > 0.
struct SuffStats {
  std::vector<double> w1;
  std::vector<double> w2;
  std::vector<double> w;
  double alpha_at = 0.0;

  std::size_t size() const noexcept { return w.size(); }
  double sum_w1() const;
};

SuffStats suff_stats(const Sample& s, double alpha);

/// Hyperparameter `a` of the Beta(a, 1) prior on theta.
class PriorSpec {
 public:
  explicit PriorSpec(double a = 1.0);
  double a() const noexcept { return a_; }

 private:
  double a_;
};

double log_likelihood(const SuffStats& stats, double theta);
double log_likelihood(const Sample& s, double alpha, double theta);

/// (a + sum w1 - 1) ln theta + sum ln(1 - theta^w_i); alpha fixed.
double log_posterior_theta(const SuffStats& stats, double theta,
                           const PriorSpec& prior);
double log_posterior_theta(const Sample& s, double alpha, double theta,
                           const PriorSpec& prior);

/// -ln alpha + sum w1(alpha) ln theta + sum ln(1 - theta^w_i(alpha)); theta fixed.
double log_posterior_alpha(const Sample& s, double alpha, double theta);

/// -ln alpha + (a + sum w1(alpha) - 1) ln theta + sum ln(1 - theta^w_i(alpha)).
double log_posterior_joint(const Sample& s, double alpha, double theta,
                           const PriorSpec& prior);

// --- maximum likelihood ----------------------------------------------------

struct ThetaOnly {
  double alpha;
};
struct AlphaOnly {
  double theta;
};
struct Joint {};
using MleMode = std::variant<ThetaOnly, AlphaOnly, Joint>;

struct MleResult {
  double alpha = 0.0;
  double theta = 0.0;
  double log_likelihood = 0.0;
  /// The maximizer sits on the edge of the search bracket (monotone or
  /// ridge-shaped likelihood); the reported value is the clamp.
  bool at_boundary = false;
};

MleResult mle_theta(const Sample& s, double alpha);
MleResult mle_alpha(const Sample& s, double theta);
/// Throws DegenerateDataError for all-zero samples and ConvergenceError
/// (carrying the best point as {alpha, theta}) if the simplex stalls.
MleResult mle_joint(const Sample& s);
MleResult mle(const Sample& s, const MleMode& mode);

/// Minimizes f over R^2 with a Nelder-Mead simplex.  Returns the best vertex.
struct SimplexResult {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};
SimplexResult nelder_mead_2d(const std::function<double(double, double)>& f,
                             double x0, double y0, double step, double tol,
                             int max_iter = 5000);

// --- alpha posterior normalization -----------------------------------------

/// Quadrature of the alpha posterior (prior 1/alpha) over [kAlphaMin,
/// kAlphaMax] at fixed theta.  The improper prior can leave a posterior whose
/// mass piles up against the upper cap; `upper_decade_mass` measures that.
struct AlphaPosteriorCheck {
  double log_evidence = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double upper_decade_mass = 0.0;  // mass on [kAlphaMax / 10, kAlphaMax]
  bool concentrated() const noexcept { return upper_decade_mass < 0.01; }
};
AlphaPosteriorCheck check_alpha_posterior(const Sample& s, double theta);

}  // namespace dburr
