#pragma once

// Continuous Burr-XII and discrete Burr DBD(alpha, theta) distributions.
//
// DBD is the law of floor(X) for X ~ Burr-XII(alpha, beta) reparameterized
// with theta = exp(-beta).  At integer x both share the survival function
//
//   S(x) = (1 + x^alpha)^(-beta) = theta^ln(1 + x^alpha).
//
// Every logarithm here is natural.  Counts are passed as doubles holding
// non-negative integer values so that heavy-tailed draws far beyond 2^64
// remain representable; functions taking a count reject non-integral or
// negative input with DomainError.

#include <cstdint>

namespace dburr {

/// Shape pair (alpha, beta) of the continuous Burr-XII distribution.
class BurrParams {
 public:
  BurrParams(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

 private:
  double alpha_;
  double beta_;
};

/// Parameters (alpha, theta) of the discrete Burr distribution.
class DBurrParams {
 public:
  DBurrParams(double alpha, double theta);

  double alpha() const noexcept { return alpha_; }
  double theta() const noexcept { return theta_; }
  /// ln(theta), always negative.
  double log_theta() const noexcept { return log_theta_; }
  /// beta = -ln(theta) of the underlying Burr-XII law.
  double beta() const noexcept { return -log_theta_; }
  BurrParams continuous() const { return BurrParams(alpha_, beta()); }

 private:
  double alpha_;
  double theta_;
  double log_theta_;
};

double theta_from_beta(double beta);
double beta_from_theta(double theta);

/// ln(1 + x^alpha) and its forward difference ln(1+(1+x)^alpha) - ln(1+x^alpha).
/// The difference is evaluated without cancellation, so it stays accurate
/// at very large x where both logarithms agree to many digits.
double log1p_pow(double x, double alpha);
double log1p_pow_gap(double x, double alpha);

// --- discrete Burr -------------------------------------------------------

double dburr_survival(double x, const DBurrParams& p);
double dburr_log_survival(double x, const DBurrParams& p);
double dburr_pmf(double x, const DBurrParams& p);
double dburr_log_pmf(double x, const DBurrParams& p);
double dburr_cdf(double x, const DBurrParams& p);

/// r*(x) = ln[S(x) / S(x+1)].
double second_rate_of_failure(double x, const DBurrParams& p);

/// E[X^r] by series summation, accurate to `tol` in absolute terms.
/// Throws MomentDoesNotExist when alpha * beta <= r and ConvergenceError
/// when the tail bound cannot be met within 10^8 terms.
double dburr_moment(int r, const DBurrParams& p, double tol = 1e-10);

// --- continuous Burr-XII -------------------------------------------------

double burr_pdf(double x, const BurrParams& p);
double burr_survival(double x, const BurrParams& p);
double burr_hazard(double x, const BurrParams& p);

/// E[X^r] = beta * B(r/alpha + 1, beta - r/alpha), finite iff alpha*beta > r.
double burr_moment(int r, const BurrParams& p);

}  // namespace dburr
