#pragma once

// Theta-only posterior under a Beta(a, 1) prior with alpha known:
//
//   pi(theta | x)  ~  theta^(A-1) * prod_i (1 - theta^w_i),   A = a + sum w1_i.
//
// Two families live here.  The "product-form" normalizer and Bayes estimate
// multiply one single-observation factor per datum; they are exact for n = 1
// and approximate otherwise.  The exact routines evaluate the integral
//
//   Z(A) = int_0^1 theta^(A-1) prod_i (1 - theta^w_i) dtheta
//
// by inclusion-exclusion (n <= 20) and by quadrature, and cross-check the two.

#include <cstddef>
#include <vector>

#include "dburr/inference.hpp"

namespace dburr {

inline constexpr std::size_t kMaxExpansionTerms = 20;

struct ClosedFormTerms {
  std::vector<double> lambda;  // w1 + a/n + 1
  std::vector<double> rho;     // w2 + a/n + 1
  std::vector<double> delta;   // w1 + (a-1)/n + 1
  std::vector<double> tau;     // w2 + (a-1)/n + 1
  double A = 0.0;              // a + sum w1
};

ClosedFormTerms closed_form_terms(const SuffStats& stats, const PriorSpec& prior);

/// prod_i w_i / (delta_i tau_i), the inverse of the product-form posterior
/// constant.  `log_` variant returns its logarithm.
double paper_normalizer(const SuffStats& stats, const PriorSpec& prior);
double log_paper_normalizer(const SuffStats& stats, const PriorSpec& prior);

struct BayesEstimate {
  double raw = 0.0;    // formula value
  double value = 0.0;  // raw clamped into (0, 1)
  bool out_of_range = false;
};

/// Product-form posterior mean
///   [prod w_i/(lambda_i rho_i)] / [prod w_i/(delta_i tau_i)].
BayesEstimate theta_bayes_paper(const SuffStats& stats, const PriorSpec& prior);

/// sum over subsets S of (-1)^|S| / (A + sum_{i in S} w_i); requires
/// n <= kMaxExpansionTerms.  Equal w's are grouped, and the alternating sum is
/// evaluated in multiprecision until two precisions agree.
double normalizer_by_expansion(const SuffStats& stats, double A);

/// ln Z(A) by quadrature; valid for any n and immune to underflow.
double log_normalizer_by_quadrature(const SuffStats& stats, double A);

/// Z(a + sum w1) by both routes when n <= 20 (they must agree to 1e-8
/// relative, else ConsistencyError), by quadrature alone otherwise.
double exact_normalizer(const SuffStats& stats, const PriorSpec& prior);
double log_exact_normalizer(const SuffStats& stats, const PriorSpec& prior);

/// E[theta | x] = Z(A+1) / Z(A).
double exact_posterior_mean(const SuffStats& stats, const PriorSpec& prior);

/// Posterior CDF at t, by quadrature.
double exact_posterior_cdf(const SuffStats& stats, const PriorSpec& prior,
                           double t);

/// Root of CDF = 1/2, bisection to 1e-10.
double exact_posterior_median(const SuffStats& stats, const PriorSpec& prior);

/// Normalized posterior density at theta.
double exact_posterior_density(const SuffStats& stats, const PriorSpec& prior,
                               double theta);

}  // namespace dburr
