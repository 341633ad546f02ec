#include "dburr/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dburr/error.hpp"
#include "dburr/numerics.hpp"

namespace dburr {

namespace {

constexpr double kRouteTolerance = 1e-8;
constexpr double kQuadratureTol = 1e-14;
// The kernel is scaled to peak at 1, so absolute errors this small are
// negligible against the whole integral even when one piece is tiny.
constexpr double kQuadratureAbsTol = 1e-16;

// ln of theta^(A-1) prod (1 - theta^w_i) as a function of t = ln theta < 0.
double log_kernel(const SuffStats& stats, double A, double t) {
  double acc = (A - 1.0) * t;
  for (double w : stats.w) {
    acc += numerics::log1mexp(-w * t);
  }
  return acc;
}

// The log-kernel is concave in t, so Brent finds its maximum.  When A < 1 the
// kernel is unbounded at theta -> 0 and the bracket edge e^-40 is returned,
// which still serves as a split point and scale reference.
double kernel_mode_log_theta(const SuffStats& stats, double A) {
  return numerics::maximize_1d(
      [&](double t) { return log_kernel(stats, A, t); }, -40.0, -1e-12, 52);
}

struct ScaledKernel {
  const SuffStats& stats;
  double A;
  double log_scale;

  double operator()(double theta) const {
    if (theta >= 1.0) {
      return stats.size() == 0 ? std::exp(-log_scale) : 0.0;
    }
    if (theta <= 0.0) {
      return 0.0;
    }
    return std::exp(log_kernel(stats, A, std::log(theta)) - log_scale);
  }
};

// int_0^upper of the scaled kernel, split at the mode so each piece is
// monotone.
double scaled_integral(const ScaledKernel& k, double mode, double upper) {
  // A mode pinned against either end means the kernel is monotone there;
  // splitting would only create a sliver tanh-sinh cannot estimate.
  if (mode < 1e-8 || mode > upper * (1.0 - 1e-6)) {
    return numerics::integrate_open(k, 0.0, upper, kQuadratureTol, kQuadratureAbsTol);
  }
  return numerics::integrate_open(k, 0.0, mode, kQuadratureTol, kQuadratureAbsTol) +
         numerics::integrate_open(k, mode, upper, kQuadratureTol, kQuadratureAbsTol);
}

struct ScaledSetup {
  double mode;
  double log_scale;
};

ScaledSetup scaled_setup(const SuffStats& stats, double A) {
  const double t_mode = kernel_mode_log_theta(stats, A);
  return {std::exp(t_mode), log_kernel(stats, A, t_mode)};
}

void require_positive_A(double A) {
  if (!(A > 0.0) || !std::isfinite(A)) {
    throw DomainError("normalizer: A must be positive");
  }
}

}  // namespace

ClosedFormTerms closed_form_terms(const SuffStats& stats, const PriorSpec& prior) {
  const double n = static_cast<double>(stats.size());
  const double a = prior.a();
  ClosedFormTerms t;
  t.A = a + stats.sum_w1();
  for (std::size_t i = 0; i < stats.size(); ++i) {
    t.lambda.push_back(stats.w1[i] + a / n + 1.0);
    t.rho.push_back(stats.w2[i] + a / n + 1.0);
    t.delta.push_back(stats.w1[i] + (a - 1.0) / n + 1.0);
    t.tau.push_back(stats.w2[i] + (a - 1.0) / n + 1.0);
  }
  return t;
}

double log_paper_normalizer(const SuffStats& stats, const PriorSpec& prior) {
  const ClosedFormTerms t = closed_form_terms(stats, prior);
  double acc = 0.0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    acc += std::log(stats.w[i]) - std::log(t.delta[i]) - std::log(t.tau[i]);
  }
  return acc;
}

double paper_normalizer(const SuffStats& stats, const PriorSpec& prior) {
  return std::exp(log_paper_normalizer(stats, prior));
}

BayesEstimate theta_bayes_paper(const SuffStats& stats, const PriorSpec& prior) {
  const ClosedFormTerms t = closed_form_terms(stats, prior);
  double log_num = 0.0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    log_num += std::log(stats.w[i]) - std::log(t.lambda[i]) - std::log(t.rho[i]);
  }
  BayesEstimate est;
  est.raw = std::exp(log_num - log_paper_normalizer(stats, prior));
  est.out_of_range = !(est.raw > 0.0 && est.raw < 1.0);
  est.value = est.out_of_range
                  ? std::clamp(est.raw, std::numeric_limits<double>::min(),
                               std::nextafter(1.0, 0.0))
                  : est.raw;
  return est;
}

namespace {

// Equal w's collapse their subsets: a group of m copies contributes
// sum_j C(m, j) (-1)^j over the number j of copies taken.
using WeightGroups = std::vector<std::pair<double, unsigned>>;

WeightGroups group_weights(const SuffStats& stats) {
  std::vector<double> w(stats.w.begin(), stats.w.end());
  std::sort(w.begin(), w.end());
  WeightGroups groups;
  for (double v : w) {
    if (!groups.empty() && groups.back().first == v) {
      ++groups.back().second;
    } else {
      groups.emplace_back(v, 1U);
    }
  }
  return groups;
}

template <class Real>
Real expansion_sum(const WeightGroups& groups, double A) {
  Real sum = 0;
  const auto visit = [&](auto&& self, std::size_t k, const Real& denom,
                         const Real& coeff) -> void {
    if (k == groups.size()) {
      sum += coeff / denom;
      return;
    }
    const auto [w, m] = groups[k];
    Real binom = 1;
    for (unsigned j = 0; j <= m; ++j) {
      const Real c = (j % 2 == 0) ? Real(coeff * binom) : Real(-coeff * binom);
      self(self, k + 1, Real(denom + Real(j) * w), c);
      binom = binom * (m - j) / (j + 1);
    }
  };
  visit(visit, 0, Real(A), Real(1));
  return sum;
}

template <class Lo, class Hi>
bool settled(const Lo& lo, const Hi& hi) {
  const Hi diff = abs(Hi(lo) - hi);
  return hi > 0 && diff <= Hi(1e-17) * hi;
}

// The alternating sum cancels heavily (terms of size 1/A summing to a much
// smaller Z), so it is evaluated at increasing precision until two
// consecutive precisions agree well beyond double accuracy.
double log_expansion(const SuffStats& stats, double A) {
  using boost::multiprecision::cpp_bin_float_50;
  using boost::multiprecision::cpp_bin_float_100;
  using Float200 = boost::multiprecision::number<
      boost::multiprecision::cpp_bin_float<200>>;
  using Float400 = boost::multiprecision::number<
      boost::multiprecision::cpp_bin_float<400>>;

  const WeightGroups groups = group_weights(stats);
  const auto r50 = expansion_sum<cpp_bin_float_50>(groups, A);
  const auto r100 = expansion_sum<cpp_bin_float_100>(groups, A);
  if (settled(r50, r100)) {
    return static_cast<double>(log(r100));
  }
  const auto r200 = expansion_sum<Float200>(groups, A);
  if (settled(r100, r200)) {
    return static_cast<double>(log(r200));
  }
  const auto r400 = expansion_sum<Float400>(groups, A);
  if (settled(r200, r400)) {
    return static_cast<double>(log(r400));
  }
  throw ConvergenceError(
      "normalizer_by_expansion: cancellation exceeds 400 digits of precision");
}

void require_expandable(const SuffStats& stats, double A) {
  require_positive_A(A);
  if (stats.size() > kMaxExpansionTerms) {
    throw DomainError("normalizer_by_expansion: n = " +
                      std::to_string(stats.size()) +
                      " exceeds the 2^20-term cap");
  }
}

}  // namespace

double normalizer_by_expansion(const SuffStats& stats, double A) {
  require_expandable(stats, A);
  return std::exp(log_expansion(stats, A));
}

double log_normalizer_by_quadrature(const SuffStats& stats, double A) {
  require_positive_A(A);
  const ScaledSetup setup = scaled_setup(stats, A);
  const ScaledKernel k{stats, A, setup.log_scale};
  return setup.log_scale + std::log(scaled_integral(k, setup.mode, 1.0));
}

namespace {

double log_exact_at(const SuffStats& stats, double A) {
  const double log_quad = log_normalizer_by_quadrature(stats, A);
  if (stats.size() > kMaxExpansionTerms) {
    return log_quad;
  }
  require_expandable(stats, A);
  const double log_expanded = log_expansion(stats, A);
  const double rel = std::abs(std::expm1(log_expanded - log_quad));
  if (!(rel <= kRouteTolerance)) {
    throw ConsistencyError(
        "exact normalizer: expansion (ln " + std::to_string(log_expanded) +
        ") and quadrature (ln " + std::to_string(log_quad) +
        ") disagree, relative difference " + std::to_string(rel));
  }
  return log_expanded;
}

}  // namespace

double log_exact_normalizer(const SuffStats& stats, const PriorSpec& prior) {
  return log_exact_at(stats, prior.a() + stats.sum_w1());
}

double exact_normalizer(const SuffStats& stats, const PriorSpec& prior) {
  return std::exp(log_exact_normalizer(stats, prior));
}

double exact_posterior_mean(const SuffStats& stats, const PriorSpec& prior) {
  const double A = prior.a() + stats.sum_w1();
  return std::exp(log_exact_at(stats, A + 1.0) - log_exact_at(stats, A));
}

double exact_posterior_density(const SuffStats& stats, const PriorSpec& prior,
                               double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError("exact_posterior_density: theta must lie in (0, 1)");
  }
  const double A = prior.a() + stats.sum_w1();
  return std::exp(log_kernel(stats, A, std::log(theta)) - log_exact_at(stats, A));
}

double exact_posterior_cdf(const SuffStats& stats, const PriorSpec& prior,
                           double t) {
  if (t <= 0.0) {
    return 0.0;
  }
  if (t >= 1.0) {
    return 1.0;
  }
  const double A = prior.a() + stats.sum_w1();
  const ScaledSetup setup = scaled_setup(stats, A);
  const ScaledKernel k{stats, A, setup.log_scale};
  const double total = scaled_integral(k, setup.mode, 1.0);
  return scaled_integral(k, setup.mode, t) / total;
}

double exact_posterior_median(const SuffStats& stats, const PriorSpec& prior) {
  const double A = prior.a() + stats.sum_w1();
  const ScaledSetup setup = scaled_setup(stats, A);
  const ScaledKernel k{stats, A, setup.log_scale};
  const double total = scaled_integral(k, setup.mode, 1.0);
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (scaled_integral(k, setup.mode, mid) / total < 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dburr
