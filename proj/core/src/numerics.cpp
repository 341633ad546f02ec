#include "dburr/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "dburr/error.hpp"

namespace dburr::numerics {

double log1mexp(double z) {
  if (!(z > 0.0)) {
    throw DomainError("log1mexp: argument must be positive");
  }
  // Maechler's switch point: expm1 below ln 2, log1p above.
  return z < std::numbers::ln2 ? std::log(-std::expm1(-z))
                               : std::log1p(-std::exp(-z));
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("log_beta: arguments must be positive");
  }
  return boost::math::lgamma(a) + boost::math::lgamma(b) -
         boost::math::lgamma(a + b);
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

namespace {

void check_quadrature(double result, double error, double l1, double rel_tol,
                      double abs_tol, const char* who) {
  if (!std::isfinite(result)) {
    throw ConvergenceError(std::string(who) + ": non-finite result");
  }
  // The Kronrod/tanh-sinh estimates are pessimistic; only flag gross misses.
  if (error > std::max(std::sqrt(rel_tol) * std::max(l1, 1e-300), abs_tol)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ": error estimate %.3g against L1 norm %.3g",
                  error, l1);
    throw ConvergenceError(std::string(who) + buf,
                           {result});
  }
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  double error = 0.0;
  double l1 = 0.0;
  const double result = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, 25, rel_tol, &error, &l1);
  check_quadrature(result, error, l1, rel_tol, 0.0, "integrate");
  return result;
}

double integrate_open(const std::function<double(double)>& f, double a,
                      double b, double rel_tol, double abs_tol) {
  // One integrator per call keeps this reentrant; construction is cheap
  // relative to the abscissa evaluations.
  boost::math::quadrature::tanh_sinh<double> integrator(15);
  double error = 0.0;
  double l1 = 0.0;
  const double result = integrator.integrate(f, a, b, rel_tol, &error, &l1);
  check_quadrature(result, error, l1, rel_tol, abs_tol, "integrate_open");
  return result;
}

double maximize_1d(const std::function<double(double)>& f, double lo,
                   double hi, int bits) {
  std::uintmax_t max_iter = 500;
  const auto [x, fx] = boost::math::tools::brent_find_minima(
      [&](double t) { return -f(t); }, lo, hi, bits, max_iter);
  (void)fx;
  if (max_iter >= 500) {
    throw ConvergenceError("maximize_1d: iteration cap reached", {x});
  }
  return x;
}

}  // namespace dburr::numerics
