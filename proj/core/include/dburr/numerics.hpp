#pragma once

#include <functional>
#include <span>

namespace dburr::numerics {

/// ln(1 - exp(-z)) for z > 0, accurate for both tiny and large z.
double log1mexp(double z);

/// ln B(a, b) through log-gamma differences.
double log_beta(double a, double b);

/// Compensated (Neumaier) summation.
double stable_sum(std::span<const double> values);

/// Adaptive Gauss-Kronrod integration on a finite interval [a, b].
/// Throws ConvergenceError when the error estimate stays above
/// `rel_tol * |result|` after the refinement budget is spent.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

/// Double-exponential integration on (a, b); tolerates integrable endpoint
/// singularities.  Same error policy as `integrate`, except that an error
/// estimate below `abs_tol` is always accepted (for pieces of a larger
/// integral whose own magnitude is negligible).
double integrate_open(const std::function<double(double)>& f, double a,
                      double b, double rel_tol = 1e-12, double abs_tol = 0.0);

/// Maximizes a unimodal function on [lo, hi] (Brent's method).  Returns the
/// abscissa of the maximum.
double maximize_1d(const std::function<double(double)>& f, double lo,
                   double hi, int bits = 40);

}  // namespace dburr::numerics
