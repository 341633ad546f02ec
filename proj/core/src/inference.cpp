#include "dburr/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "dburr/error.hpp"
#include "dburr/numerics.hpp"

namespace dburr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_theta(double theta, const char* who) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError(std::string(who) + ": theta must lie in (0, 1)");
  }
}

void require_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError(std::string(who) + ": alpha must be positive");
  }
}

double logit(double p) { return std::log(p) - std::log1p(-p); }
double inv_logit(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// sum ln(1 - theta^w_i)
double sum_log_gaps(const SuffStats& stats, double log_theta) {
  double acc = 0.0;
  for (double w : stats.w) {
    acc += numerics::log1mexp(-w * log_theta);
  }
  return acc;
}

// Brent stops near sqrt(eps) relative precision; at high curvature that
// leaves a visible slope.  A few Newton steps on central differences remove
// it.  A step is kept only if it shrinks the difference slope.
double polish_1d(const std::function<double(double)>& f, double x) {
  constexpr double h = 1e-4;
  const auto slope = [&](double t) { return (f(t + h) - f(t - h)) / (2.0 * h); };
  double g = slope(x);
  for (int iter = 0; iter < 8; ++iter) {
    const double curv = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    if (!(curv < 0.0)) {
      break;
    }
    const double next = x - g / curv;
    const double gn = slope(next);
    if (!std::isfinite(f(next)) || !(std::abs(gn) < std::abs(g))) {
      break;
    }
    x = next;
    g = gn;
  }
  return x;
}

// Grid search followed by Brent refinement on the bracketing cell.  Returns
// the maximizer in the transformed coordinate and whether it sits on an edge.
std::pair<double, bool> maximize_bracketed(const std::function<double(double)>& f,
                                           double lo, double hi, int grid) {
  int best = 0;
  double best_val = kNegInf;
  const double step = (hi - lo) / grid;
  for (int i = 0; i <= grid; ++i) {
    const double v = f(lo + i * step);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = lo + std::min(best + 1, grid) * step;
  const double x = numerics::maximize_1d(f, a, b, 52);
  const double edge_tol = 1e-7 * (hi - lo);
  if (x - lo < edge_tol) {
    return {lo, true};
  }
  if (hi - x < edge_tol) {
    return {hi, true};
  }
  return {polish_1d(f, x), false};
}

}  // namespace

double SuffStats::sum_w1() const { return numerics::stable_sum(w1); }

SuffStats suff_stats(const Sample& s, double alpha) {
  require_alpha(alpha, "suff_stats");
  SuffStats out;
  out.alpha_at = alpha;
  out.w1.reserve(s.size());
  out.w2.reserve(s.size());
  out.w.reserve(s.size());
  for (double x : s.values()) {
    const double w1 = log1p_pow(x, alpha);
    const double w = log1p_pow_gap(x, alpha);
    out.w1.push_back(w1);
    out.w2.push_back(log1p_pow(x + 1.0, alpha));
    out.w.push_back(w);
  }
  return out;
}

PriorSpec::PriorSpec(double a) : a_(a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("PriorSpec: a must be positive");
  }
}

double log_likelihood(const SuffStats& stats, double theta) {
  require_theta(theta, "log_likelihood");
  const double lt = std::log(theta);
  return stats.sum_w1() * lt + sum_log_gaps(stats, lt);
}

double log_likelihood(const Sample& s, double alpha, double theta) {
  return log_likelihood(suff_stats(s, alpha), theta);
}

double log_posterior_theta(const SuffStats& stats, double theta,
                           const PriorSpec& prior) {
  require_theta(theta, "log_posterior_theta");
  const double lt = std::log(theta);
  return (prior.a() + stats.sum_w1() - 1.0) * lt + sum_log_gaps(stats, lt);
}

double log_posterior_theta(const Sample& s, double alpha, double theta,
                           const PriorSpec& prior) {
  return log_posterior_theta(suff_stats(s, alpha), theta, prior);
}

double log_posterior_alpha(const Sample& s, double alpha, double theta) {
  require_theta(theta, "log_posterior_alpha");
  const SuffStats stats = suff_stats(s, alpha);
  const double lt = std::log(theta);
  return -std::log(alpha) + stats.sum_w1() * lt + sum_log_gaps(stats, lt);
}

double log_posterior_joint(const Sample& s, double alpha, double theta,
                           const PriorSpec& prior) {
  require_theta(theta, "log_posterior_joint");
  const SuffStats stats = suff_stats(s, alpha);
  const double lt = std::log(theta);
  return -std::log(alpha) + (prior.a() + stats.sum_w1() - 1.0) * lt +
         sum_log_gaps(stats, lt);
}

MleResult mle_theta(const Sample& s, double alpha) {
  const SuffStats stats = suff_stats(s, alpha);
  const auto f = [&](double v) { return log_likelihood(stats, inv_logit(v)); };
  const auto [v, edge] = maximize_bracketed(f, logit(kThetaMin), logit(kThetaMax), 80);
  MleResult r;
  r.alpha = alpha;
  r.theta = edge ? (v < 0.0 ? kThetaMin : kThetaMax) : inv_logit(v);
  r.log_likelihood = log_likelihood(stats, r.theta);
  r.at_boundary = edge;
  return r;
}

MleResult mle_alpha(const Sample& s, double theta) {
  require_theta(theta, "mle_alpha");
  const auto f = [&](double u) { return log_likelihood(s, std::exp(u), theta); };
  const auto [u, edge] =
      maximize_bracketed(f, std::log(kAlphaMin), std::log(kAlphaMax), 80);
  MleResult r;
  r.alpha = edge ? (u < 0.0 ? kAlphaMin : kAlphaMax) : std::exp(u);
  r.theta = theta;
  r.log_likelihood = log_likelihood(s, r.alpha, theta);
  r.at_boundary = edge;
  return r;
}

SimplexResult nelder_mead_2d(const std::function<double(double, double)>& f,
                             double x0, double y0, double step, double tol,
                             int max_iter) {
  struct Vertex {
    double x, y, f;
  };
  const auto eval = [&](double x, double y) {
    const double v = f(x, y);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  std::array<Vertex, 3> s{{{x0, y0, eval(x0, y0)},
                           {x0 + step, y0, eval(x0 + step, y0)},
                           {x0, y0 + step, eval(x0, y0 + step)}}};
  SimplexResult out;
  for (int it = 0; it < max_iter; ++it) {
    std::sort(s.begin(), s.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double size =
        std::max({std::hypot(s[1].x - s[0].x, s[1].y - s[0].y),
                  std::hypot(s[2].x - s[0].x, s[2].y - s[0].y)});
    out.iterations = it;
    if (size < tol) {
      out.converged = true;
      break;
    }
    const double cx = 0.5 * (s[0].x + s[1].x);
    const double cy = 0.5 * (s[0].y + s[1].y);
    const auto along = [&](double t) {
      const double x = cx + t * (s[2].x - cx);
      const double y = cy + t * (s[2].y - cy);
      return Vertex{x, y, eval(x, y)};
    };
    const Vertex reflected = along(-1.0);
    if (reflected.f < s[0].f) {
      const Vertex expanded = along(-2.0);
      s[2] = expanded.f < reflected.f ? expanded : reflected;
    } else if (reflected.f < s[1].f) {
      s[2] = reflected;
    } else {
      const Vertex contracted =
          reflected.f < s[2].f ? along(-0.5) : along(0.5);
      if (contracted.f < std::min(reflected.f, s[2].f)) {
        s[2] = contracted;
      } else {
        for (int k = 1; k < 3; ++k) {
          s[k].x = s[0].x + 0.5 * (s[k].x - s[0].x);
          s[k].y = s[0].y + 0.5 * (s[k].y - s[0].y);
          s[k].f = eval(s[k].x, s[k].y);
        }
      }
    }
  }
  const auto best = std::min_element(
      s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  out.x = best->x;
  out.y = best->y;
  out.value = best->f;
  return out;
}

// A simplex locates the optimum only to about sqrt(machine epsilon), since
// function values stop resolving differences below that.  Newton steps on a
// central-difference gradient and Hessian drive the score itself to zero;
// a step is kept only if it shrinks the difference gradient.
void polish_stationary(const std::function<double(double, double)>& f,
                       SimplexResult& r) {
  constexpr double h = 1e-4;
  const auto gradient = [&](double x, double y) {
    return std::array<double, 2>{(f(x + h, y) - f(x - h, y)) / (2.0 * h),
                                 (f(x, y + h) - f(x, y - h)) / (2.0 * h)};
  };
  auto g = gradient(r.x, r.y);
  for (int iter = 0; iter < 8; ++iter) {
    const double f0 = f(r.x, r.y);
    const double hxx = (f(r.x + h, r.y) - 2.0 * f0 + f(r.x - h, r.y)) / (h * h);
    const double hyy = (f(r.x, r.y + h) - 2.0 * f0 + f(r.x, r.y - h)) / (h * h);
    const double hxy = (f(r.x + h, r.y + h) - f(r.x + h, r.y - h) -
                        f(r.x - h, r.y + h) + f(r.x - h, r.y - h)) /
                       (4.0 * h * h);
    const double det = hxx * hyy - hxy * hxy;
    if (!(hxx > 0.0) || !(det > 0.0)) {
      return;
    }
    const double dx = -(hyy * g[0] - hxy * g[1]) / det;
    const double dy = -(hxx * g[1] - hxy * g[0]) / det;
    const double nx = r.x + dx;
    const double ny = r.y + dy;
    const double fn = f(nx, ny);
    if (!std::isfinite(fn)) {
      return;
    }
    const auto gn = gradient(nx, ny);
    if (std::hypot(gn[0], gn[1]) >= std::hypot(g[0], g[1])) {
      return;
    }
    r.x = nx;
    r.y = ny;
    r.value = fn;
    g = gn;
  }
}

MleResult mle_joint(const Sample& s) {
  if (s.all_zero()) {
    throw DegenerateDataError(
        "mle_joint: all observations are zero; alpha and theta are not "
        "jointly identifiable");
  }
  const double u_lo = std::log(kAlphaMin);
  const double u_hi = std::log(kAlphaMax);
  const double v_lo = logit(kThetaMin);
  const double v_hi = logit(kThetaMax);
  const auto neg_ll = [&](double u, double v) {
    if (u < u_lo || u > u_hi || v < v_lo || v > v_hi) {
      return std::numeric_limits<double>::infinity();
    }
    return -log_likelihood(s, std::exp(u), inv_logit(v));
  };

  // Coarse warm start on the transformed box.
  constexpr int kGrid = 30;
  double best_u = 0.0;
  double best_v = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double u = u_lo + (u_hi - u_lo) * i / kGrid;
    for (int j = 0; j <= kGrid; ++j) {
      const double v = v_lo + (v_hi - v_lo) * j / kGrid;
      const double val = neg_ll(u, v);
      if (val < best) {
        best = val;
        best_u = u;
        best_v = v;
      }
    }
  }

  // Restarting the simplex from its own optimum guards against the
  // collapse Nelder-Mead is prone to on curved ridges.
  SimplexResult r = nelder_mead_2d(neg_ll, best_u, best_v, 0.25, 1e-11);
  for (int restart = 0; restart < 3 && r.converged; ++restart) {
    const SimplexResult again = nelder_mead_2d(neg_ll, r.x, r.y, 1e-3, 1e-11);
    const bool moved = std::hypot(again.x - r.x, again.y - r.y) > 1e-9;
    r = again;
    if (!moved) {
      break;
    }
  }
  if (!r.converged) {
    throw ConvergenceError("mle_joint: simplex did not converge",
                           {std::exp(r.x), inv_logit(r.y)});
  }

  const double edge = 1e-6;
  const bool interior = (r.x - u_lo >= edge) && (u_hi - r.x >= edge) &&
                        (r.y - v_lo >= edge) && (v_hi - r.y >= edge);
  if (interior) {
    polish_stationary(neg_ll, r);
  }

  MleResult out;
  out.at_boundary = !interior;
  out.alpha = std::clamp(std::exp(r.x), kAlphaMin, kAlphaMax);
  out.theta = std::clamp(inv_logit(r.y), kThetaMin, kThetaMax);
  out.log_likelihood = -r.value;
  return out;
}

MleResult mle(const Sample& s, const MleMode& mode) {
  return std::visit(
      [&](const auto& m) -> MleResult {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ThetaOnly>) {
          return mle_theta(s, m.alpha);
        } else if constexpr (std::is_same_v<M, AlphaOnly>) {
          return mle_alpha(s, m.theta);
        } else {
          return mle_joint(s);
        }
      },
      mode);
}

AlphaPosteriorCheck check_alpha_posterior(const Sample& s, double theta) {
  require_theta(theta, "check_alpha_posterior");
  const double u_lo = std::log(kAlphaMin);
  const double u_hi = std::log(kAlphaMax);
  // Density of u = ln alpha: the 1/alpha prior cancels the Jacobian.
  const auto log_density = [&](double u) {
    return log_posterior_alpha(s, std::exp(u), theta) + u;
  };

  constexpr int kPieces = 240;
  const double h = (u_hi - u_lo) / kPieces;
  std::vector<double> grid(kPieces + 1);
  double peak = kNegInf;
  for (int i = 0; i <= kPieces; ++i) {
    grid[i] = log_density(u_lo + i * h);
    peak = std::max(peak, grid[i]);
  }

  const double u_decade = std::log(kAlphaMax / 10.0);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, upper = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    if (std::max(grid[i], grid[i + 1]) - peak < -60.0) {
      continue;
    }
    const double a = u_lo + i * h;
    const double b = a + h;
    const auto piece = [&](int power) {
      return numerics::integrate(
          [&](double u) {
            return std::exp(log_density(u) - peak + power * u);
          },
          a, b, 1e-10);
    };
    const double p0 = piece(0);
    m0 += p0;
    m1 += piece(1);
    m2 += piece(2);
    if (b > u_decade) {
      upper += a >= u_decade ? p0
                             : numerics::integrate(
                                   [&](double u) {
                                     return std::exp(log_density(u) - peak);
                                   },
                                   u_decade, b, 1e-10);
    }
  }
  AlphaPosteriorCheck out;
  out.log_evidence = peak + std::log(m0);
  out.mean = m1 / m0;
  out.variance = std::max(0.0, m2 / m0 - out.mean * out.mean);
  out.upper_decade_mass = upper / m0;
  return out;
}

}  // namespace dburr
