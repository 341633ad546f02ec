#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dburr/inference.hpp"
#include "dburr/sampling.hpp"

namespace dburr {

/// Per-coordinate Metropolis-Hastings proposal.
class ProposalKernel {
 public:
  enum class Kind {
    gamma_independence,
    uniform_01,
    positive_random_walk,
    log_random_walk
  };

  /// Gamma(shape, mean/shape) draws, independent of the current state.
  static ProposalKernel gamma_independence(double mean, double shape);
  /// Uniform(0, 1) draws, independent of the current state.
  static ProposalKernel uniform_01();
  /// current + scale * N(0, 1); non-positive proposals are rejected.
  static ProposalKernel positive_random_walk(double scale);
  /// current * exp(scale * N(0, 1)); asymmetric, corrected by proposed/current.
  static ProposalKernel log_random_walk(double scale);

  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return p1_; }
  double shape() const noexcept { return p2_; }
  double scale() const noexcept { return p1_; }

  bool in_support(double x) const noexcept;
  double propose(double current, SeededGenerator& gen) const;
  /// ln q(current | proposed) - ln q(proposed | current).
  double log_hastings(double current, double proposed) const;

 private:
  ProposalKernel(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}
  double log_density(double x) const;

  Kind kind_;
  double p1_;
  double p2_;
};

using LogDensity = std::function<double(std::span<const double>)>;

/// One step of a sweep: propose `coordinate` from `kernel`.
struct CoordinateUpdate {
  std::size_t coordinate;
  ProposalKernel kernel;
};

/// Sequence of MH states.  Row 0 is the initial state; every later row is
/// the state after one sweep of coordinate-wise updates.
struct Chain {
  std::size_t dim = 0;
  std::size_t sweep_width = 0;      // updates per sweep
  std::vector<double> values;       // row-major, size() * dim
  std::vector<bool> accepted;       // any coordinate moved at this row
  std::vector<std::uint8_t> moves;  // per row and update: 1 = accepted
  std::uint64_t out_of_support = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return accepted.size(); }
  std::span<const double> state(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  /// Post-burn-in draws of one coordinate.
  std::vector<double> coordinate(std::size_t c) const;
};

/// Runs `iters` rows of Metropolis-within-Gibbs with one kernel per
/// coordinate, updated in order.  Throws DomainError when the target is not
/// finite at `init`.
Chain mh_run(const LogDensity& target, std::vector<double> init,
             const std::vector<ProposalKernel>& kernels, std::size_t iters,
             SeededGenerator& gen, std::size_t burn_in = 0);

/// General form: each sweep applies `schedule` in order.  A coordinate may
/// appear more than once (a composition of MH kernels leaves the target
/// invariant).
Chain mh_run(const LogDensity& target, std::vector<double> init,
             const std::vector<CoordinateUpdate>& schedule, std::size_t iters,
             SeededGenerator& gen, std::size_t burn_in = 0);

/// Autocorrelation-adjusted effective sample size (Geyer's initial monotone
/// sequence estimator).
double effective_sample_size(std::span<const double> draws);

struct PosteriorSummary {
  std::vector<double> est_sq;     // posterior means (squared-error loss)
  std::vector<double> est_abs;    // posterior medians (absolute-error loss)
  std::vector<double> variances;  // unbiased sample variances
  std::vector<double> ess;
  std::optional<double> corr_alpha_theta;
  double acceptance_rate = 0.0;
  std::size_t draws = 0;
  std::size_t total_iters = 0;
};

PosteriorSummary summarize(const Chain& chain);

struct MhConfig {
  std::size_t iters = 10'000;
  /// Defaults to 10% of iters.
  std::optional<std::size_t> burn_in;
  double kernel_shape = 10.0;
  /// Step of the extra log-scale random-walk alpha update that follows the
  /// gamma independence update in every sweep; 0 disables it.
  double alpha_walk_scale = 1.0;
  std::uint64_t seed = 1;
  PriorSpec prior{};

  std::size_t effective_burn_in() const { return burn_in.value_or(iters / 10); }
};

struct FitResult {
  Chain chain;
  PosteriorSummary summary;
  double kernel_mean = 0.0;
  bool mle_fallback = false;
  std::vector<std::string> warnings;
};

/// Alpha posterior with theta known; gamma independence proposals
/// centered at the alpha MLE.
FitResult fit_alpha_mh(const Sample& s, double theta_known, const MhConfig& config);

/// Joint (alpha, theta) posterior; alpha from the gamma kernel at the joint
/// MLE of alpha, theta from Uniform(0, 1).
FitResult fit_joint_mh(const Sample& s, const MhConfig& config);

/// Theta posterior with alpha known; Uniform(0, 1) proposals.
FitResult fit_theta_mh(const Sample& s, double alpha_known, const MhConfig& config);

/// `iter,alpha,theta,accepted`; a missing coordinate is written as empty.
void write_chain_csv(const std::filesystem::path& path, const Chain& chain,
                     const std::vector<std::string>& coordinate_names);

}  // namespace dburr
