#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "dburr/distribution.hpp"

namespace dburr {

/// Seeded pseudo-random source.  The engine is pinned to mt19937_64, whose
/// output sequence is fixed by the C++ standard, and all derived variates
/// use explicitly specified transformations, so a seed reproduces the same
/// stream everywhere.  Not thread-safe: one generator per task.
class SeededGenerator {
 public:
  explicit SeededGenerator(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open();
  double normal();
  /// Gamma variate with the given shape and scale.
  double gamma(double shape, double scale);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t value);

/// Child seed for stream `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Ordered non-empty collection of non-negative integer observations.
class Sample {
 public:
  explicit Sample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  bool all_zero() const;

 private:
  std::vector<double> values_;
};

/// Inverse-survival draw X = (U^(-1/beta) - 1)^(1/alpha).
double burr_from_uniform(double u, const BurrParams& p);
double sample_continuous_burr(SeededGenerator& gen, const BurrParams& p);

/// n draws of floor(X) with X ~ Burr-XII(alpha, -ln theta).
Sample sample_dburr(SeededGenerator& gen, const DBurrParams& p, std::size_t n);

/// Smallest x with 1 - S(x+1) >= u.
double dburr_quantile(double u, const DBurrParams& p);
/// n draws by discrete inversion; same law as sample_dburr.
Sample sample_dburr_by_quantile(SeededGenerator& gen, const DBurrParams& p,
                                std::size_t n);

/// One-column CSV: `# seed=<seed>` line, `x` header, one count per row.
void write_sample_csv(const std::filesystem::path& path, const Sample& sample,
                      std::uint64_t seed);
struct SampleFile {
  Sample sample;
  std::uint64_t seed = 0;
  bool has_seed = false;
};
SampleFile read_sample_csv(const std::filesystem::path& path);

}  // namespace dburr
