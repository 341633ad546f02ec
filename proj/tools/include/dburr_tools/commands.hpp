#pragma once

// Library behind the `dburr` executable.  Each verb is a plain function so
// the test suite can drive it without spawning processes.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dburr/error.hpp"
#include "dburr/mcmc.hpp"

namespace dburr::cli {

/// Bad flags, missing required parameters, malformed config files.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 0 success, 1 usage, 2 data/domain/I-O, 3 internal consistency.
int exit_code_for(const std::exception& e) noexcept;

struct ExperimentConfig {
  std::vector<double> theta_grid{0.1, 0.2, 0.3};
  std::vector<double> alpha_grid{1.0, 2.0, 3.0, 4.0};
  std::size_t n = 25;
  std::size_t iters = 10'000;
  std::size_t burn_in = 1'000;
  double a = 1.0;
  std::uint64_t seed = 12345;
  double kernel_shape = 10.0;
  double alpha_walk_scale = 1.0;
  /// Worker threads for `tables`; 0 means one per hardware thread.
  unsigned threads = 0;

  /// Throws UsageError naming the offending key.
  void validate() const;
  MhConfig mh(std::uint64_t chain_seed) const;
};

/// Applies `key = value` lines (with `#` comments) on top of `base`.
/// Grids are comma-separated.  Unknown keys are usage errors.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             ExperimentConfig base = {});
/// Inverse of parse_config at full precision.
std::string format_config(const ExperimentConfig& config);

/// Cells are numbered theta-major: index = i_theta * |alpha_grid| + i_alpha.
/// Every cell owns three streams derived from the master seed.
struct CellSeeds {
  std::uint64_t data;
  std::uint64_t alpha_chain;
  std::uint64_t joint_chain;
};
CellSeeds cell_seeds(std::uint64_t master, std::size_t cell);

// --- simulate --------------------------------------------------------------

std::string sample_file_name(double theta, double alpha);

/// One sample CSV per grid cell under `out_dir`; returns the paths written.
std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& config,
                                                const std::filesystem::path& out_dir);

// --- fit -------------------------------------------------------------------

enum class FitMethod { closed_form, mh_alpha, mh_joint, mle };
FitMethod parse_fit_method(const std::string& name);

struct FitRequest {
  std::filesystem::path data;
  FitMethod method = FitMethod::mle;
  std::optional<double> alpha;  // known alpha (closed-form; optional for mle)
  std::optional<double> theta;  // known theta (mh-alpha; optional for mle)
  ExperimentConfig config;      // a, iters, burn_in, seed, kernel shape
  std::optional<std::filesystem::path> out;        // quantity,value CSV
  std::optional<std::filesystem::path> chain_out;  // MH chain CSV
};

/// One reported number; `value` is kept at full precision.
struct FitQuantity {
  std::string name;
  double value;
};

struct FitReport {
  std::vector<FitQuantity> quantities;
  std::vector<std::string> notes;

  std::optional<double> find(const std::string& name) const;
};

FitReport cmd_fit(const FitRequest& request, std::ostream& text);

// --- tables ----------------------------------------------------------------

enum class Loss { squared, absolute };

struct TableRow {
  double theta_true = 0.0;
  double alpha_true = 0.0;
  double alpha_hat = 0.0;
  std::optional<double> theta_hat;
  double var_alpha = 0.0;
  std::optional<double> var_theta;
  std::optional<double> corr;
  Loss loss = Loss::squared;
  std::uint64_t seed = 0;       // chain seed
  std::uint64_t data_seed = 0;  // sample seed
};

inline constexpr const char* kTableHeader =
    "theta_true,alpha_true,alpha_hat,theta_hat,var_alpha,var_theta,corr,loss,"
    "seed,data_seed";

struct TablesResult {
  std::vector<TableRow> alpha_squared;   // theta known
  std::vector<TableRow> alpha_absolute;
  std::vector<TableRow> joint_squared;   // both unknown
  std::vector<TableRow> joint_absolute;
  std::vector<std::string> warnings;     // "cell (theta, alpha): ..."
  double seconds = 0.0;
};

/// Runs every cell of both scenarios and writes table{1..4}_*.csv, the
/// matching 4-decimal .txt renderings, config.txt and samples/ under
/// `out_dir`.  Cells run concurrently; outputs do not depend on the thread
/// count.
TablesResult cmd_tables(const ExperimentConfig& config,
                        const std::filesystem::path& out_dir);

void write_table_csv(const std::filesystem::path& path,
                     const std::vector<TableRow>& rows);
std::vector<TableRow> read_table_csv(const std::filesystem::path& path);
/// Study layout: one block of rows per theta, one column per alpha.
std::string render_table(const std::vector<TableRow>& rows, const std::string& title);

// --- pmf -------------------------------------------------------------------

/// CSV `x,pmf,log_pmf,survival,cdf,second_rate` for x = 0..max_x.
void cmd_pmf(double alpha, double theta, std::size_t max_x, std::ostream& out);

}  // namespace dburr::cli
