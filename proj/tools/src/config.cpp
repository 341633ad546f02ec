#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string_view>

#include "dburr_tools/commands.hpp"
#include "format.hpp"

namespace dburr::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view text, const std::string& key) {
  T value{};
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(text.data(), last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw UsageError("config: '" + key + "' expects a number, got '" +
                     std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_grid(std::string_view text, const std::string& key) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<double>(trim(text.substr(0, comma)), key));
    if (comma == std::string_view::npos) {
      break;
    }
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string join_grid(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) out += ',';
    out += format_full(grid[i]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (theta_grid.empty() || alpha_grid.empty()) {
    throw UsageError("config: theta_grid and alpha_grid must be non-empty");
  }
  for (double t : theta_grid) {
    if (!(t > 0.0 && t < 1.0)) {
      throw UsageError("config: theta_grid values must lie in (0, 1)");
    }
  }
  for (double a : alpha_grid) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw UsageError("config: alpha_grid values must be positive");
    }
  }
  if (n == 0) throw UsageError("config: n must be positive");
  if (iters == 0) throw UsageError("config: iters must be positive");
  if (burn_in >= iters) throw UsageError("config: burn_in must be smaller than iters");
  if (!(a > 0.0)) throw UsageError("config: a must be positive");
  if (!(kernel_shape > 0.0)) throw UsageError("config: kernel_shape must be positive");
  if (!(alpha_walk_scale >= 0.0)) {
    throw UsageError("config: alpha_walk_scale must be non-negative");
  }
}

MhConfig ExperimentConfig::mh(std::uint64_t chain_seed) const {
  MhConfig m;
  m.iters = iters;
  m.burn_in = burn_in;
  m.kernel_shape = kernel_shape;
  m.alpha_walk_scale = alpha_walk_scale;
  m.seed = chain_seed;
  m.prior = PriorSpec(a);
  return m;
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig c) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    view = trim(view.substr(0, view.find('#')));
    if (view.empty()) {
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    const std::string key(trim(view.substr(0, eq)));
    const std::string_view value = trim(view.substr(eq + 1));
    if (key == "theta_grid") {
      c.theta_grid = parse_grid(value, key);
    } else if (key == "alpha_grid") {
      c.alpha_grid = parse_grid(value, key);
    } else if (key == "n") {
      c.n = parse_number<std::size_t>(value, key);
    } else if (key == "iters") {
      c.iters = parse_number<std::size_t>(value, key);
    } else if (key == "burn_in") {
      c.burn_in = parse_number<std::size_t>(value, key);
    } else if (key == "a") {
      c.a = parse_number<double>(value, key);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "kernel_shape") {
      c.kernel_shape = parse_number<double>(value, key);
    } else if (key == "alpha_walk_scale") {
      c.alpha_walk_scale = parse_number<double>(value, key);
    } else if (key == "threads") {
      c.threads = parse_number<unsigned>(value, key);
    } else {
      throw UsageError("config line " + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config '" + path.string() + "'");
  }
  return parse_config(in, std::move(base));
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "theta_grid = " << join_grid(c.theta_grid) << '\n'
      << "alpha_grid = " << join_grid(c.alpha_grid) << '\n'
      << "n = " << c.n << '\n'
      << "iters = " << c.iters << '\n'
      << "burn_in = " << c.burn_in << '\n'
      << "a = " << format_full(c.a) << '\n'
      << "seed = " << c.seed << '\n'
      << "kernel_shape = " << format_full(c.kernel_shape) << '\n'
      << "alpha_walk_scale = " << format_full(c.alpha_walk_scale) << '\n';
  return out.str();
}

CellSeeds cell_seeds(std::uint64_t master, std::size_t cell) {
  const std::uint64_t base = 3 * static_cast<std::uint64_t>(cell);
  return {derive_seed(master, base), derive_seed(master, base + 1),
          derive_seed(master, base + 2)};
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const UsageError*>(&e) != nullptr) {
    return 1;
  }
  if (dynamic_cast<const ConsistencyError*>(&e) != nullptr) {
    return 3;
  }
  return 2;
}

}  // namespace dburr::cli
