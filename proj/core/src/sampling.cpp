#include "dburr/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "dburr/error.hpp"

namespace dburr {

namespace {

constexpr double kExactIntegerLimit = 4503599627370496.0;  // 2^52

}  // namespace

SeededGenerator::SeededGenerator(std::uint64_t seed)
    : seed_(seed), engine_(seed) {}

double SeededGenerator::uniform_open() {
  // 53 random bits placed at the centre of each of 2^53 equal cells.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double SeededGenerator::normal() {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double SeededGenerator::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw DomainError("gamma: shape and scale must be positive");
  }
  boost::random::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

std::uint64_t mix_seed(std::uint64_t value) {
  std::uint64_t z = value + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw DomainError("Sample: at least one observation is required");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v) || std::floor(v) != v) {
      throw DomainError("Sample: observations must be non-negative integers");
    }
  }
}

bool Sample::all_zero() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0.0; });
}

double burr_from_uniform(double u, const BurrParams& p) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("burr_from_uniform: u must lie in (0, 1)");
  }
  // S(X) = U  =>  X = expm1(-ln U / beta)^(1/alpha), evaluated in logs so
  // extreme tail draws saturate instead of producing inf.
  const double c = -std::log(u) / p.beta();
  const double log_expm1 = c > 30.0 ? c + std::log1p(-std::exp(-c))
                                    : std::log(std::expm1(c));
  const double log_x = log_expm1 / p.alpha();
  if (log_x >= std::log(std::numeric_limits<double>::max())) {
    return std::numeric_limits<double>::max();
  }
  return std::exp(log_x);
}

double sample_continuous_burr(SeededGenerator& gen, const BurrParams& p) {
  return burr_from_uniform(gen.uniform_open(), p);
}

Sample sample_dburr(SeededGenerator& gen, const DBurrParams& p, std::size_t n) {
  if (n == 0) {
    throw DomainError("sample_dburr: n must be positive");
  }
  const BurrParams cont = p.continuous();
  std::vector<double> values(n);
  for (auto& v : values) {
    v = std::floor(sample_continuous_burr(gen, cont));
  }
  return Sample(std::move(values));
}

double dburr_quantile(double u, const DBurrParams& p) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("dburr_quantile: u must lie in (0, 1)");
  }
  const double log_level = std::log1p(-u);
  // S(x+1) <= 1-u  <=>  ln S(x+1) <= ln(1-u)
  const auto reached = [&](double x) {
    return p.log_theta() * log1p_pow(x + 1.0, p.alpha()) <= log_level;
  };
  const double c = log_level / p.log_theta();
  const double log_expm1 = c > 30.0 ? c + std::log1p(-std::exp(-c))
                                    : std::log(std::expm1(c));
  const double log_t = log_expm1 / p.alpha();
  if (log_t >= std::log(std::numeric_limits<double>::max())) {
    return std::numeric_limits<double>::max();
  }
  double x = std::max(0.0, std::ceil(std::exp(log_t) - 1.0));
  if (x < kExactIntegerLimit) {
    // The closed-form root can be off by one ulp-induced step either way.
    while (x > 0.0 && reached(x - 1.0)) {
      x -= 1.0;
    }
    while (!reached(x)) {
      x += 1.0;
    }
  }
  return x;
}

Sample sample_dburr_by_quantile(SeededGenerator& gen, const DBurrParams& p,
                                std::size_t n) {
  if (n == 0) {
    throw DomainError("sample_dburr_by_quantile: n must be positive");
  }
  std::vector<double> values(n);
  for (auto& v : values) {
    v = dburr_quantile(gen.uniform_open(), p);
  }
  return Sample(std::move(values));
}

void write_sample_csv(const std::filesystem::path& path, const Sample& sample,
                      std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << "# seed=" << seed << '\n' << "x\n";
  char buf[400];
  for (double v : sample.values()) {
    const auto res =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 0);
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

SampleFile read_sample_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::vector<double> values;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      const auto pos = line.find("seed=");
      if (pos != std::string::npos) {
        const char* first = line.data() + pos + 5;
        const char* last = line.data() + line.size();
        if (std::from_chars(first, last, seed).ec == std::errc{}) {
          has_seed = true;
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "x") {
        throw DomainError(path.string() + ": expected header 'x', found '" +
                          line + "'");
      }
      header_seen = true;
      continue;
    }
    double v = 0.0;
    const char* last = line.data() + line.size();
    const auto res = std::from_chars(line.data(), last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
      throw DomainError(path.string() + ":" + std::to_string(line_no) +
                        ": not a number: '" + line + "'");
    }
    values.push_back(v);
  }
  if (!header_seen) {
    throw DomainError(path.string() + ": missing 'x' header");
  }
  return SampleFile{Sample(std::move(values)), seed, has_seed};
}

}  // namespace dburr
