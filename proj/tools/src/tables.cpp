#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <sstream>
#include <string_view>
#include <thread>

#include "dburr/sampling.hpp"
#include "dburr_tools/commands.hpp"
#include "format.hpp"

namespace dburr::cli {

namespace {

struct CellOutcome {
  TableRow alpha_sq, alpha_abs, joint_sq, joint_abs;
  std::vector<std::string> warnings;
  std::exception_ptr error;
};

TableRow base_row(double theta, double alpha, const PosteriorSummary& sm, Loss loss,
                  std::uint64_t chain_seed, std::uint64_t data_seed) {
  TableRow r;
  r.theta_true = theta;
  r.alpha_true = alpha;
  r.alpha_hat = loss == Loss::squared ? sm.est_sq[0] : sm.est_abs[0];
  r.var_alpha = sm.variances[0];
  r.loss = loss;
  r.seed = chain_seed;
  r.data_seed = data_seed;
  return r;
}

TableRow joint_row(double theta, double alpha, const PosteriorSummary& sm, Loss loss,
                   std::uint64_t chain_seed, std::uint64_t data_seed) {
  TableRow r = base_row(theta, alpha, sm, loss, chain_seed, data_seed);
  r.theta_hat = loss == Loss::squared ? sm.est_sq[1] : sm.est_abs[1];
  r.var_theta = sm.variances[1];
  r.corr = sm.corr_alpha_theta;
  return r;
}

CellOutcome run_cell(const ExperimentConfig& config, double theta, double alpha,
                     std::size_t cell, const std::filesystem::path& sample_dir) {
  CellOutcome out;
  const CellSeeds seeds = cell_seeds(config.seed, cell);
  SeededGenerator gen(seeds.data);
  const Sample s = sample_dburr(gen, DBurrParams(alpha, theta), config.n);
  write_sample_csv(sample_dir / sample_file_name(theta, alpha), s, seeds.data);

  const std::string where =
      "cell (theta=" + format_full(theta) + ", alpha=" + format_full(alpha) + "): ";

  const FitResult a = fit_alpha_mh(s, theta, config.mh(seeds.alpha_chain));
  out.alpha_sq = base_row(theta, alpha, a.summary, Loss::squared, seeds.alpha_chain,
                          seeds.data);
  out.alpha_abs = base_row(theta, alpha, a.summary, Loss::absolute, seeds.alpha_chain,
                           seeds.data);
  for (const auto& w : a.warnings) out.warnings.push_back(where + "alpha-only: " + w);

  const FitResult j = fit_joint_mh(s, config.mh(seeds.joint_chain));
  out.joint_sq = joint_row(theta, alpha, j.summary, Loss::squared, seeds.joint_chain,
                           seeds.data);
  out.joint_abs = joint_row(theta, alpha, j.summary, Loss::absolute, seeds.joint_chain,
                            seeds.data);
  for (const auto& w : j.warnings) out.warnings.push_back(where + "joint: " + w);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_full(*v) : std::string();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
T field_value(std::string_view text, const std::string& where) {
  T value{};
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(text.data(), last, value);
  if (text.empty() || res.ec != std::errc{} || res.ptr != last) {
    throw IoError(where + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

std::optional<double> optional_value(std::string_view text, const std::string& where) {
  if (text.empty()) return std::nullopt;
  return field_value<double>(text, where);
}

}  // namespace

void write_table_csv(const std::filesystem::path& path,
                     const std::vector<TableRow>& rows) {
  std::ostringstream out;
  out << kTableHeader << '\n';
  for (const auto& r : rows) {
    out << format_full(r.theta_true) << ',' << format_full(r.alpha_true) << ','
        << format_full(r.alpha_hat) << ',' << optional_field(r.theta_hat) << ','
        << format_full(r.var_alpha) << ',' << optional_field(r.var_theta) << ','
        << optional_field(r.corr) << ','
        << (r.loss == Loss::squared ? "squared" : "absolute") << ',' << r.seed << ','
        << r.data_seed << '\n';
  }
  write_text(path, out.str());
}

std::vector<TableRow> read_table_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != kTableHeader) {
    throw IoError(path.string() + ": missing or unexpected table header");
  }
  std::vector<TableRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto f = split_fields(line);
    if (f.size() != 10) {
      throw IoError(where + ": expected 10 fields, got " + std::to_string(f.size()));
    }
    TableRow r;
    r.theta_true = field_value<double>(f[0], where);
    r.alpha_true = field_value<double>(f[1], where);
    r.alpha_hat = field_value<double>(f[2], where);
    r.theta_hat = optional_value(f[3], where);
    r.var_alpha = field_value<double>(f[4], where);
    r.var_theta = optional_value(f[5], where);
    r.corr = optional_value(f[6], where);
    if (f[7] == "squared") {
      r.loss = Loss::squared;
    } else if (f[7] == "absolute") {
      r.loss = Loss::absolute;
    } else {
      throw IoError(where + ": unknown loss '" + std::string(f[7]) + "'");
    }
    r.seed = field_value<std::uint64_t>(f[8], where);
    r.data_seed = field_value<std::uint64_t>(f[9], where);
    rows.push_back(r);
  }
  return rows;
}

std::string render_table(const std::vector<TableRow>& rows, const std::string& title) {
  std::vector<double> thetas, alphas;
  for (const auto& r : rows) {
    if (std::find(thetas.begin(), thetas.end(), r.theta_true) == thetas.end())
      thetas.push_back(r.theta_true);
    if (std::find(alphas.begin(), alphas.end(), r.alpha_true) == alphas.end())
      alphas.push_back(r.alpha_true);
  }
  const bool joint = !rows.empty() && rows.front().theta_hat.has_value();
  const auto lookup = [&](double t, double a) -> const TableRow* {
    for (const auto& r : rows)
      if (r.theta_true == t && r.alpha_true == a) return &r;
    return nullptr;
  };

  constexpr std::size_t kLabel = 22, kCol = 11;
  const auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  out << title << "\n\n" << std::string(kLabel, ' ');
  for (double a : alphas) out << pad("alpha=" + format_full(a), kCol);
  out << '\n';

  using Getter = std::optional<double> (*)(const TableRow&);
  std::vector<std::pair<const char*, Getter>> lines = {
      {"alpha_hat", [](const TableRow& r) -> std::optional<double> { return r.alpha_hat; }},
      {"var(alpha_hat)",
       [](const TableRow& r) -> std::optional<double> { return r.var_alpha; }},
  };
  if (joint) {
    lines.push_back({"theta_hat", [](const TableRow& r) { return r.theta_hat; }});
    lines.push_back({"var(theta_hat)", [](const TableRow& r) { return r.var_theta; }});
    lines.push_back({"corr(alpha, theta)", [](const TableRow& r) { return r.corr; }});
  }
  for (double t : thetas) {
    out << "theta=" << format_full(t) << '\n';
    for (const auto& [label, get] : lines) {
      std::string head = "  ";
      head += label;
      head.resize(kLabel, ' ');
      out << head;
      for (double a : alphas) {
        const TableRow* r = lookup(t, a);
        const auto v = r ? get(*r) : std::nullopt;
        out << pad(v ? format_fixed(*v) : "-", kCol);
      }
      out << '\n';
    }
  }
  return out.str();
}

TablesResult cmd_tables(const ExperimentConfig& config,
                        const std::filesystem::path& out_dir) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto sample_dir = out_dir / "samples";
  std::error_code ec;
  std::filesystem::create_directories(sample_dir, ec);
  if (ec || !std::filesystem::is_directory(sample_dir)) {
    throw IoError("cannot create directory '" + sample_dir.string() + "'");
  }

  const std::size_t n_alpha = config.alpha_grid.size();
  const std::size_t cells = config.theta_grid.size() * n_alpha;
  std::vector<CellOutcome> outcomes(cells);

  unsigned workers = config.threads != 0 ? config.threads
                                         : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells));

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t c = next++; c < cells; c = next++) {
      const double theta = config.theta_grid[c / n_alpha];
      const double alpha = config.alpha_grid[c % n_alpha];
      try {
        outcomes[c] = run_cell(config, theta, alpha, c, sample_dir);
      } catch (...) {
        outcomes[c].error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }

  TablesResult result;
  for (auto& o : outcomes) {
    if (o.error) std::rethrow_exception(o.error);
    result.alpha_squared.push_back(o.alpha_sq);
    result.alpha_absolute.push_back(o.alpha_abs);
    result.joint_squared.push_back(o.joint_sq);
    result.joint_absolute.push_back(o.joint_abs);
    for (auto& w : o.warnings) result.warnings.push_back(std::move(w));
  }

  struct Output {
    const char* stem;
    const std::vector<TableRow>* rows;
    const char* title;
  };
  const Output outputs[] = {
      {"table1_alpha_squared", &result.alpha_squared,
       "Alpha posterior, theta known, squared error loss"},
      {"table2_alpha_absolute", &result.alpha_absolute,
       "Alpha posterior, theta known, absolute error loss"},
      {"table3_joint_squared", &result.joint_squared,
       "Joint posterior, squared error loss"},
      {"table4_joint_absolute", &result.joint_absolute,
       "Joint posterior, absolute error loss"},
  };
  for (const auto& o : outputs) {
    write_table_csv(out_dir / (std::string(o.stem) + ".csv"), *o.rows);
    write_text(out_dir / (std::string(o.stem) + ".txt"), render_table(*o.rows, o.title));
  }
  write_text(out_dir / "config.txt", format_config(config));

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace dburr::cli
