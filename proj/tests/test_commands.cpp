#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "dburr/distribution.hpp"
#include "dburr/sampling.hpp"
#include "dburr_tools/commands.hpp"

namespace dburr::cli {
namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "dburr_test_commands" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig one_cell(double theta, double alpha, std::size_t n) {
  ExperimentConfig c;
  c.theta_grid = {theta};
  c.alpha_grid = {alpha};
  c.n = n;
  return c;
}

TEST(Config, DefaultsMatchStudyDesign) {
  const ExperimentConfig c;
  EXPECT_EQ(c.theta_grid, (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(c.alpha_grid, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(c.n, 25u);
  EXPECT_EQ(c.iters, 10000u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParseOverridesAndComments) {
  std::istringstream in(
      "# study\n"
      "theta_grid = 0.25, 0.5\n"
      "alpha_grid=3\n"
      "n = 40   # larger\n"
      "\n"
      "iters = 500\n"
      "burn_in = 50\n"
      "a = 2.5\n"
      "seed = 18446744073709551615\n");
  const ExperimentConfig c = parse_config(in);
  EXPECT_EQ(c.theta_grid, (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(c.alpha_grid, (std::vector<double>{3}));
  EXPECT_EQ(c.n, 40u);
  EXPECT_EQ(c.iters, 500u);
  EXPECT_EQ(c.burn_in, 50u);
  EXPECT_EQ(c.a, 2.5);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.kernel_shape, 10.0);
}

TEST(Config, FormatRoundTrips) {
  ExperimentConfig c;
  c.theta_grid = {0.1 + 0.2, 1.0 / 3.0};
  c.a = 0.7;
  c.seed = 99;
  std::istringstream in(format_config(c));
  const ExperimentConfig back = parse_config(in);
  EXPECT_EQ(back.theta_grid, c.theta_grid);
  EXPECT_EQ(back.a, c.a);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(format_config(back), format_config(c));
}

TEST(Config, Errors) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_THROW(parse("bogus = 1\n"), UsageError);
  EXPECT_THROW(parse("n = twenty\n"), UsageError);
  EXPECT_THROW(parse("n\n"), UsageError);
  EXPECT_THROW(parse("theta_grid = 0.1,,0.2\n"), UsageError);
  EXPECT_THROW(parse("n = -3\n"), UsageError);

  ExperimentConfig c;
  c.theta_grid = {1.2};
  EXPECT_THROW(c.validate(), UsageError);
  c = {};
  c.burn_in = c.iters;
  EXPECT_THROW(c.validate(), UsageError);
  c = {};
  c.alpha_grid.clear();
  EXPECT_THROW(c.validate(), UsageError);
  c = {};
  c.a = 0.0;
  EXPECT_THROW(c.validate(), UsageError);

  EXPECT_THROW(load_config("/nonexistent/dburr.cfg"), IoError);
}

TEST(ExitCodes, ByErrorKind) {
  EXPECT_EQ(exit_code_for(UsageError("x")), 1);
  EXPECT_EQ(exit_code_for(DomainError("x")), 2);
  EXPECT_EQ(exit_code_for(DegenerateDataError("x")), 2);
  EXPECT_EQ(exit_code_for(IoError("x")), 2);
  EXPECT_EQ(exit_code_for(ConvergenceError("x")), 2);
  EXPECT_EQ(exit_code_for(ConsistencyError("x")), 3);
}

TEST(CellSeeds, DistinctAndStable) {
  const CellSeeds a = cell_seeds(12345, 0);
  const CellSeeds b = cell_seeds(12345, 1);
  EXPECT_NE(a.data, a.alpha_chain);
  EXPECT_NE(a.alpha_chain, a.joint_chain);
  EXPECT_NE(a.data, b.data);
  EXPECT_EQ(a.data, derive_seed(12345, 0));
  EXPECT_EQ(b.joint_chain, derive_seed(12345, 5));
}

TEST(Simulate, RowCountAndSeed) {
  const auto dir = scratch_dir("rows");
  const auto files = cmd_simulate(one_cell(0.2, 2.0, 25), dir);
  ASSERT_EQ(files.size(), 1u);
  const SampleFile f = read_sample_csv(files[0]);
  EXPECT_EQ(f.sample.size(), 25u);
  EXPECT_TRUE(f.has_seed);
  EXPECT_EQ(f.seed, cell_seeds(12345, 0).data);
  for (double x : f.sample.values()) EXPECT_EQ(x, std::floor(x));
}

TEST(Simulate, OneFilePerCell) {
  const auto dir = scratch_dir("grid");
  const auto files = cmd_simulate(ExperimentConfig{}, dir);
  EXPECT_EQ(files.size(), 12u);
  EXPECT_TRUE(std::filesystem::exists(dir / sample_file_name(0.3, 4.0)));
}

TEST(Simulate, SameSeedByteIdentical) {
  const auto d1 = scratch_dir("det1");
  const auto d2 = scratch_dir("det2");
  const auto f1 = cmd_simulate(ExperimentConfig{}, d1);
  const auto f2 = cmd_simulate(ExperimentConfig{}, d2);
  ASSERT_EQ(f1.size(), f2.size());
  for (std::size_t i = 0; i < f1.size(); ++i) {
    EXPECT_EQ(slurp(f1[i]), slurp(f2[i]));
  }
  ExperimentConfig other;
  other.seed = 54321;
  const auto f3 = cmd_simulate(other, scratch_dir("det3"));
  EXPECT_NE(slurp(f1[0]), slurp(f3[0]));
}

TEST(Simulate, UnwritablePathNamesPath) {
  const auto dir = scratch_dir("blocked");
  const auto blocker = dir / "file";
  std::ofstream(blocker) << "x";
  try {
    cmd_simulate(one_cell(0.2, 2.0, 5), blocker / "sub");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("sub"), std::string::npos);
  }
}

TEST(Simulate, LargeCellMeanMatchesMoment) {
  const auto dir = scratch_dir("moment");
  const auto files = cmd_simulate(one_cell(0.2, 2.0, 100000), dir);
  const SampleFile f = read_sample_csv(files[0]);
  const auto v = f.sample.values();
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / (n - 1) / n);
  const double m1 = dburr_moment(1, DBurrParams(2.0, 0.2));
  EXPECT_LE(std::abs(mean - m1), 3 * se) << "mean " << mean << " moment " << m1;
}

class FitCommand : public ::testing::Test {
 protected:
  std::filesystem::path write_sample(const std::string& name, std::vector<double> xs) {
    const auto path = dir_ / name;
    write_sample_csv(path, Sample(std::move(xs)), 7);
    return path;
  }
  std::filesystem::path dir_ = scratch_dir("fit");
};

TEST_F(FitCommand, ClosedFormSingleObservationIsExact) {
  for (double x : {0.0, 1.0, 4.0, 30.0}) {
    FitRequest req;
    req.data = write_sample("one.csv", {x});
    req.method = FitMethod::closed_form;
    req.alpha = 1.5;
    std::ostringstream text;
    const FitReport r = cmd_fit(req, text);
    const double product = *r.find("theta_sq_product_raw");
    const double exact = *r.find("theta_sq_exact");
    EXPECT_NEAR(product, exact, 1e-12 * exact) << "x = " << x;
    EXPECT_NEAR(*r.find("log_normalizer_product"), *r.find("log_normalizer_exact"),
                1e-12 * std::abs(*r.find("log_normalizer_exact")) + 1e-12);
    EXPECT_NE(text.str().find("product-form"), std::string::npos);
    EXPECT_NE(text.str().find("exact"), std::string::npos);
  }
}

TEST_F(FitCommand, ClosedFormReportsBothColumnsForLargerSamples) {
  FitRequest req;
  req.data = write_sample("five.csv", {0, 1, 1, 3, 7});
  req.method = FitMethod::closed_form;
  req.alpha = 2.0;
  req.out = dir_ / "report.csv";
  std::ostringstream text;
  const FitReport r = cmd_fit(req, text);
  EXPECT_TRUE(r.find("theta_sq_rel_diff").has_value());
  EXPECT_TRUE(r.find("theta_abs_exact").has_value());
  const std::string csv = slurp(*req.out);
  EXPECT_EQ(csv.rfind("quantity,value\n", 0), 0u);
  EXPECT_NE(csv.find("theta_sq_exact,"), std::string::npos);
}

TEST_F(FitCommand, MissingRequiredParameterIsUsageError) {
  FitRequest req;
  req.data = write_sample("d.csv", {0, 1, 2});
  req.method = FitMethod::closed_form;
  std::ostringstream text;
  EXPECT_THROW(cmd_fit(req, text), UsageError);
  req.method = FitMethod::mh_alpha;
  EXPECT_THROW(cmd_fit(req, text), UsageError);
  req.method = FitMethod::mle;
  req.alpha = 1.0;
  req.theta = 0.5;
  EXPECT_THROW(cmd_fit(req, text), UsageError);
  EXPECT_THROW(parse_fit_method("bayes"), UsageError);
}

TEST_F(FitCommand, DegenerateDataPropagates) {
  FitRequest req;
  req.data = write_sample("zeros.csv", {0, 0, 0});
  req.method = FitMethod::mh_joint;
  std::ostringstream text;
  EXPECT_THROW(cmd_fit(req, text), DegenerateDataError);
}

TEST_F(FitCommand, MleNearTruthOnLargeSample) {
  SeededGenerator gen(2024);
  const Sample s = sample_dburr(gen, DBurrParams(2.0, 0.2), 20000);
  FitRequest req;
  req.data = dir_ / "big.csv";
  write_sample_csv(req.data, s, 2024);
  req.method = FitMethod::mle;
  std::ostringstream text;
  const FitReport r = cmd_fit(req, text);
  EXPECT_NEAR(*r.find("alpha"), 2.0, 0.15);
  EXPECT_NEAR(*r.find("theta"), 0.2, 0.15);
  EXPECT_EQ(*r.find("at_boundary"), 0.0);
}

TEST_F(FitCommand, MhJointReportsEverythingAndChain) {
  SeededGenerator gen(cell_seeds(12345, 0).data);
  const Sample s = sample_dburr(gen, DBurrParams(1.0, 0.1), 25);
  FitRequest req;
  req.data = dir_ / "cell.csv";
  write_sample_csv(req.data, s, 1);
  req.method = FitMethod::mh_joint;
  req.config.iters = 3000;
  req.config.burn_in = 300;
  req.chain_out = dir_ / "chain.csv";
  std::ostringstream text;
  const FitReport r = cmd_fit(req, text);
  for (const char* q : {"alpha_sq", "alpha_abs", "theta_sq", "theta_abs", "var_alpha",
                        "var_theta", "corr", "acceptance_rate"}) {
    EXPECT_TRUE(r.find(q).has_value()) << q;
  }
  const double th = *r.find("theta_sq");
  EXPECT_GT(th, 0.0);
  EXPECT_LT(th, 1.0);
  const std::string chain = slurp(*req.chain_out);
  EXPECT_EQ(chain.rfind("iter,alpha,theta,accepted\n", 0), 0u);
  EXPECT_EQ(std::count(chain.begin(), chain.end(), '\n'), 3001);

  std::ostringstream again;
  EXPECT_EQ(*cmd_fit(req, again).find("alpha_sq"), *r.find("alpha_sq"));
}

TEST(Pmf, CsvColumnsAgreeWithLibrary) {
  std::ostringstream out;
  cmd_pmf(2.0, 0.2, 5, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,pmf,log_pmf,survival,cdf,second_rate");
  int rows = 0;
  const DBurrParams p(2.0, 0.2);
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string cell;
    std::getline(fields, cell, ',');
    const double x = std::stod(cell);
    std::getline(fields, cell, ',');
    EXPECT_EQ(std::stod(cell), dburr_pmf(x, p));
    std::getline(fields, cell, ',');
    std::getline(fields, cell, ',');
    EXPECT_EQ(std::stod(cell), dburr_survival(x, p));
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_THROW(cmd_pmf(2.0, 1.5, 3, out), DomainError);
}

TEST(TableCsv, RoundTrip) {
  TableRow a;
  a.theta_true = 0.1;
  a.alpha_true = 1;
  a.alpha_hat = 1.0 / 3.0;
  a.var_alpha = 0.0829;
  a.seed = 18446744073709551615ULL;
  a.data_seed = 3;
  TableRow b = a;
  b.theta_hat = 0.0812;
  b.var_theta = 1e-5;
  b.corr = -0.2046;
  b.loss = Loss::absolute;
  const auto path = scratch_dir("csv") / "t.csv";
  write_table_csv(path, {a, b});
  const auto back = read_table_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].alpha_hat, a.alpha_hat);
  EXPECT_FALSE(back[0].theta_hat.has_value());
  EXPECT_FALSE(back[0].corr.has_value());
  EXPECT_EQ(back[0].seed, a.seed);
  EXPECT_EQ(back[1].theta_hat, b.theta_hat);
  EXPECT_EQ(back[1].corr, b.corr);
  EXPECT_EQ(back[1].loss, Loss::absolute);
  EXPECT_EQ(slurp(path).substr(0, std::string(kTableHeader).size()), kTableHeader);
}

TEST(TableCsv, MalformedInput) {
  const auto dir = scratch_dir("bad");
  std::ofstream(dir / "h.csv") << "a,b\n";
  EXPECT_THROW(read_table_csv(dir / "h.csv"), IoError);
  std::ofstream(dir / "f.csv") << kTableHeader << "\n0.1,1,2\n";
  EXPECT_THROW(read_table_csv(dir / "f.csv"), IoError);
  std::ofstream(dir / "l.csv") << kTableHeader << "\n0.1,1,2,,0.1,,,hinge,1,2\n";
  EXPECT_THROW(read_table_csv(dir / "l.csv"), IoError);
}

TEST(RenderTable, FourDecimalsPerThetaBlock) {
  TableRow r;
  r.theta_true = 0.1;
  r.alpha_true = 1;
  r.alpha_hat = 1.21204;
  r.var_alpha = 0.08291;
  TableRow s = r;
  s.alpha_true = 2;
  const std::string text = render_table({r, s}, "title");
  EXPECT_NE(text.find("1.2120"), std::string::npos);
  EXPECT_NE(text.find("0.0829"), std::string::npos);
  EXPECT_NE(text.find("alpha=2"), std::string::npos);
  EXPECT_NE(text.find("theta=0.1"), std::string::npos);
  EXPECT_EQ(text.find("corr"), std::string::npos);
}

class SmallTables : public ::testing::Test {
 protected:
  static ExperimentConfig config(unsigned threads) {
    ExperimentConfig c;
    c.theta_grid = {0.1, 0.3};
    c.alpha_grid = {1, 3};
    c.iters = 1500;
    c.burn_in = 150;
    c.threads = threads;
    return c;
  }
};

TEST_F(SmallTables, ShapeAndProvenance) {
  const auto dir = scratch_dir("tables_shape");
  const TablesResult r = cmd_tables(config(2), dir);
  ASSERT_EQ(r.alpha_squared.size(), 4u);
  ASSERT_EQ(r.joint_absolute.size(), 4u);
  for (const auto& row : r.alpha_squared) {
    EXPECT_FALSE(row.theta_hat || row.var_theta || row.corr);
    EXPECT_EQ(row.loss, Loss::squared);
  }
  for (const auto& row : r.joint_squared) {
    EXPECT_TRUE(row.theta_hat && row.var_theta && row.corr);
  }
  // Both losses come from the same chains.
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.alpha_squared[i].var_alpha, r.alpha_absolute[i].var_alpha);
    EXPECT_EQ(r.joint_squared[i].seed, r.joint_absolute[i].seed);
    EXPECT_EQ(r.joint_squared[i].var_theta, r.joint_absolute[i].var_theta);
  }
  // Cell order is theta-major.
  EXPECT_EQ(r.alpha_squared[1].theta_true, 0.1);
  EXPECT_EQ(r.alpha_squared[1].alpha_true, 3.0);
  EXPECT_EQ(r.alpha_squared[2].data_seed, cell_seeds(12345, 2).data);
  EXPECT_EQ(r.joint_squared[2].seed, cell_seeds(12345, 2).joint_chain);

  for (const char* f : {"table1_alpha_squared.csv", "table2_alpha_absolute.csv",
                        "table3_joint_squared.csv", "table4_joint_absolute.csv",
                        "table1_alpha_squared.txt", "table4_joint_absolute.txt",
                        "config.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto back = read_table_csv(dir / "table3_joint_squared.csv");
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[3].theta_hat, r.joint_squared[3].theta_hat);

  // The recorded data seed regenerates the stored sample.
  const SampleFile f = read_sample_csv(dir / "samples" / sample_file_name(0.3, 3.0));
  SeededGenerator gen(back[3].data_seed);
  const Sample s = sample_dburr(gen, DBurrParams(3.0, 0.3), 25);
  EXPECT_TRUE(std::equal(s.values().begin(), s.values().end(), f.sample.values().begin()));

  const ExperimentConfig cfg = load_config(dir / "config.txt");
  EXPECT_EQ(cfg.iters, 1500u);
  EXPECT_EQ(cfg.theta_grid, config(1).theta_grid);
}

TEST_F(SmallTables, IdenticalAcrossThreadCounts) {
  const auto d1 = scratch_dir("tables_t1");
  const auto d4 = scratch_dir("tables_t4");
  cmd_tables(config(1), d1);
  cmd_tables(config(4), d4);
  for (const char* f : {"table1_alpha_squared.csv", "table2_alpha_absolute.csv",
                        "table3_joint_squared.csv", "table4_joint_absolute.csv"}) {
    EXPECT_EQ(slurp(d1 / f), slurp(d4 / f)) << f;
  }
}

}  // namespace
}  // namespace dburr::cli
