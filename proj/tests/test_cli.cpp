#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli_commands.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "cvbell");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cvbell::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cvbell_test_" + name);
}

}  // namespace

TEST(CliCorrelate, ParityIsOne) {
  const auto r = run({"correlate", "--profile", "parity", "--nmean", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], "n_mean,profile,method,qa,pa,qb,pb,E,abs_E,error,converged");
  EXPECT_NE(l[1].find(",1,1,"), std::string::npos) << l[1];
}

TEST(CliCorrelate, VacuumParityInversionIsZero) {
  const auto r = run({"correlate", "--profile", "rinv", "--nmean", "0", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["E"].get<double>(), 0.0, 1e-15);
  EXPECT_NEAR(j["abs_E"].get<double>(), 0.0, 1e-15);
  EXPECT_NE(r.err.find("sign"), std::string::npos);
}

TEST(CliCorrelate, ClosedFormAtShift) {
  const auto r = run({"correlate", "--method", "closed", "--alpha", "0.1", "--beta", "0.1", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out)["abs_E"].get<double>(), 0.96921140283124049, 1e-12);
}

TEST(CliCorrelate, UsageErrors) {
  const auto neg = run({"correlate", "--nmean", "-1"});
  EXPECT_EQ(neg.code, 2);
  EXPECT_FALSE(neg.err.empty());
  EXPECT_EQ(run({"correlate", "--profile", "banana"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"correlate", "--profile", "sign", "--epsilon", "-1"}).code, 2);
  EXPECT_EQ(run({"correlate", "--method", "closed", "--alpha", "0,0.2"}).code, 2);
  EXPECT_EQ(run({"correlate", "--alpha", "x"}).code, 2);
  EXPECT_EQ(run({"scan", "--d-steps", "0"}).code, 2);
  EXPECT_EQ(run({"scan", "--d-min", "1", "--d-max", "0"}).code, 2);
}

TEST(CliScan, GoldenTwoByTwo) {
  const auto r = run({"scan", "--method", "closed", "--nmean-min", "1", "--nmean-max", "10", "--nmean-steps", "2",
                      "--d-min", "0", "--d-max", "0.1", "--d-steps", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(std::filesystem::path(CVBELL_GOLDEN_DIR) / "scan_2x2.csv"));
  EXPECT_EQ(lines(r.out).size(), 5u);
}

TEST(CliScan, PeakRowAndViolationFilter) {
  const auto r = run({"scan", "--nmean-min", "10", "--nmean-max", "10", "--nmean-steps", "1", "--d-min", "0.1049",
                      "--d-max", "0.1049", "--d-steps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 2u);
  double d, n, b;
  int ok;
  ASSERT_EQ(std::sscanf(l[1].c_str(), "%lf,%lf,%lf,%d", &d, &n, &b, &ok), 4);
  EXPECT_NEAR(std::abs(b), 2.1239, 1e-4);
  EXPECT_EQ(ok, 1);

  const auto filtered = run({"scan", "--method", "closed", "--nmean-min", "10", "--nmean-max", "10", "--nmean-steps",
                             "1", "--d-steps", "61", "--only-violations"});
  ASSERT_EQ(filtered.code, 0);
  const auto fl = lines(filtered.out);
  ASSERT_GT(fl.size(), 1u);
  EXPECT_LT(fl.size(), 62u);
  for (std::size_t i = 1; i < fl.size(); ++i) {
    ASSERT_EQ(std::sscanf(fl[i].c_str(), "%lf,%lf,%lf,%d", &d, &n, &b, &ok), 4);
    EXPECT_GT(std::abs(b), 2.0);
  }
}

TEST(CliScan, DeterministicFiles) {
  const auto a = temp_file("scan_a.csv");
  const auto b = temp_file("scan_b.csv");
  const std::vector<std::string> base{"scan", "--kind", "complex", "--nmean-min", "1", "--nmean-max", "3",
                                      "--nmean-steps", "2", "--d-steps", "4", "--d-max", "0.3", "--seed", "9"};
  auto with_output = [&](const std::filesystem::path& p) {
    auto args = base;
    args.push_back("--output");
    args.push_back(p.string());
    return args;
  };
  ASSERT_EQ(run(with_output(a)).code, 0);
  ASSERT_EQ(run(with_output(b)).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(lines(slurp(a)).size(), 9u);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(CliScan, JsonMirrorsCsv) {
  const auto r = run({"scan", "--method", "closed", "--nmean-min", "1", "--nmean-max", "10", "--nmean-steps", "2",
                      "--d-min", "0", "--d-max", "0.1", "--d-steps", "2", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 4u);
  EXPECT_EQ(j["rows"][1]["d"].get<double>(), 0.1);
  EXPECT_EQ(j["rows"][1]["n_mean"].get<double>(), 1.0);
  EXPECT_TRUE(j["rows"][1].contains("B"));
  EXPECT_TRUE(j["rows"][1]["converged"].get<bool>());
}

TEST(CliScan, ConfigFileBeneathFlags) {
  const auto cfg = temp_file("config.ini");
  {
    std::ofstream out(cfg);
    out << "# scan settings\nmethod=closed\nnmean-min=10\nnmean-max=10\nnmean-steps=1\nd-steps=3\nd-max=0.2\n";
  }
  const auto r = run({"scan", "--config", cfg.string(), "--d-steps", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[2].rfind("0.2,10,", 0), 0u) << l[2];
  std::filesystem::remove(cfg);
}

TEST(CliLhv, SignPasses) {
  const auto r = run({"lhv", "--profile", "sign", "--settings", "40"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST(CliLhv, ParityInversionRejected) {
  const auto r = run({"lhv", "--profile", "rinv"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bounded"), std::string::npos);
  EXPECT_EQ(run({"lhv", "--profile", "tanh", "--s", "5"}).code, 2);
  EXPECT_EQ(run({"lhv", "--profile", "tanh", "--s", "5", "--epsilon", "1", "--settings", "10"}).code, 0);
}

TEST(CliLhv, MonteCarloReproducible) {
  const std::vector<std::string> args{"lhv", "--profile", "sign", "--count", "1000000", "--seed", "7",
                                      "--settings", "8"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(CliOracle, ExitCodes) {
  const auto ok = run({"oracle", "--profile", "rinv", "--settings", "3", "--kind", "real"});
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  const auto strict = run({"oracle", "--profile", "rinv", "--settings", "2", "--tol", "1e-15"});
  EXPECT_EQ(strict.code, 1);
  EXPECT_NE(strict.err.find("max discrepancy"), std::string::npos);
  EXPECT_EQ(run({"oracle", "--settings", "0"}).code, 2);
}
