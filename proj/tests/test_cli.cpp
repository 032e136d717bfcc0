#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "finsler/cli.hpp"

using namespace finsler;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
  json j() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "finsler");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("finsler_test_" + name)).string();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(CliEval, Values) {
  auto r = run({"eval", "--metric", "construct:0:euclidean:euclidean", "--x", "0,0", "--y", "0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.j()["F"].get<double>(), 1.0, 1e-14);
  r = run({"eval", "--metric", "catalog:funk", "--x", "0.5,0", "--y", "0,1"});
  EXPECT_NEAR(r.j()["F"].get<double>(), 1.1547005, 1e-7);
  r = run({"eval", "--metric", "catalog:bryant:0.5236", "--x", "0,0", "--y", "1,0"});
  EXPECT_NEAR(r.j()["F"].get<double>(), std::cos(0.5236), 1e-14);
  EXPECT_NEAR(r.j()["F"].get<double>(), 0.8660254, 1e-4);
}

TEST(CliEval, WarnsWhenNotProjectivelyFlat) {
  const auto r = run({"eval", "--metric", "test:broken", "--x", "0.1,0.2", "--y", "1,0.5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.j().contains("warning"));
}

TEST(CliVerify, Berwald) {
  const auto r = run({"verify", "--metric", "catalog:berwald", "--checks", "hamel,curvature", "--radius", "0.5",
                      "--samples", "50", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.j();
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_LE(j["reports"][1]["max_residual"].get<double>(), 1e-4);
}

TEST(CliVerify, DoubleSquareRootConstruction) {
  const auto r = run({"verify", "--metric", "construct:1:dsr-b:1,1:dsr-a:1,1", "--checks", "hamel,curvature",
                      "--radius", "0.2", "--samples", "20", "--tol-override", "curvature=1e-3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.j()["reports"][1]["max_residual"].get<double>(), 1e-3);
}

TEST(CliVerify, BrokenMetricFails) {
  const auto r = run({"verify", "--metric", "test:broken", "--checks", "hamel"});
  EXPECT_EQ(r.code, 1);
  EXPECT_GT(r.j()["reports"][0]["max_residual"].get<double>(), 1e-3);
  EXPECT_FALSE(r.j()["reports"][0]["failures"].empty());
}

TEST(CliVerify, Deterministic) {
  const std::vector<std::string> args{"verify", "--metric", "catalog:funk", "--checks", "hamel,curvature,geodesic",
                                      "--samples", "30", "--seed", "5"};
  setenv("FINSLER_THREADS", "1", 1);
  const auto a = run(args);
  setenv("FINSLER_THREADS", "4", 1);
  const auto b = run(args);
  unsetenv("FINSLER_THREADS");
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run({"verify", "--metric", "catalog:funk", "--checks", "hamel,curvature,geodesic", "--samples",
                        "30", "--seed", "6"})
                       .out);
}

TEST(CliCompare, ConstructionsMatchCatalog) {
  auto r = run({"compare", "--metric", "construct:0:euclidean:euclidean", "--metric", "catalog:berwald", "--radius",
                "0.4", "--samples", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.j()["max_rel_diff"].get<double>(), 1e-9);
  r = run({"compare", "--metric", "construct:-1:euclidean:zero", "--metric", "catalog:space-form:-1", "--radius",
           "0.4", "--samples", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.j()["max_rel_diff"].get<double>(), 1e-9);
  r = run({"compare", "--metric", "construct:1:bryant:0.5236", "--metric", "catalog:bryant:0.5236", "--radius", "0.3",
           "--samples", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.j()["max_rel_diff"].get<double>(), 1e-8);
  EXPECT_TRUE(r.j().contains("worst_point"));
}

TEST(CliCompare, DifferentMetricsFail) {
  const auto r = run({"compare", "--metric", "catalog:funk", "--metric", "catalog:berwald"});
  EXPECT_EQ(r.code, 1);
  EXPECT_GT(r.j()["max_rel_diff"].get<double>(), 1e-3);
}

TEST(CliSample, ConstantForFlatMetric) {
  const auto path = temp_path("flat.csv");
  const auto r = run({"sample", "--metric", "construct:0:euclidean:zero", "--grid", "x1=-0.1:0.1:3", "--grid",
                      "x2=-0.1:0.1:3", "--y", "0.6,0.8", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(path);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x1", "x2", "y1", "y2", "F", "P", "K"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][4], "1");
  std::remove(path.c_str());
}

TEST(CliSample, FunkGridRowCountAndRoundTrip) {
  const auto path = temp_path("funk.csv");
  const auto r = run({"sample", "--metric", "catalog:funk", "--grid", "x1=-0.5:0.5:21", "--grid", "x2=-0.5:0.5:21",
                      "--y", "0,1", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.j()["rows"], 441);
  const auto rows = read_csv(path);
  ASSERT_EQ(rows.size(), 442u);
  const auto m = parse_metric("catalog:funk");
  for (std::size_t i = 1; i < rows.size(); i += 17) {
    const Vec x{std::stod(rows[i][0]), std::stod(rows[i][1])}, y{std::stod(rows[i][2]), std::stod(rows[i][3])};
    EXPECT_NEAR(std::stod(rows[i][4]), m.eval(x, y), 1e-12);
    EXPECT_NEAR(std::stod(rows[i][6]), -0.25, 1e-4);
  }
  std::remove(path.c_str());
}

TEST(CliSample, ZhouCurvatureColumnIsConstant) {
  const auto path = temp_path("zhou.csv");
  const auto r = run({"sample", "--metric", "catalog:zhou:0.3,0.5,+", "--grid", "x1=0:0.5:11", "--y", "0.6,0.8",
                      "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(path);
  ASSERT_EQ(rows.size(), 12u);
  const double k0 = std::stod(rows[1][6]);
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_NEAR(std::stod(rows[i][6]), k0, 1e-4);
  std::remove(path.c_str());
}

TEST(CliSample, PointsOutsideTheDomainLeaveEmptyCells) {
  const auto r = run({"sample", "--metric", "catalog:funk", "--grid", "x1=0:1.2:4", "--y", "0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::stringstream ss(r.out);
  std::string line, last;
  int rows = 0;
  while (std::getline(ss, line)) {
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(last.substr(last.size() - 3), ",,,");
}

TEST(CliGeodesic, Straightness) {
  auto r = run({"geodesic", "--metric", "construct:0:euclidean:zero", "--x", "0.1,0.1", "--y", "1,2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.j()["collinearity"].get<double>(), 1e-15);
  r = run({"geodesic", "--metric", "catalog:funk", "--x", "0.1,0", "--y", "0,1"});
  EXPECT_LE(r.j()["collinearity"].get<double>(), 1e-8);
  const auto path = temp_path("bryant.csv");
  r = run({"geodesic", "--metric", "catalog:bryant:0.5235987755982988", "--x", "0.05,0.05", "--y", "1,-1", "--mode",
           "general", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(r.j()["collinearity"].get<double>(), 1e-8);
  EXPECT_EQ(read_csv(path).size(), 52u);
  std::remove(path.c_str());
}

TEST(CliCatalog, Lists) {
  const auto r = run({"catalog"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.j().size(), 9u);
}

TEST(CliErrors, ExitCodes) {
  auto r = run({"eval", "--metric", "catalog:nosuch", "--x", "0,0", "--y", "1,0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"]["type"], "parse");
  EXPECT_EQ(run({"eval", "--metric", "construct:2:euclidean:zero"}).code, 2);
  EXPECT_EQ(run({"eval", "--metric", "catalog:funk", "--x", "0.1", "--y", "1,0"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  r = run({"eval", "--metric", "catalog:funk", "--x", "1.5,0", "--y", "1,0"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(json::parse(r.err)["error"]["type"], "domain");
  r = run({"eval", "--metric", "construct:1:euclidean:zero", "--x", "0.3,0.1", "--y", "1,0", "--max-iter", "1"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(json::parse(r.err)["error"]["type"], "solver");
}

TEST(Descriptors, Parsing) {
  EXPECT_EQ(parse_metric("construct:1:dsr-b:1,2:dsr-a:1,2").dimension(), 3u);
  EXPECT_EQ(parse_metric("catalog:dsr-new:2,1").dimension(), 3u);
  EXPECT_EQ(parse_metric("construct:0:randers:0.1,0.2,0.3:zero").dimension(), 3u);
  EXPECT_EQ(parse_metric("catalog:funk", 4).dimension(), 4u);
  EXPECT_THROW(parse_metric("catalog:dsr-new:1,1", 3), ParseError);
  EXPECT_THROW(parse_metric("construct:0:scaled:euclidean"), ParseError);
  EXPECT_THROW(parse_metric("construct:0:euclidean"), ParseError);
  EXPECT_THROW(parse_metric("catalog:zhou:0.5,0.4,+"), ParseError);
  const auto sum = parse_metric("construct:0:euclidean:0.5*(euclidean)+0.25*(randers:0.1,0)");
  EXPECT_EQ(sum.name(), "construct:0:euclidean:0.5*(euclidean)+0.25*(randers:0.1,0)");
  for (const char* text : {"catalog:sph-k0:0.3,-", "catalog:zhou:0.5,1,+", "construct:-1:euclidean:scaled:0.3",
                           "catalog:space-form:-1", "test:broken"})
    EXPECT_EQ(parse_metric(text).name(), text);
}
