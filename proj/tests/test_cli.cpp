#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace randsub;
using randsub::io::Json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
  Json record() const { return Json::parse(out); }
};

Outcome run(std::vector<std::string> args, cli::Environment env = {}) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err, std::move(env));
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string data(const std::string& name) { return std::string(RANDSUB_DATA_DIR) + "/" + name; }

}  // namespace

TEST(Cli, CapacityOfTriangle) {
  const Outcome o = run({"capacity", "--graph", "k3"});
  ASSERT_EQ(o.code, 0) << o.err;
  const Json r = o.record();
  EXPECT_NEAR(r["value"].get<double>(), 2.0 / 3.0, 1e-11);
  EXPECT_EQ(r["method"], "CLOSED_FORM");
  EXPECT_TRUE(r["exact"].get<bool>());
  EXPECT_EQ(r["seed_source"], "default");
  EXPECT_EQ(r["seed"], kDefaultSeed);
  EXPECT_EQ(r["config"]["graph"], "k3");
}

TEST(Cli, CapacityFromFileAndMethods) {
  const Outcome numeric = run({"capacity", "--graph", data("c5_symmetric.json"), "--method", "numeric"});
  ASSERT_EQ(numeric.code, 0) << numeric.err;
  EXPECT_NEAR(numeric.record()["value"].get<double>(), 0.5, 1e-9);
  EXPECT_FALSE(numeric.record()["exact"].get<bool>());
  const Outcome enumerated = run({"capacity", "--graph", "k3", "--method", "enum", "--grid", "12"});
  ASSERT_EQ(enumerated.code, 0);
  EXPECT_NEAR(enumerated.record()["value"].get<double>(), 2.0 / 3.0, 1e-9);
  const Outcome closed = run({"capacity", "--graph", data("c5_symmetric.json"), "--method", "closed"});
  EXPECT_EQ(closed.code, 0);
}

TEST(Cli, RankOfTournament) {
  const Outcome o = run({"rank", "--graph", "t5"});
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.record()["ranks"], Json({4, 3, 2, 1, 0}));
  const Outcome c = run({"rank", "--graph", "c3"});
  EXPECT_EQ(c.record()["longest_path"], "cycle");
}

TEST(Cli, HomSearch) {
  const Outcome yes = run({"hom", "--source", "s5", "--target", "k3"});
  EXPECT_TRUE(yes.record()["exists"].get<bool>());
  const Outcome no = run({"hom", "--source", "s5", "--target", "k2"});
  EXPECT_FALSE(no.record()["exists"].get<bool>());
  EXPECT_TRUE(no.record()["assignment"].is_null());
}

TEST(Cli, SimulateCertainEdges) {
  const Outcome o = run({"simulate-threshold", "--edge-prob", "1.0", "--p", "3", "--window", "8", "--trials", "10"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.record()["mu_path"].get<double>(), 1.0);
}

TEST(Cli, SimulateModelWritesCsv) {
  const auto csv = std::filesystem::temp_directory_path() / "randsub_cli_test.csv";
  const Outcome o = run({"simulate-threshold", "--model", data("order_p3.json"), "--p", "3", "--window", "12",
                         "--trials", "50", "--csv", csv.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.record()["mu_path"].get<double>(), 0.0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "trial,longest_path,has_path_ge_p");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 50u);
  const Outcome stdout_csv = run({"simulate-threshold", "--model", data("order_p3.json"), "--p", "3", "--window",
                                  "12", "--trials", "5", "--format", "csv"});
  EXPECT_EQ(stdout_csv.out.substr(0, header.size()), header);
}

TEST(Cli, ModelProbe) {
  const Outcome order = run({"model-probe", "--model", data("order_p3.json"), "--event", "order:0,5"});
  ASSERT_EQ(order.code, 0) << order.err;
  EXPECT_NEAR(order.record()["probability"].get<double>(), 1.0 / 3.0, 1e-11);
  const Outcome eq = run({"model-probe", "--model", data("mixture.json"), "--equal"});
  EXPECT_NEAR(eq.record()["probability"].get<double>(), 0.5 * 0.5 + 0.5 * 0.82, 1e-11);
  const Outcome marg = run({"model-probe", "--model", data("atoms.json"), "--marginal", "0,2"});
  EXPECT_EQ(marg.record()["probabilities"], Json({0.5, 0.0, 0.0, 0.5}));
  EXPECT_EQ(run({"model-probe", "--model", data("atoms.json"), "--equal"}).code, 1);
  EXPECT_EQ(run({"model-probe", "--model", data("atoms.json")}).code, 1);
}

TEST(Cli, RamseyExtractAndInfeasibleExit) {
  const std::vector<std::string> base{"ramsey-extract", "--fn",  data("alternating_fn.json"), "--metric",
                                      data("alternating_points.json"), "--k", "2", "--eps", "0.5"};
  auto with_size = [&](const std::string& s) {
    auto a = base;
    a.insert(a.end(), {"--size", s});
    return a;
  };
  const Outcome ok = run(with_size("4"));
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(ok.record()["verified"].get<bool>());
  EXPECT_EQ(ok.record()["J"].size(), 4u);
  const Outcome too_big = run(with_size("12"));
  EXPECT_EQ(too_big.code, 2);
  EXPECT_EQ(too_big.record()["status"], "infeasible");
  EXPECT_GE(too_big.record()["max_achievable"].get<std::size_t>(), 4u);
  auto wrong_k = with_size("3");
  wrong_k[6] = "3";
  EXPECT_EQ(run(wrong_k).code, 1);
}

TEST(Cli, IntersectNeqRows) {
  const Outcome o = run({"intersect", "--sets", data("neq_rows.json"), "--mu", data("uniform64.json"), "--lambda",
                         "0.5", "--eps", "1", "--size", "3"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.record()["achieved_measure"].get<double>(), 0.0);
}

TEST(Cli, SeedPrecedenceFlagEnvDefault) {
  const cli::Environment env{std::string("17")};
  const Json from_env = run({"capacity", "--graph", "c5", "--method", "numeric"}, env).record();
  EXPECT_EQ(from_env["seed"], 17u);
  EXPECT_EQ(from_env["seed_source"], "env");
  const Json from_flag = run({"capacity", "--graph", "c5", "--method", "numeric", "--seed", "3"}, env).record();
  EXPECT_EQ(from_flag["seed"], 3u);
  EXPECT_EQ(from_flag["seed_source"], "flag");
  EXPECT_EQ(run({"capacity", "--graph", "k3"}, cli::Environment{std::string("x1")}).code, 1);
}

TEST(Cli, ByteIdenticalReports) {
  const std::vector<std::string> args{"simulate-threshold", "--edge-prob", "0.6", "--p", "2", "--window", "8",
                                      "--trials", "200", "--seed", "42"};
  EXPECT_EQ(run(args).out, run(args).out);
  const std::vector<std::string> cap{"capacity", "--graph", "c5", "--method", "numeric"};
  EXPECT_EQ(run(cap).out, run(cap).out);
}

TEST(Cli, ErrorsExitOneWithLineLocatedMessage) {
  const Outcome bad = run({"capacity", "--graph", data("bad_graph.json")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("line 6"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"capacity", "--graph", "no-such-graph"}).code, 1);
  EXPECT_EQ(run({"capacity"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
}

TEST(Cli, TextFormatAndHelp) {
  const Outcome t = run({"rank", "--graph", "t3", "--format", "text"});
  EXPECT_NE(t.out.find("ranks: [2,1,0]"), std::string::npos) << t.out;
  EXPECT_EQ(run({"--help"}).code, 0);
}
