#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace bazykin;
using bazykin::cli::run_cli;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

const std::vector<std::string> kFig5 = {"--C", "0.363", "--M", "0.16", "--N", "0.25"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, EquilibriaJson) {
  const auto r = run(cat({"equilibria", "--Q", "1.8", "--no-meta"}, kFig5));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["kind"], "equilibria");
  EXPECT_FALSE(j.contains("generated_at"));
  const auto rep = from_document<EquilibriaReport>(j, "equilibria");
  EXPECT_EQ(rep, equilibria_report({0.363, 0.16, 0.25, 1.8}));
  int interior = 0;
  for (const auto& e : rep.equilibria)
    interior += e.equilibrium.kind == EquilibriumKind::P1 || e.equilibrium.kind == EquilibriumKind::P2;
  EXPECT_EQ(interior, 2);
}

TEST(Cli, SweepSnCsv) {
  const auto r = run({"sweep-sn", "--M", "0.16", "--N", "0.25", "--C", "0.203:0.9:0.01", "--no-meta"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_GT(rows.size(), 60u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"C", "Q_SN"}));
  bool found = false;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (std::abs(parse_number(rows[k][0]) - 0.363) > 1e-12) continue;
    found = true;
    EXPECT_NEAR(parse_number(rows[k][1]), 1.8281, 5e-5);
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(r.out.find('\n'), r.out.find("\r\n") + 1);
}

TEST(Cli, BogdanovTakensJson) {
  const auto r = run({"bt", "--M", "0.16", "--N", "0.25", "--no-meta"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json d = Json::parse(r.out)["data"]["bt"];
  for (const char* g : {"G1", "G2", "G3", "G4"}) EXPECT_NE(d[g].get<double>(), 0.0) << g;
  EXPECT_EQ(run({"bt", "--M", "0.3", "--N", "0.25"}).code, 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 64);
  EXPECT_EQ(run({"nonsense"}).code, 64);
  EXPECT_EQ(run(cat({"equilibria", "--Q", "abc"}, kFig5)).code, 64);
  EXPECT_EQ(run(cat({"equilibria", "--Q", "1.8", "--bogus"}, kFig5)).code, 64);
  EXPECT_EQ(run(cat({"equilibria", "--Q", "1.8", "--format", "xml"}, kFig5)).code, 64);
  EXPECT_EQ(run({"equilibria", "--C", "0.363"}).code, 64);
  EXPECT_EQ(run({"sweep-sn", "--M", "0.16", "--N", "0.25", "--C", "0.9:0.2:0.1"}).code, 64);
  EXPECT_EQ(run(cat({"equilibria", "--Q", "-1"}, kFig5)).code, 2);
  EXPECT_EQ(run(cat({"classify", "--Q", "1.695", "--kind", "P1"}, kFig5)).code, 3);
  const auto usage = run({"equilibria", "--bogus"});
  EXPECT_NE(usage.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, HomoclinicFoundAndNotFound) {
  const auto ok = run(cat({"homoclinic", "--Q-lo", "1.695", "--Q-hi", "1.705", "--no-meta"}, kFig5));
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto rep = from_document<HomoclinicReport>(Json::parse(ok.out), "homoclinic");
  EXPECT_NEAR(rep.Q_hom, 1.70, 0.005);
  EXPECT_LT(std::abs(rep.separation), 1e-6);
  EXPECT_EQ(run(cat({"homoclinic", "--Q-lo", "1.71", "--Q-hi", "1.8"}, kFig5)).code, 3);
}

TEST(Cli, UnwritablePaths) {
  EXPECT_EQ(run(cat({"equilibria", "--Q", "1.8", "--out", "/nonexistent-dir/a.json"}, kFig5)).code, 74);
  EXPECT_EQ(run(cat({"cycles", "--Q", "1.705", "--svg", "/nonexistent-dir/a.svg"}, kFig5)).code, 74);
  EXPECT_EQ(run({"equilibria", "--config", "/nonexistent-dir/run.cfg"}).code, 74);
}

TEST(Cli, ClassifyRegionAndStability) {
  const auto region = run(cat({"classify", "--Q", "1.71", "--no-meta"}, kFig5));
  ASSERT_EQ(region.code, 0) << region.err;
  EXPECT_EQ(Json::parse(region.out)["data"]["region"], "UnstableCycleAroundP2");
  const auto p2 = run(cat({"classify", "--Q", "1.695", "--kind", "P2", "--no-meta"}, kFig5));
  ASSERT_EQ(p2.code, 0) << p2.err;
  EXPECT_EQ(Json::parse(p2.out)["data"]["equilibrium"]["stability"]["tag"], "StableFocus");
  EXPECT_EQ(run(cat({"classify", "--Q", "1.695", "--kind", "P9"}, kFig5)).code, 2);
}

TEST(Cli, ConfigFileMergesAndCommandLineWins) {
  const auto cfg = temp("bazykin_cli_test.cfg");
  {
    std::ofstream f(cfg);
    f << "# Fig. 5 values\ncommand = equilibria\nC = 0.363\nM = 0.16  # predator death\n--N = 0.25\nQ = 1.6\n"
         "no-meta = true\n";
  }
  const auto a = run({"--config", cfg.string(), "--Q", "1.8"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto rep = from_document<EquilibriaReport>(Json::parse(a.out), "equilibria");
  EXPECT_EQ(rep.params, (Params{0.363, 0.16, 0.25, 1.8}));
  const auto b = run(cat({"equilibria", "--Q", "1.8", "--no-meta"}, kFig5));
  EXPECT_EQ(a.out, b.out);
  {
    std::ofstream f(cfg);
    f << "command = equilibria\nthis line is broken\n";
  }
  EXPECT_EQ(run({"--config=" + cfg.string()}).code, 64);
  std::filesystem::remove(cfg);
}

TEST(Cli, DeterministicOutput) {
  const std::vector<std::string> args = {"basin",  "--C",    "0.363", "--M",       "0.16", "--N",  "0.25",
                                         "--Q",    "1.695",  "--nu",  "12",        "--nv", "9",    "--v-range",
                                         "0:0.6",  "--no-meta"};
  const auto one = run(cat(args, {"--threads", "1"}));
  const auto four = run(cat(args, {"--threads", "4"}));
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, four.out);
  setenv("BAZYKIN_THREADS", "2", 1);
  EXPECT_EQ(run(args).out, one.out);
  unsetenv("BAZYKIN_THREADS");
  const auto rows = parse_csv(one.out);
  ASSERT_EQ(rows.size(), 12u * 9u + 1u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"u", "v", "label"}));
  const auto json = run(cat(args, {"--format", "json"}));
  EXPECT_EQ(json.out, run(cat(args, {"--format", "json"})).out);
}

TEST(Cli, MetaTimestampOnlyWithoutNoMeta) {
  const auto j = run(cat({"equilibria", "--Q", "1.8"}, kFig5));
  EXPECT_TRUE(Json::parse(j.out).contains("generated_at"));
  const auto c = run({"phase", "--C", "0.363", "--M", "0.16", "--N", "0.25", "--Q", "1.695", "--u0", "0.5", "--v0",
                      "0.5", "--t-end", "10"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out.rfind("# generated_at: ", 0), 0u);
  const auto rows = parse_csv(c.out.substr(c.out.find("\r\n") + 2));
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "u", "v"}));
}

TEST(Cli, SvgOutput) {
  const auto svg = temp("bazykin_cli_test.svg");
  const auto r = run(cat({"cycles", "--Q", "1.705", "--svg", svg.string(), "--no-meta"}, kFig5));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(svg).rfind("<svg", 0), 0u);
  std::filesystem::remove(svg);
  EXPECT_EQ(run(cat({"equilibria", "--Q", "1.8", "--svg", svg.string()}, kFig5)).code, 64);
}

TEST(Cli, OutputFile) {
  const auto path = temp("bazykin_cli_test.json");
  const auto r = run(cat({"cycles", "--Q", "1.705", "--out", path.string(), "--no-meta"}, kFig5));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const Json j = Json::parse(slurp(path));
  ASSERT_EQ(j["data"]["cycles"].size(), 1u);
  EXPECT_EQ(j["data"]["cycles"][0]["stable"], false);
  std::filesystem::remove(path);
}

TEST(Cli, DimensionalParameters) {
  const auto a = run({"equilibria", "--dimensional", "1", "1", "1.6", "0.5", "0.363", "0.16", "0.125", "--no-meta"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto rep = from_document<EquilibriaReport>(Json::parse(a.out), "equilibria");
  EXPECT_EQ(rep.params, nondimensionalize({1, 1, 1.6, 0.5, 0.363, 0.16, 0.125}));
  EXPECT_EQ(run({"equilibria", "--dimensional", "1", "1", "1"}).code, 64);
}

// Every subcommand's JSON parses back to the document it was rendered from.
TEST(Cli, JsonProductsRoundTrip) {
  const std::vector<std::vector<std::string>> cases = {
      cat({"equilibria", "--Q", "1.8"}, kFig5),
      cat({"classify", "--Q", "1.71"}, kFig5),
      cat({"classify", "--Q", "1.8", "--kind", "Origin"}, kFig5),
      {"sweep-sn", "--M", "0.16", "--N", "0.25", "--C", "0.3:0.8:0.1"},
      {"hopf-curve", "--C", "0.363", "--M", "0.16", "--grid-n", "40"},
      {"bautin", "--C", "0.363", "--M", "0.16"},
      {"bt", "--M", "0.16", "--N", "0.25"},
      cat({"cycles", "--Q", "1.705"}, kFig5),
      cat({"homoclinic", "--Q-lo", "1.695", "--Q-hi", "1.705"}, kFig5),
      cat({"basin", "--Q", "1.695", "--nu", "5", "--nv", "4"}, kFig5),
      cat({"phase", "--Q", "1.695", "--u0", "0.3", "--v0", "0.22", "--t-end", "5"}, kFig5),
      {"diagram", "--M", "0.16", "--N", "0.25", "--Q", "1:3:0.01", "--C", "0.6:0.8:0.1", "--region-n", "2"},
  };
  for (auto args : cases) {
    const std::string name = args[0];
    args.insert(args.end(), {"--format", "json", "--no-meta"});
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << name << ": " << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["kind"], name);
    EXPECT_EQ(dump(j), r.out) << name;
  }
}
