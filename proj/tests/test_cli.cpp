#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "lagcut/instances.hpp"
#include "support/suite.hpp"

using namespace lagcut;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  std::map<std::string, std::string> kv;
  std::vector<std::string> files;
};

Run lagcut_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lagcut");
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  std::istringstream is(r.out);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = line.substr(0, eq);
    if (key == "file") r.files.push_back(line.substr(eq + 1));
    r.kv[key] = line.substr(eq + 1);
  }
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::path(testing::TempDir()) / ("lagcut-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path saved(const SipInstance& inst, const fs::path& dir) {
  const auto path = dir / (inst.name + ".sip");
  write_instance(inst, path);
  return path;
}

double num(const Run& r, const std::string& key) {
  const auto it = r.kv.find(key);
  if (it == r.kv.end()) throw std::runtime_error("missing key " + key);
  return it->second == "inf" ? kInf : it->second == "-inf" ? -kInf : std::stod(it->second);
}

}  // namespace

TEST(CliGenerate, SslpSuiteWritesThreeFiles) {
  const auto dir = scratch("gen-sslp");
  const auto r = lagcut_cli({"generate", "sslp", "--m", "3", "--n", "5", "--scenarios", "3", "--out", dir});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  ASSERT_EQ(r.files.size(), 3u);
  EXPECT_EQ(fs::path(r.files[0]).filename(), "sslp1-3-5-3.sip");
  for (const auto& f : r.files) EXPECT_NO_THROW(read_instance(fs::path(f)));
}

TEST(CliGenerate, SnipBudgetListWritesOneFileEach) {
  const auto dir = scratch("gen-snip");
  const auto r = lagcut_cli({"generate", "snip", "--out", dir});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.files.size(), 4u);
  EXPECT_EQ(read_instance(fs::path(r.files[0])).num_scenarios(), 4);
}

TEST(CliGenerate, SameSeedGivesIdenticalBytes) {
  const auto a = scratch("gen-a");
  const auto b = scratch("gen-b");
  lagcut_cli({"generate", "tiny", "--seed", "9", "--out", a});
  lagcut_cli({"generate", "tiny", "--seed", "9", "--out", b});
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename()));
  }
}

TEST(CliGenerate, BadParametersAreUsageErrors) {
  EXPECT_EQ(lagcut_cli({"generate", "sslp", "--m", "0"}).code, cli::kExitUsage);
  EXPECT_EQ(lagcut_cli({"generate", "cube"}).code, cli::kExitUsage);
  EXPECT_EQ(lagcut_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(lagcut_cli({"--help"}).code, cli::kExitOk);
}

TEST(CliRoot, FixtureExactClosesToOne) {
  const auto dir = scratch("root-t1");
  const auto inst = saved(make_fixture_t1(), dir);
  const auto r = lagcut_cli({"root", inst, "--variant", "Exact", "--delta", "0", "--out", dir});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NEAR(num(r, "final_bound"), 1.0, 1e-7);
  EXPECT_EQ(r.kv.at("method"), "Exact");
  std::ifstream trace(r.kv.at("trace"));
  const auto back = read_trace_csv(trace);
  EXPECT_EQ(back.final_bound(), num(r, "final_bound"));
}

TEST(CliRoot, BendersOnlyReportsExtensiveLp) {
  const auto dir = scratch("root-lp");
  TinyParams p;
  p.seed = 4;
  p.integer_recourse = false;
  const auto tiny = gen_tiny(p);
  const auto r = lagcut_cli({"root", saved(tiny, dir), "--variant", "BendersOnly", "--out", dir,
                             "--reference", format_double(suite::extensive_ip(tiny) + 1.0)});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_LT(suite::rel_diff(num(r, "final_bound"), num(r, "extensive_lp")), 1e-4);
  EXPECT_NEAR(num(r, "gap_closed"), 0.0, 1e-4);
}

TEST(CliRoot, UnknownVariantIsUsageError) {
  const auto dir = scratch("root-bad");
  const auto inst = saved(make_fixture_t1(), dir);
  const auto r = lagcut_cli({"root", inst, "--variant", "level"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("unknown variant"), std::string::npos);
}

TEST(CliRoot, MissingOrMalformedInstanceIsUsageError) {
  const auto dir = scratch("root-missing");
  EXPECT_EQ(lagcut_cli({"root", (dir / "none.sip").string()}).code, cli::kExitUsage);
  std::ofstream(dir / "bad.sip") << "LAGCUT-SIP 1\nNAME x\nN two\n";
  const auto r = lagcut_cli({"root", (dir / "bad.sip").string(), "--out", dir});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST(CliRoot, SolverFailureKeepsPartialTrace) {
  // Without relatively complete recourse x = 0 leaves scenario 0 infeasible.
  auto inst = make_fixture_t1();
  inst.name = "broken";
  inst.scenarios[0].upper = {0.0};
  const auto dir = scratch("root-fail");
  const auto r = lagcut_cli({"root", saved(inst, dir), "--variant", "Exact", "--out", dir});
  EXPECT_EQ(r.code, cli::kExitSolverFailure);
  const auto trace = dir / "broken.Exact.csv";
  ASSERT_TRUE(fs::exists(trace));
  EXPECT_EQ(slurp(trace).rfind("# schema=lagcut-trace/1", 0), 0u);
}

TEST(CliRoot, EnvironmentOverridesDefaults) {
  const auto dir = scratch("root-env");
  const auto inst = saved(make_fixture_t1(), dir);
  ::setenv("LAGCUT_VARIANT", "Rstr2", 1);
  const auto env = lagcut_cli({"root", inst, "--out", dir});
  const auto flag = lagcut_cli({"root", inst, "--out", dir, "--variant", "StrBen"});
  ::unsetenv("LAGCUT_VARIANT");
  EXPECT_EQ(env.kv.at("method"), "Rstr2");
  EXPECT_EQ(flag.kv.at("method"), "StrBen");
}

TEST(CliRoot, IterationClockTracesAreReproducible) {
  const auto inst_dir = scratch("root-det");
  const auto inst = saved(suite::tiny_suite()[3], inst_dir);
  std::vector<std::string> csv;
  for (const char* workers : {"1", "1", "4"}) {
    const auto dir = scratch(std::string("root-det-") + std::to_string(csv.size()));
    const auto r = lagcut_cli({"root", inst, "--variant", "Exact", "--iteration-clock", "--workers",
                               workers, "--out", dir});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    csv.push_back(slurp(r.kv.at("trace")));
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(csv[0], csv[2]);
}

TEST(CliSolve, FixtureBothModes) {
  const auto dir = scratch("solve-t1");
  const auto inst = saved(make_fixture_t1(), dir);
  const auto lbc = lagcut_cli({"solve", inst, "--mode", "lbc", "--variant", "Exact", "--delta", "0"});
  ASSERT_EQ(lbc.code, cli::kExitOk) << lbc.err;
  EXPECT_NEAR(num(lbc, "objective"), 1.0, 1e-9);
  EXPECT_EQ(num(lbc, "gap"), 0.0);
  EXPECT_EQ(lbc.kv.at("x"), "1");
  const auto bbc = lagcut_cli({"solve", inst, "--mode", "bbc"});
  ASSERT_EQ(bbc.code, cli::kExitOk) << bbc.err;
  EXPECT_NEAR(num(bbc, "objective"), 1.0, 1e-9);
  EXPECT_EQ(bbc.kv.at("method"), "BendersOnly");
}

TEST(CliSolve, ZeroTimeLimitReportsGap) {
  const auto dir = scratch("solve-limit");
  SslpParams p;
  const auto inst = saved(gen_sslp(p), dir);
  const auto r = lagcut_cli({"solve", inst, "--mode", "bbc", "--time-limit", "0"});
  EXPECT_EQ(r.code, cli::kExitTimeLimit);
  EXPECT_EQ(r.kv.at("status"), to_string(SolveStatus::LimitReached));
  EXPECT_LE(num(r, "bound"), suite::extensive_ip(gen_sslp(p)) + 1e-7);
  EXPECT_GE(num(r, "gap"), 0.0);
}

TEST(CliSolve, BadModeIsUsageError) {
  const auto dir = scratch("solve-mode");
  EXPECT_EQ(lagcut_cli({"solve", saved(make_fixture_t1(), dir), "--mode", "dd"}).code, cli::kExitUsage);
}

TEST(CliProfile, SyntheticTracesGiveHandComputedRho) {
  const auto dir = scratch("profile");
  auto write = [&](const std::string& inst, const std::string& method,
                   std::vector<std::pair<double, double>> pts) {
    BoundTrace t;
    t.instance = inst;
    t.method = method;
    t.z_lp = 0.0;
    for (auto [time, bound] : pts) {
      TracePoint p;
      p.time_s = time;
      p.lower_bound = bound;
      t.points.push_back(p);
    }
    const auto path = dir / (inst + "." + method + ".csv");
    std::ofstream f(path);
    write_trace_csv(t, f);
    return path.string();
  };
  const std::vector<std::string> files{
      write("A", "m1", {{1, 5}, {3, 10}}), write("A", "m2", {{2, 8}, {4, 8}}),
      write("B", "m1", {{1, 2}, {2, 4}}), write("B", "m2", {{0.5, 4}, {5, 4}})};
  auto args = std::vector<std::string>{"profile"};
  args.insert(args.end(), files.begin(), files.end());
  args.insert(args.end(), {"--out", (dir / "out").string()});
  const auto r = lagcut_cli(args);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  ASSERT_EQ(r.files.size(), 2u);
  EXPECT_EQ(slurp(dir / "out" / "profile-gamma0.75.csv"),
            "gamma,tau,method,rho\n"
            "0.75,0.5,m1,0\n0.75,0.5,m2,0.5\n0.75,2,m1,0.5\n0.75,2,m2,1\n0.75,3,m1,1\n0.75,3,m2,1\n");
  EXPECT_EQ(slurp(dir / "out" / "profile-gamma0.95.csv"),
            "gamma,tau,method,rho\n"
            "0.95,0.5,m1,0\n0.95,0.5,m2,0.5\n0.95,2,m1,0.5\n0.95,2,m2,0.5\n0.95,3,m1,1\n0.95,3,m2,0.5\n");

  const auto mismatched = lagcut_cli({"profile", files[0], files[3]});
  EXPECT_EQ(mismatched.code, cli::kExitUsage);
  EXPECT_NE(mismatched.err.find("A/m2"), std::string::npos);
  EXPECT_EQ(lagcut_cli({"profile"}).code, cli::kExitUsage);
}
