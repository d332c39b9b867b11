#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sbg/cli.hpp"

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> store{"sbg_sim"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : store) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = sbg::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string tmp_path(const std::string& name) {
  const char* dir = std::getenv("SBG_TEST_TMP");
  return std::string(dir ? dir : ".") + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, TheoryReferenceTable) {
  const auto r = run({"theory", "--n", "128", "--m", "16,8,4,2", "--l", "1,2,4,8", "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("p = 0.944882 (94.4882%)"), std::string::npos);
  EXPECT_NE(r.out.find("(98.6050%)"), std::string::npos);
  EXPECT_NE(r.out.find("(99.6450%)"), std::string::npos);
  EXPECT_NE(r.out.find("(99.6333%)"), std::string::npos);
  EXPECT_NE(r.out.find("lambda = 120/127"), std::string::npos);
}

TEST(Cli, TheoryCsv) {
  const auto path = tmp_path("theory.csv");
  const auto r = run({"--out", path, "theory", "--m", "16,8", "--l", "1,2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(path);
  EXPECT_EQ(csv.rfind("n,m,l,k,lambda,p,l_required,t_bound\n", 0), 0u);
  EXPECT_NE(csv.find("128,16,1,2,"), std::string::npos);
}

TEST(Cli, TheoryErrors) {
  EXPECT_EQ(run({"theory", "--m", "16,8", "--l", "1,2,3"}).code, 2);
  EXPECT_EQ(run({"theory", "--m", "256"}).code, 2);
  EXPECT_EQ(run({"theory", "--log-base", "ten"}).code, 2);
}

TEST(Cli, ParseErrorsAndHelp) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, MissingConfigFile) {
  const auto r = run({"--config", tmp_path("no_such.cfg"), "simulate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, InvalidSettings) {
  EXPECT_EQ(run({"simulate", "--n", "abc"}).code, 2);
  EXPECT_EQ(run({"simulate", "--k", "200"}).code, 2);
  EXPECT_EQ(run({"simulate", "--n", "256", "--r", "8", "--m", "16"}).code, 2);
  EXPECT_EQ(run({"sweep", "--axis", "t", "--values", "20,30", "--m", "16"}).code, 2);
  EXPECT_EQ(run({"sweep", "--axis", "q", "--values", "1"}).code, 2);
  EXPECT_EQ(run({"sweep", "--values", "1"}).code, 2);
}

TEST(Cli, SimulateSummary) {
  const auto r = run({"--seed", "3", "simulate", "--n", "64", "--m", "8", "--trials", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("success_rate = "), std::string::npos);
  EXPECT_NE(r.out.find("theory_p = "), std::string::npos);
}

TEST(Cli, SweepIsReproducible) {
  const std::initializer_list<std::string> args{
      "--seed", "9", "--threads", "3", "--mode", "robust", "--no-timing", "sweep",
      "--axis", "snr", "--values", "0,10,20", "--n", "64", "--m", "8", "--trials", "150"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("n,m,l,k,t,snr_db,mode,trials,seed,success_rate"), std::string::npos);
  EXPECT_NE(a.out.find(",10,robust,150,9,"), std::string::npos);
}

TEST(Cli, ConfigFileKeyValueAndJson) {
  const auto kv = tmp_path("run.cfg");
  {
    std::ofstream os(kv);
    os << "# small run\nn = 32\nm = 4\nl = 2\ntrials = 50\nseed = 4\ntiming = false\n";
  }
  const auto json = tmp_path("run.json");
  {
    std::ofstream os(json);
    os << R"({"n": 32, "m": 4, "l": 2, "trials": 50, "seed": 4, "timing": false})";
  }
  const auto out_a = tmp_path("run_a.csv");
  const auto out_b = tmp_path("run_b.csv");
  ASSERT_EQ(run({"--config", kv, "--out", out_a, "simulate"}).code, 0);
  ASSERT_EQ(run({"--config", json, "--out", out_b, "simulate"}).code, 0);
  const auto a = slurp(out_a);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(out_b));
  EXPECT_NE(a.find("\n32,4,2,2,16,,noiseless,50,4,"), std::string::npos);
}

TEST(Cli, EnsembleSaveAndReplay) {
  const auto ens = tmp_path("cli_ensemble.json");
  const auto report = tmp_path("cli_report.csv");
  ASSERT_EQ(run({"simulate", "--n", "32", "--m", "4", "--trials", "20", "--save-ensemble", ens}).code, 0);
  const auto r = run({"--mode", "robust", "simulate", "--n", "32", "--m", "4", "--trials", "20",
                      "--load-ensemble", ens, "--report", report});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(report).rfind("graph,right_node,nullton_count", 0), 0u);
  EXPECT_EQ(run({"simulate", "--n", "64", "--m", "4", "--load-ensemble", ens}).code, 2);
}

TEST(Cli, Scan) {
  const auto r = run({"scan", "--nr", "8", "--n", "64", "--m", "8", "--path", "2:17:0.5:0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("best pair: aoa=2 aod=17"), std::string::npos);
  EXPECT_NE(r.out.find("rows recovered: 8/8"), std::string::npos);
  EXPECT_EQ(run({"scan", "--path", "1"}).code, 2);
}

TEST(Cli, Selftest) {
  const auto r = run({"selftest"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("364/364"), std::string::npos);
}

TEST(ConfigParser, KeyValueComments) {
  const auto kv = sbg::parse_key_values("# header\n n = 64 \nmode = robust  # trailing\n\nseed=3\n");
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("n"), "64");
  EXPECT_EQ(kv.at("mode"), "robust");
  EXPECT_EQ(kv.at("seed"), "3");
  EXPECT_THROW(sbg::parse_key_values("n 64\n"), sbg::ConfigError);
}

TEST(ConfigParser, JsonScalarsAndLists) {
  const auto kv = sbg::parse_json_settings(R"({"n": 32, "cfo": false, "values": [0, 10.5], "mode": "robust"})");
  EXPECT_EQ(kv.at("n"), "32");
  EXPECT_EQ(kv.at("cfo"), "false");
  EXPECT_EQ(kv.at("mode"), "robust");
  sbg::RunSettings s;
  for (const auto& [k, v] : kv) sbg::apply_setting(s, k, v);
  EXPECT_EQ(s.axis_values, (std::vector<double>{0, 10.5}));
  EXPECT_THROW(sbg::parse_json_settings("[1, 2]"), sbg::ConfigError);
}

TEST(ConfigParser, SettingsValidation) {
  sbg::RunSettings s;
  EXPECT_THROW(sbg::apply_setting(s, "colour", "blue"), sbg::ConfigError);
  EXPECT_THROW(sbg::apply_setting(s, "trials", "-4"), sbg::ConfigError);
  EXPECT_THROW(sbg::apply_setting(s, "cfo", "maybe"), sbg::ConfigError);
  EXPECT_THROW(sbg::apply_setting(s, "false_alarm", "1.5"), sbg::ConfigError);
  sbg::apply_setting(s, "calibration", "per-quadrature");
  sbg::apply_setting(s, "m", "8");
  sbg::apply_setting(s, "t", "48");
  sbg::finish_settings(s);
  EXPECT_EQ(s.experiment.l, 3u);
  EXPECT_EQ(s.experiment.detector_calibration(), sbg::Calibration::per_quadrature);
}
