#include "cli/commands.h"
#include "cli/config.h"

#include "ghzpur/ghz.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace {

using namespace ghzpur;
using namespace ghzpur::cli;
namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ghzpur");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Value after "key: " in the summary block.
double summary_value(const std::string& text, const std::string& key) {
  for (const auto& line : lines_of(text)) {
    if (line.rfind(key + ": ", 0) == 0) return std::stod(line.substr(key.size() + 2));
  }
  ADD_FAILURE() << "missing " << key;
  return std::nan("");
}

// CSV part of a command's stdout: everything from the header onward.
std::vector<std::vector<std::string>> csv_rows(const std::string& text, const std::string& header) {
  std::vector<std::vector<std::string>> rows;
  bool started = false;
  for (const auto& line : lines_of(text)) {
    if (line == header) {
      started = true;
      continue;
    }
    if (started && !line.empty()) rows.push_back(split(line));
  }
  EXPECT_TRUE(started) << "no header " << header;
  return rows;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ghzpur_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  fs::path dir_;
};

TEST(Round, BinaryMixtureSummary) {
  const auto r = run({"round", "--n", "3", "--error", "bit-flip", "--F", "0.8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(summary_value(r.out, "p_success"), 0.68, 1e-12);
  EXPECT_NEAR(summary_value(r.out, "kept_fidelity"), 0.941176, 1e-6);
  const auto rows = csv_rows(r.out, "pattern,readout,probability,kept_fidelity");
  EXPECT_EQ(rows.size(), 22U);  // 2 x 8 accepted readouts plus 6 rejected patterns
}

TEST(Round, PureInput) {
  const auto r = run({"round", "--n", "3", "--F", "1.0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(summary_value(r.out, "kept_fidelity"), 1.0, 1e-12);
}

TEST_F(TempDir, MixtureFileFourComponents) {
  std::ostringstream m;
  ghz::write_mixture(m, ghz::GhzMixture(3, {0.7, 0, 0.1, 0, 0.1, 0, 0.1, 0}));
  write("weights.tsv", m.str());
  const auto r = run({"round", "--mixture", path("weights.tsv"), "--out", path("branches.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(summary_value(r.out, "p_success"), 0.52, 1e-12);
  EXPECT_NEAR(summary_value(r.out, "kept_fidelity"), 0.49 / 0.52, 1e-12);
  EXPECT_EQ(slurp(path("branches.csv")).rfind("pattern,readout,probability,kept_fidelity\n", 0), 0U);
  EXPECT_EQ(r.out.find("pattern,"), std::string::npos);
}

TEST(Round, InlineWeightsAndPhaseMode) {
  const auto r = run({"round", "--error", "phase-flip", "--weights", "00+:0.8,00-:0.2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(summary_value(r.out, "kept_fidelity"), 16.0 / 17.0, 1e-9);
  EXPECT_NEAR(summary_value(r.out, "p_success"), 0.17, 1e-12);
}

TEST(Round, MonteCarloLines) {
  const auto r = run({"round", "--F", "0.8", "--trials", "2000", "--seed", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(summary_value(r.out, "mc_acceptance_rate"), 0.68, 4 * std::sqrt(0.68 * 0.32 / 2000));
  EXPECT_EQ(summary_value(r.out, "mc_trials"), 2000.0);
}

TEST(Sweep, DefaultGrid) {
  const auto r = run({"sweep"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out, "F,F_prime,p_success");
  ASSERT_EQ(rows.size(), 19U);
  for (const auto& row : rows) {
    const double f = std::stod(row[0]);
    const double fp = std::stod(row[1]);
    if (std::abs(f - 0.5) < 1e-12) {
      EXPECT_NEAR(fp, 0.5, 1e-12);
    } else {
      EXPECT_EQ(fp > f, f > 0.5) << f;
    }
    if (std::abs(f - 0.8) < 1e-12) EXPECT_NEAR(fp, 0.941176, 1e-6);
  }
}

TEST(Sweep, ExactMatchesRecursion) {
  const auto fast = run({"sweep", "--F-min", "0.1", "--F-max", "0.9", "--F-step", "0.2"});
  const auto exact = run({"sweep", "--F-min", "0.1", "--F-max", "0.9", "--F-step", "0.2", "--exact"});
  ASSERT_EQ(exact.code, 0) << exact.err;
  const auto a = csv_rows(fast.out, "F,F_prime,p_success");
  const auto b = csv_rows(exact.out, "F,F_prime,p_success");
  ASSERT_EQ(a.size(), 5U);
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i][0], b[i][0]);
    EXPECT_NEAR(std::stod(a[i][1]), std::stod(b[i][1]), 1e-9);
    EXPECT_NEAR(std::stod(a[i][2]), std::stod(b[i][2]), 1e-9);
  }
}

TEST(Sweep, RangeValidation) {
  EXPECT_EQ(run({"sweep", "--F-min", "0", "--F-max", "0.5"}).code, kExitConfig);
  EXPECT_EQ(run({"sweep", "--F-step", "-0.1"}).code, kExitConfig);
}

TEST(Iterate, ThreeRounds) {
  const auto r = run({"iterate", "--F", "0.8", "--rounds", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out, "round,F0,F1,F2,F3,p_success,pairs_expected,cumulative_p");
  ASSERT_EQ(rows.size(), 4U);
  double f = 0.8;
  for (int k = 1; k <= 3; ++k) {
    f = f * f / (f * f + (1 - f) * (1 - f));
    EXPECT_NEAR(std::stod(rows[k][1]), f, 1e-14);
  }
  EXPECT_NEAR(std::stod(rows[1][1]), 0.941176, 1e-6);
  EXPECT_NEAR(std::stod(rows[3][1]), 0.9999847, 1e-7);
}

TEST(Iterate, TargetAndStagnation) {
  const auto r = run({"iterate", "--F", "0.8", "--target", "0.99"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(csv_rows(r.out, "round,F0,F1,F2,F3,p_success,pairs_expected,cumulative_p").size(), 3U);
  EXPECT_EQ(run({"iterate", "--F", "0.5", "--rounds", "2"}).code, kExitStagnation);
  EXPECT_EQ(run({"iterate", "--F", "0.8"}).code, kExitConfig);
}

TEST(Iterate, EfficienciesEnterPhysicalProbability) {
  const auto r = run({"iterate", "--F", "0.8", "--rounds", "1", "--eta-d", "0.28"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out, "round,F0,F1,F2,F3,p_success,pairs_expected,cumulative_p");
  EXPECT_NEAR(std::stod(rows[1][5]), 2.43e-3, 2.43e-3 * 0.005);
}

TEST(Resources, DefaultsAndScaling) {
  const auto r = run({"resources", "--F", "0.8", "--n-min", "1", "--n-max", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out, "n,F,P_p,P,P_per_photon");
  ASSERT_EQ(rows.size(), 6U);
  double last = 1.0;
  for (const auto& row : rows) {
    const int n = std::stoi(row[0]);
    const double p = std::stod(row[3]);
    const double per_photon = std::stod(row[4]);
    EXPECT_LT(p, last);
    last = p;
    if (n == 1) EXPECT_EQ(per_photon, p);
    if (n > 1) EXPECT_LT(per_photon, p);
    if (n == 3) EXPECT_NEAR(p, 2.43e-3, 2.43e-3 * 0.005);
  }
}

TEST(FaradayScan, IdealPointAndModulus) {
  const auto r = run({"faraday-scan", "--points", "301"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out, "omega_p,re_r,im_r,theta,theta_0,rotation");
  ASSERT_EQ(rows.size(), 301U);
  bool hit = false;
  for (const auto& row : rows) {
    EXPECT_NEAR(std::hypot(std::stod(row[1]), std::stod(row[2])), 1.0, 1e-9);
    if (std::abs(std::stod(row[0]) + 0.5) < 1e-12) {
      EXPECT_NEAR(std::stod(row[5]), std::numbers::pi / 4, 1e-12);
      hit = true;
    }
  }
  EXPECT_TRUE(hit);
  EXPECT_NE(r.err.find("ideal point"), std::string::npos);
}

TEST(FaradayScan, ZeroCoupling) {
  const auto r = run({"faraday-scan", "--g", "0", "--points", "41"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& row : csv_rows(r.out, "omega_p,re_r,im_r,theta,theta_0,rotation")) {
    EXPECT_NEAR(std::stod(row[5]), 0.0, 1e-15);
  }
}

TEST(ExitCodes, ConfigErrors) {
  EXPECT_EQ(run({"round", "--bogus"}).code, kExitConfig);
  EXPECT_EQ(run({"round"}).code, kExitConfig);
  EXPECT_EQ(run({"round", "--F", "0.8", "--weights", "00+:1"}).code, kExitConfig);
  EXPECT_EQ(run({"round", "--F", "1.5"}).code, kExitConfig);
  EXPECT_EQ(run({"round", "--F", "0.8", "--error", "sideways"}).code, kExitConfig);
  EXPECT_EQ(run({"round", "--weights", "00+:0.5,01+:0.2"}).code, kExitConfig);
  EXPECT_EQ(run({"round", "--F", "0.8", "--config", "/nonexistent/run.cfg"}).code, kExitConfig);
  EXPECT_EQ(run({"round", "--F", "0.8", "--out", "/nonexistent/dir/out.csv"}).code, kExitConfig);
}

TEST(ExitCodes, LeakageFailure) {
  // A zero threshold trips on round-off once the gate is off the ideal point.
  const auto r = run({"round", "--F", "0.8", "--omega-p", "-0.45", "--leakage-threshold", "0"});
  if (r.code == 0) GTEST_SKIP() << "no round-off leakage at this detuning";
  EXPECT_EQ(r.code, kExitLeakage) << r.err;
}

TEST_F(TempDir, ConfigFileAndFlagOverride) {
  write("run.cfg", "# binary input\nn = 3\nF = 0.6\nerror = bit-flip\n");
  const auto from_file = run({"round", "--config", path("run.cfg")});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_NEAR(summary_value(from_file.out, "input_fidelity"), 0.6, 1e-15);
  const auto overridden = run({"round", "--config", path("run.cfg"), "--F", "0.8"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_NEAR(summary_value(overridden.out, "input_fidelity"), 0.8, 1e-15);
}

TEST_F(TempDir, SameSeedGivesIdenticalBytes) {
  const std::vector<std::string> base{"round", "--F", "0.7", "--trials", "3000"};
  auto with = [&](std::vector<std::string> extra, const std::string& file) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("--out");
    args.push_back(path(file));
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return r.out + slurp(path(file));
  };
  const auto a = with({"--seed", "99"}, "a.csv");
  EXPECT_EQ(a, with({"--seed", "99"}, "b.csv"));
  EXPECT_EQ(a, with({"--seed", "99", "--threads", "3"}, "c.csv"));
  EXPECT_NE(a, with({"--seed", "100"}, "d.csv"));
}

TEST(Config, ParseAndSerialize) {
  std::istringstream in("  n=3\n\n# comment\nF = 0.8   # trailing\nerror =bit-flip\n");
  const auto kv = KeyValueConfig::parse(in);
  EXPECT_EQ(kv.serialize(), "F = 0.8\nerror = bit-flip\nn = 3\n");
  std::istringstream again(kv.serialize());
  EXPECT_EQ(KeyValueConfig::parse(again).serialize(), kv.serialize());
  EXPECT_EQ(kv.get_double("F"), 0.8);
  EXPECT_EQ(kv.get_int("n"), 3);
  EXPECT_FALSE(kv.get("seed").has_value());
}

TEST(Config, Errors) {
  std::istringstream unknown("n = 3\ncolour = red\n");
  try {
    KeyValueConfig::parse(unknown);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  std::istringstream dup("n = 3\nn = 4\n");
  EXPECT_THROW(KeyValueConfig::parse(dup), ConfigError);
  std::istringstream no_eq("n 3\n");
  EXPECT_THROW(KeyValueConfig::parse(no_eq), ConfigError);
  KeyValueConfig kv;
  kv.set("n", "three");
  EXPECT_THROW(kv.get_int("n"), ConfigError);
  kv.set("allow_leakage", "maybe");
  EXPECT_THROW(kv.get_bool("allow_leakage"), ConfigError);
}

TEST(Config, BoolsAndMerge) {
  KeyValueConfig a;
  a.set("allow_leakage", "yes");
  a.set("n", "3");
  KeyValueConfig b;
  b.set("n", "4");
  a.merge(b);
  EXPECT_EQ(a.get_bool("allow_leakage"), true);
  EXPECT_EQ(a.get_int("n"), 4);
}

TEST(Config, EveryKeyIsDocumented) {
  for (const auto& [key, help] : known_keys()) {
    EXPECT_FALSE(help.empty()) << key;
  }
  EXPECT_TRUE(known_keys().contains("per_photon_losses"));
  EXPECT_TRUE(known_keys().contains("T_f"));
}

}  // namespace
