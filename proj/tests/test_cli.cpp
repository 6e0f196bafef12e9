#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "runner.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kSeq = ECHOFORGE_SEQUENCE_DIR;

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "echoforge");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  return echoforge::cli::main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("echoforge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

const char* kHeader =
    "medium od=3.5 t2=130us\n"
    "pulse probe t=0us tau=1us rabi=150kHz\n"
    "pulse probe t=35us tau=1us rabi=150kHz\n";

}  // namespace

TEST_F(Cli, RunWritesTraceAndSummary) {
  ASSERT_EQ(run_cli({"run", kSeq + "/fig2.seq", "--transverse", "on", "--out", (dir_ / "o").string()}), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "o" / "summary.json"));
  EXPECT_NEAR(j["phi_I"].get<double>() / M_PI, 1.09, 0.01);
  EXPECT_EQ(j["phi_II"].get<double>(), 0.0);
  EXPECT_LT(j["ratio_to_reference"].get<double>(), 1.0);
  EXPECT_EQ(j["ratio_to_reference"].get<double>(), j["peak_intensity"].get<double>());
  EXPECT_NEAR(j["peak_time_us"].get<double>(), j["predicted_echo_time_us"].get<double>(), 1e-6);
  EXPECT_EQ(j["manifest"]["tier"], "analytic");
  EXPECT_EQ(j["manifest"]["transverse"], true);
  EXPECT_EQ(j["manifest"]["input_fnv1a"].get<std::string>().size(), 16u);
  const std::string csv = slurp(dir_ / "o" / "echo_trace.csv");
  EXPECT_EQ(csv.rfind("time_us,intensity\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2002);
}

TEST_F(Cli, CompensatedSequenceRecoversEcho) {
  ASSERT_EQ(run_cli({"run", kSeq + "/fig4c.seq", "--transverse", "on", "--out", dir_.string()}), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "summary.json"));
  EXPECT_GE(j["ratio_to_reference"].get<double>(), 0.98);
  EXPECT_NEAR(j["ratio_to_reference"].get<double>(), 1.0, 1e-12);
}

TEST_F(Cli, TransverseOffLeavesEtaNull) {
  ASSERT_EQ(run_cli({"run", kSeq + "/fig2.seq", "--out", dir_.string()}), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "summary.json"));
  EXPECT_TRUE(j["eta"].is_null());
  EXPECT_NEAR(j["ratio_to_reference"].get<double>(), 1.0, 1e-9);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({"run", (dir_ / "missing.seq").string()}), 1);
  EXPECT_EQ(run_cli({"check", write("bad.seq", "pulse ls tau=-1us\n").string()}), 1);
  EXPECT_EQ(run_cli({"run", kSeq + "/fig3_delta.seq", "--out", dir_.string()}), 1);
  EXPECT_EQ(run_cli({"sweep", kSeq + "/fig2.seq", "--out", dir_.string()}), 1);
  EXPECT_EQ(run_cli({"run", kSeq + "/fig2.seq", "--tier", "quantum"}), 1);
  EXPECT_EQ(run_cli({}), 1);
  EXPECT_EQ(run_cli({"check", kSeq + "/fig4d.seq"}), 0);
  // Exact spectral mode on a grid that contains the light-shift resonance.
  const auto exact = write("exact.seq", std::string(kHeader) +
                                            "grid spectral=exact\n"
                                            "pulse ls t=17.5us tau=3us rabi=330kHz detuning=1.5MHz\n");
  EXPECT_EQ(run_cli({"run", exact.string(), "--out", dir_.string()}), 2);
}

TEST_F(Cli, SweepFailureRowsKeepOrder) {
  const auto f = write("s.seq", std::string(kHeader) +
                                    "pulse ls t=17.5us tau=1us rabi=330kHz detuning=1.5MHz name=c\n"
                                    "sweep c.tau=1us..5us steps=5\n");
  EXPECT_EQ(run_cli({"sweep", f.string(), "--jobs", "2", "--out", dir_.string()}), 2);
  const std::string csv = slurp(dir_ / "sweep.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,label,c.tau_us,eta,ratio,peak_time_us,peak_intensity,status,message");
  for (int k = 0; k < 5; ++k) {
    ASSERT_TRUE(std::getline(in, line));
    EXPECT_EQ(line.rfind(std::to_string(k) + ",", 0), 0u);
    EXPECT_NE(line.find(k < 4 ? ",ok," : ",error,"), std::string::npos) << line;
  }
}

TEST_F(Cli, SweepIsIndependentOfJobCount) {
  ASSERT_EQ(run_cli({"sweep", kSeq + "/fig2_inset.seq", "--transverse", "on", "--jobs", "1", "--out",
                     (dir_ / "a").string()}),
            0);
  ASSERT_EQ(run_cli({"sweep", kSeq + "/fig2_inset.seq", "--transverse", "on", "--jobs", "4", "--out",
                     (dir_ / "b").string()}),
            0);
  EXPECT_EQ(slurp(dir_ / "a" / "sweep.csv"), slurp(dir_ / "b" / "sweep.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "manifest.json"), slurp(dir_ / "b" / "manifest.json"));
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  for (const char* sub : {"a", "b"})
    ASSERT_EQ(run_cli({"run", kSeq + "/fig4b.seq", "--transverse", "on", "--out", (dir_ / sub).string()}), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "echo_trace.csv"), slurp(dir_ / "b" / "echo_trace.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json"));
}

TEST_F(Cli, FmtPrintsCanonicalText) {
  const auto f = write("x.seq", "# note\nmedium   od=3.5    t2=130us\n");
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(run_cli({"fmt", f.string()}), 0);
  EXPECT_EQ(::testing::internal::GetCapturedStdout(), "medium od=3.5 t2=130us\n");
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(echoforge::cli::fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(echoforge::cli::fnv1a("a"), 0xaf63dc4c8601ec8cull);
}
