// Runs the built `mecs` executable end to end.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "mecs/commands.hpp"
#include "mecs/io.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mecs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  static std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Runs the CLI with stdout captured to out.txt; returns the exit status.
  int run(const std::string& args) const {
    const std::string cmd = std::string(MECS_CLI_PATH) + " " + args + " > " + path("out.txt").string() + " 2> " +
                            path("err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string out() const { return read(path("out.txt")); }

  std::vector<mecs::io::ReportRow> report() const {
    std::istringstream in(out());
    return mecs::io::read_report(in);
  }

  fs::path dir_;
};

const char* kTwoSeries = "[dataset]\nseries = 2\nclasses = k\n\n[coincidence]\ntau = 5\n";

}  // namespace

TEST_F(Cli, AnalyzeHandExample) {
  write("e.csv", "time,series,class\n10,0,k\n20,0,k\n12,1,k\n");
  write("c.ini", kTwoSeries);
  ASSERT_EQ(run("analyze " + path("e.csv").string() + " -c " + path("c.ini").string()), 0);
  bool found = false;
  for (const auto& r : report())
    if (r.metric == "S" && r.pair == "0-1") {
      EXPECT_DOUBLE_EQ(r.value, 0.3);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST_F(Cli, EmptyEventsGiveZeroReport) {
  write("e.csv", "");
  write("c.ini", kTwoSeries);
  ASSERT_EQ(run("analyze " + path("e.csv").string() + " -c " + path("c.ini").string()), 0);
  const auto rows = report();
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_EQ(r.value, 0.0) << r.metric;
}

TEST_F(Cli, UnknownClassIsDataError) {
  write("e.csv", "time,series,class\n10,0,nope\n");
  write("c.ini", kTwoSeries);
  EXPECT_EQ(run("analyze " + path("e.csv").string() + " -c " + path("c.ini").string()), 3);
  EXPECT_NE(read(path("err.txt")).find("line 2"), std::string::npos);
}

TEST_F(Cli, ConfigAndUsageErrors) {
  write("e.csv", "time,series,class\n");
  write("c.ini", "[dataset]\nseries = 2\nclasses = k\n");  // no window
  EXPECT_EQ(run("analyze " + path("e.csv").string() + " -c " + path("c.ini").string()), 2);
  EXPECT_EQ(run("analyze"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  write("a.ini", std::string(kTwoSeries) + "mode = adaptive\n[stream]\nbuff_dim = 4\n");
  EXPECT_EQ(run("stream " + path("e.csv").string() + " -c " + path("a.ini").string()), 2);
}

TEST_F(Cli, TauFlagOverridesConfig) {
  write("e.csv", "time,series,class\n10,0,k\n20,0,k\n12,1,k\n");
  write("c.ini", kTwoSeries);
  ASSERT_EQ(run("analyze " + path("e.csv").string() + " -c " + path("c.ini").string() + " --tau 10"), 0);
  for (const auto& r : report())
    if (r.metric == "S") {
      EXPECT_DOUBLE_EQ(r.value, ((0.8 + 0.2) / 1.0 + (0.8 + 0.2) / 2.0) / 3.0);
    }
}

TEST_F(Cli, StreamEmitsOneGroupPerBuffer) {
  write("e.csv", "time,series,class\n3,0,k\n5,1,k\n14,0,k\n25,1,k\n");
  write("c.ini", std::string(kTwoSeries) + "[stream]\nbuff_dim = 10\nlength = 30\n");
  ASSERT_EQ(run("stream " + path("e.csv").string() + " -c " + path("c.ini").string()), 0);
  std::set<std::size_t> buffers;
  for (const auto& r : report()) {
    ASSERT_TRUE(r.buffer);
    buffers.insert(*r.buffer);
    if (r.metric == "S" && *r.buffer == 0) {
      EXPECT_DOUBLE_EQ(r.value, 0.6);
    }
  }
  EXPECT_EQ(buffers.size(), 3u);
}

TEST_F(Cli, StreamMatchesAnalyzeInsideOneWindow) {
  write("e.csv", "time,series,class\n3,0,k\n5,1,k\n7,1,k\n");
  write("c.ini", std::string(kTwoSeries) + "[stream]\nbuff_dim = 20\n");
  ASSERT_EQ(run("analyze " + path("e.csv").string() + " -c " + path("c.ini").string()), 0);
  auto batch = report();
  ASSERT_EQ(run("stream " + path("e.csv").string() + " -c " + path("c.ini").string()), 0);
  auto streamed = report();
  ASSERT_EQ(batch.size(), streamed.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(batch[i].metric, streamed[i].metric);
    EXPECT_EQ(batch[i].value, streamed[i].value);
  }
}

TEST_F(Cli, StreamFromSignals) {
  write("a.csv", "sample,value\n0,0\n1,1\n2,0\n3,0\n4,0\n5,0\n");
  write("b.csv", "sample,value\n0,0\n1,0\n2,1\n3,0\n4,0\n5,0\n");
  write("c.ini", std::string(kTwoSeries) + "[stream]\nbuff_dim = 6\n");
  ASSERT_EQ(run("stream --signal 0:k:" + path("a.csv").string() + " --signal 1:k:" + path("b.csv").string() + " -c " +
                path("c.ini").string()),
            0);
  for (const auto& r : report())
    if (r.metric == "S") {
      EXPECT_DOUBLE_EQ(r.value, 0.8);
    }
}

TEST_F(Cli, SynthIsDeterministic) {
  for (const char* example : {"sequences", "composed", "casestudy"}) {
    ASSERT_EQ(run(std::string("synth ") + example + " -o " + path("a").string()), 0);
    ASSERT_EQ(run(std::string("synth ") + example + " -o " + path("b").string()), 0);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(path("a"))) {
    EXPECT_EQ(read(entry.path()), read(path("b") / entry.path().filename())) << entry.path();
    ++files;
  }
  EXPECT_EQ(files, 12u);
  std::ifstream codes(path("a") / "sequences.csv");
  const auto series = mecs::io::read_codes(codes);
  ASSERT_EQ(series.size(), 2u);
  for (const auto& s : series)
    for (int v : s) EXPECT_TRUE(v >= 0 && v <= 3);
}

TEST_F(Cli, SynthSequencesConfigRuns) {
  ASSERT_EQ(run("synth sequences -o " + path("s").string()), 0);
  ASSERT_EQ(run("derive " + (path("s") / "sequences_events.csv").string() + " -c " + (path("s") / "sequences.ini").string()), 0);
  std::istringstream derived(out());
  const auto ds = mecs::io::read_events(derived, mecs::ClassRegistry({"S"}), 2);
  EXPECT_EQ(ds.count(0, 0), 3u);
  EXPECT_EQ(ds.count(1, 0), 3u);
}

TEST_F(Cli, Baseline) {
  write("same.csv", "time,series,class\n1,0,k\n5,0,k\n1,1,k\n5,1,k\n");
  ASSERT_EQ(run("baseline " + path("same.csv").string() + " --tau 2"), 0);
  EXPECT_NE(out().find("quiroga_Q,1\n"), std::string::npos);
  EXPECT_NE(out().find("mecs_S,0.5\n"), std::string::npos);
  write("far.csv", "time,series,class\n0,0,k\n100,1,k\n");
  ASSERT_EQ(run("baseline " + path("far.csv").string() + " --tau 2"), 0);
  EXPECT_NE(out().find("quiroga_Q,0\n"), std::string::npos);
  write("three.csv", "time,series,class\n1,0,k\n1,1,k\n1,2,k\n");
  EXPECT_EQ(run("baseline " + path("three.csv").string() + " --tau 2"), 2);
}

TEST_F(Cli, PeaksWritesEvents) {
  write("s.csv", "sample,value\n0,0\n1,1\n2,0\n3,1\n4,0\n");
  ASSERT_EQ(run("peaks " + path("s.csv").string() + " --prominence 0.5 --class P"), 0);
  EXPECT_EQ(out(), "time,series,class\n1,0,P\n3,0,P\n");
}

TEST_F(Cli, BenchWritesTimingRow) {
  ASSERT_EQ(run("bench --merg-dim 200 --repeats 2"), 0);
  EXPECT_EQ(out().rfind("n_series,k_classes,merg_dim", 0), 0u);
  ASSERT_EQ(run("bench --merg-dim 200 --density 0 --repeats 2"), 0);
}

TEST_F(Cli, OutputDirectory) {
  write("e.csv", "time,series,class\n1,0,k\n");
  write("c.ini", kTwoSeries);
  ASSERT_EQ(run("analyze " + path("e.csv").string() + " -c " + path("c.ini").string() + " -o r.csv --output-dir " +
                path("outdir").string()),
            0);
  EXPECT_TRUE(fs::exists(path("outdir") / "r.csv"));
}
