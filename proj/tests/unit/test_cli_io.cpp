#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hmhf/cli_io.hpp"
#include "hmhf/csv.hpp"
#include "hmhf/errors.hpp"
#include "hmhf/snapshot_io.hpp"

using namespace hmhf;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = HMHF_CONFIG_DIR;

class CliIo : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("hmhf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Cheap radial config: a bubble on [0, 2] for a short time.
  static RunConfig small_config(const std::string& label) {
    std::istringstream in("[run]\nlabel = " + label +
                          "\nseed = 5\n[grid]\nh = 0.02\nr_max = 2\n[initial]\nkind = perturbed-bubble\n"
                          "amplitude = 0.3\n[flow]\nt_final = 0.02\ndt_max = 1e-3\nsnapshot_interval = 0.005\n"
                          "[analysis]\nmode = global\n");
    return parse_run_config(in, label);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliIo, SimulateWritesRunDirectory) {
  std::ostringstream log;
  const SimulateOutcome out = simulate(small_config("a"), root_ / "a", log);
  ASSERT_EQ(out.status, exit_ok) << log.str();
  for (const char* f : {run_files::config, run_files::time_series, run_files::verdict, run_files::snapshot_index})
    EXPECT_TRUE(fs::exists(root_ / "a" / f)) << f;
  EXPECT_EQ(out.snapshot_count, 5u);
  const CsvTable ts = read_csv_file(root_ / "a" / run_files::time_series);
  EXPECT_EQ(ts.meta.at("kind"), "time-series");
  EXPECT_EQ(ts.meta.at("config_hash"), hash_hex(small_config("a").hash()));
  EXPECT_EQ(ts.meta.at("seed"), "5");
  EXPECT_EQ(load_run_config(root_ / "a" / run_files::config).canonical(), small_config("a").canonical());
  EXPECT_EQ(load_run_snapshots(root_ / "a").size(), 5u);
}

TEST_F(CliIo, UnwritableDirectoryLeavesNothing) {
  std::ofstream(root_ / "file") << "x";
  std::ostringstream log;
  const SimulateOutcome out = simulate(small_config("b"), root_ / "file" / "run", log);
  EXPECT_EQ(out.status, exit_io);
  EXPECT_FALSE(log.str().empty());
  EXPECT_FALSE(fs::exists(root_ / "file" / "run"));
  EXPECT_EQ(cmd_simulate(kConfigs / "stationary.ini", root_ / "file" / "run", log), exit_io);
}

TEST_F(CliIo, BadConfigGivesConfigExit) {
  std::ofstream(root_ / "bad.ini") << "[grid]\nspacing = 1\n";
  std::ostringstream log;
  EXPECT_EQ(cmd_simulate(root_ / "bad.ini", root_ / "out", log), exit_config);
  EXPECT_NE(log.str().find("grid.spacing"), std::string::npos);
  EXPECT_FALSE(fs::exists(root_ / "out"));
}

TEST_F(CliIo, AnalyzeStationaryRunFindsNoCollisions) {
  std::ostringstream log;
  ASSERT_EQ(cmd_simulate(kConfigs / "stationary.ini", root_ / "s", log), exit_ok) << log.str();
  const AnalysisOutcome an = analyze(root_ / "s", {}, log);
  ASSERT_EQ(an.status, exit_ok) << log.str();
  ASSERT_EQ(an.series.size(), 1u);
  EXPECT_TRUE(detect_collisions(an.series[0]).empty());
  for (const char* f : {"delta_0.csv", "fits_0.txt", "collisions_0.csv", "durations_0.csv", "quantization_0.csv"})
    EXPECT_TRUE(fs::exists(root_ / "s" / f)) << f;
  const CsvTable c = read_csv_file(root_ / "s" / "collisions_0.csv");
  EXPECT_TRUE(c.rows.empty());
  EXPECT_EQ(c.columns, kCollisionColumns);
  const CsvTable d = read_csv_file(root_ / "s" / "delta_0.csv");
  EXPECT_EQ(d.meta.at("mode"), "global");
  EXPECT_EQ(d.rows.size(), an.series[0].records.size());

  EXPECT_EQ(cmd_detect_collisions(root_ / "s" / "delta_0.csv", {}, 0.1, root_ / "s" / "again", log), exit_ok);
  EXPECT_TRUE(read_csv_file(root_ / "s" / "again_collisions.csv").rows.empty());
  EXPECT_EQ(cmd_make_report(root_ / "s", root_ / "report", log), exit_ok);
  EXPECT_TRUE(fs::exists(root_ / "report" / "report.json"));
  EXPECT_TRUE(fs::exists(root_ / "report" / "delta_0.csv"));
}

TEST_F(CliIo, CorruptSnapshotIsIoErrorNamingFile) {
  std::ostringstream log;
  ASSERT_EQ(simulate(small_config("c"), root_ / "c", log).status, exit_ok);
  const fs::path snap = root_ / "c" / run_files::snapshot_dir / "snap_00002.bin";
  ASSERT_TRUE(fs::exists(snap));
  {
    std::fstream f(snap, std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXXX", 5);
  }
  std::ostringstream alog;
  EXPECT_EQ(cmd_analyze(root_ / "c", {}, alog), exit_io);
  EXPECT_NE(alog.str().find("snap_00002.bin"), std::string::npos) << alog.str();
  EXPECT_THROW(read_snapshot_file(snap), FormatError);
}

TEST_F(CliIo, FitBubblesOnSnapshot) {
  const auto g = RadialGrid::graded(1, 1e-4, 0.01, 2.0, 1.02);
  write_snapshot_file(root_ / "s.bin",
                      sample_radial(g, [](double r) { return 2 * std::atan(r / 0.01); }, 0.0));
  std::ostringstream log;
  ASSERT_EQ(cmd_fit_bubbles(root_ / "s.bin", {{0, 0}, 0.5}, 0.01, 0.0, root_ / "fit.csv", log), exit_ok)
      << log.str();
  const CsvTable t = read_csv_file(root_ / "fit.csv");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.number(0, "M"), 1.0);
  EXPECT_TRUE(fs::exists(root_ / "fit.txt"));
  EXPECT_EQ(cmd_fit_bubbles(root_ / "missing.bin", {{0, 0}, 0.5}, 0.01, 0.0, root_ / "x.csv", log), exit_io);
}

TEST_F(CliIo, BatchRunsAndReportsFailures) {
  for (const char* name : {"p", "q"}) {
    std::ofstream(root_ / (std::string(name) + ".ini")) << small_config(name).canonical();
  }
  std::ofstream(root_ / "m.ini") << "[batch]\nwidth = 2\n[runs]\np = p.ini\nbroken = nothere.ini\nq = q.ini\n";
  std::ostringstream log;
  EXPECT_EQ(cmd_batch(root_ / "m.ini", root_ / "out", log), exit_ok) << log.str();
  const CsvTable s = read_csv_file(root_ / "out" / run_files::summary);
  ASSERT_EQ(s.rows.size(), 3u);
  const std::size_t verdict = s.column("verdict");
  const std::size_t error = s.column("error");
  EXPECT_EQ(s.rows[0][0], "p");
  EXPECT_EQ(s.rows[0][verdict], "reached-final-time");
  EXPECT_TRUE(s.rows[0][error].empty());
  EXPECT_EQ(s.rows[1][verdict], "failed");
  EXPECT_NE(s.rows[1][error].find("nothere.ini"), std::string::npos);
  EXPECT_EQ(s.rows[2][verdict], "reached-final-time");
  EXPECT_TRUE(fs::exists(root_ / "out" / "q" / "delta_0.csv"));

  std::ofstream(root_ / "all_bad.ini") << "[runs]\nx = none.ini\n";
  EXPECT_EQ(cmd_batch(root_ / "all_bad.ini", root_ / "out2", log), exit_failure);
}

TEST_F(CliIo, SameConfigGivesIdenticalOutputs) {
  std::ostringstream log;
  RunConfig c = load_run_config(kConfigs / "cartesian_noise.ini");
  c.flow.t_final = 0.005;
  ASSERT_EQ(simulate(c, root_ / "x", log).status, exit_ok);
  ASSERT_EQ(simulate(c, root_ / "y", log).status, exit_ok);
  for (const char* f : {run_files::time_series, run_files::verdict, run_files::snapshot_index, run_files::config})
    EXPECT_EQ(slurp(root_ / "x" / f), slurp(root_ / "y" / f)) << f;
  EXPECT_EQ(slurp(root_ / "x" / run_files::snapshot_dir / "snap_00001.bin"),
            slurp(root_ / "y" / run_files::snapshot_dir / "snap_00001.bin"));
}
