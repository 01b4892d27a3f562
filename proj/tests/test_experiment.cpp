#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrf_flock/experiment.hpp"

using namespace mrf_flock;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mrf_flock_test_" + name);
  fs::remove_all(p);
  return p;
}

Scenario small() {
  Scenario sc = *preset("paper_2d_3");
  sc.ticks = 6;
  return sc;
}

const char* kCsvs[] = {"timeseries.csv", "states.csv", "plans.csv"};

}  // namespace

TEST(FormatNumber, NineSignificantDigits) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
  EXPECT_EQ(format_number(1.6479184330021643), "1.64791843");
  EXPECT_EQ(format_number(-1234567890123.0), "-1.23456789e+12");
  EXPECT_EQ(format_number(std::nullopt), "NA");
  EXPECT_EQ(format_number(std::nan("")), "NA");
}

TEST(CmdRun, ZeroTicksWritesHeadersOnly) {
  const fs::path dir = fresh_dir("zero");
  RunOptions opt;
  opt.ticks = 0;
  cmd_run(small(), dir, opt);
  for (const char* f : kCsvs) EXPECT_EQ(lines(slurp(dir / f)), 1u) << f;
  EXPECT_EQ(slurp(dir / "states.csv"), "tick,robot,px,py,pz,vx,vy,vz,ax,ay,az\n");
}

TEST(CmdRun, RowCountsAndLineEndings) {
  const fs::path dir = fresh_dir("rows");
  const RunOutput out = cmd_run(small(), dir);
  EXPECT_EQ(out.records.size(), 7u);
  EXPECT_EQ(out.plans.size(), 6u);
  EXPECT_EQ(lines(slurp(dir / "timeseries.csv")), 1u + 6u);
  EXPECT_EQ(lines(slurp(dir / "states.csv")), 1u + 6u * 3u);
  EXPECT_EQ(lines(slurp(dir / "plans.csv")), 1u + 6u * 3u);
  for (const char* f : kCsvs) EXPECT_EQ(slurp(dir / f).find('\r'), std::string::npos) << f;
  // wall times are not measured output unless asked for
  std::istringstream plans(slurp(dir / "plans.csv"));
  std::string header, row;
  std::getline(plans, header);
  std::getline(plans, row);
  EXPECT_NE(row.find(",NA,"), std::string::npos) << row;
}

TEST(CmdRun, ByteIdenticalAcrossRunsAndThreadCounts) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  RunOptions one, many;
  one.threads = 1;
  many.threads = 4;
  cmd_run(small(), a, one);
  cmd_run(small(), b, many);
  for (const char* f : kCsvs) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(CmdRun, ResolvedScenarioIsWritten) {
  const fs::path dir = fresh_dir("resolved");
  RunOptions opt;
  opt.ticks = 2;
  cmd_run(small(), dir, opt);
  const Scenario back = load_scenario((dir / "scenario.json").string());
  Scenario expected = small();
  expected.ticks = 2;
  expected.output_dir = dir.string();
  EXPECT_EQ(back, expected);
}

TEST(CmdRun, TimingFillsWallTimeColumns) {
  const fs::path dir = fresh_dir("timing");
  RunOptions opt;
  opt.timing = true;
  opt.ticks = 2;
  cmd_run(small(), dir, opt);
  std::istringstream plans(slurp(dir / "plans.csv"));
  std::string header, row;
  std::getline(plans, header);
  std::getline(plans, row);
  EXPECT_EQ(row.find(",NA,"), std::string::npos) << row;
}

TEST(CmdRun, FailedRunLeavesNoPartialFiles) {
  const fs::path dir = fresh_dir("failed");
  Scenario sc = small();
  sc.swarm.placement.min_separation = 50.0;  // valid config, but placement is impossible
  EXPECT_THROW(cmd_run(sc, dir), InvalidArgument);
  for (const char* f : kCsvs) EXPECT_FALSE(fs::exists(dir / f)) << f;
  EXPECT_FALSE(fs::exists(dir / "scenario.json"));
}

TEST(CmdSweep, SingleCellMatchesRun) {
  const fs::path dir = fresh_dir("sweep1");
  const auto cells = cmd_sweep(small(), {2}, {0.5}, dir);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].status, "ok");
  EXPECT_EQ(cells[0].plans, 18u);
  EXPECT_EQ(cells[0].candidates, 25u);
  // speed-capped search spaces can shrink below 25 once robots move
  EXPECT_GT(cells[0].pair_terms_per_sweep, 0.0);
  EXPECT_LE(cells[0].pair_terms_per_sweep, 3.0 * 2.0 * 25.0 * 25.0);
  EXPECT_GT(cells[0].mean_wall_time, 0.0);
  EXPECT_EQ(lines(slurp(dir / "sweep.csv")), 2u);
  EXPECT_TRUE(fs::exists(dir / sweep_cell_dir_name(2, 0.5) / "timeseries.csv"));
}

TEST(CmdSweep, FailingCellIsRecordedAndSweepContinues) {
  const fs::path dir = fresh_dir("sweep_bad");
  const auto cells = cmd_sweep(small(), {5, 1}, {0.5, 0.3}, dir);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_NE(cells[0].status.find("swarm.k"), std::string::npos) << cells[0].status;
  EXPECT_EQ(cells[1].status.rfind("error", 0), 0u);
  EXPECT_EQ(cells[2].status, "ok");
  EXPECT_EQ(cells[2].plans, 18u);
  EXPECT_NE(cells[3].status.find("d_u"), std::string::npos) << cells[3].status;
  EXPECT_EQ(lines(slurp(dir / "sweep.csv")), 5u);
  EXPECT_THROW(cmd_sweep(small(), {}, {0.5}, dir), InvalidArgument);
}

TEST(CmdSweep, CostGrowsWithK) {
  Scenario sc = *preset("paper_2d_10");
  sc.ticks = 2;
  const auto cells = cmd_sweep(sc, {3, 5, 7, 9}, {0.5}, fresh_dir("sweep_k"));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ASSERT_EQ(cells[i].status, "ok");
    const double n = static_cast<double>(cells[i].k + 1);
    EXPECT_DOUBLE_EQ(cells[i].pair_terms_per_sweep, n * (n - 1.0) * 625.0);
    if (i) {
      EXPECT_GT(cells[i].pair_terms_per_sweep, cells[i - 1].pair_terms_per_sweep);
    }
  }
}

TEST(CompareVicsek, WritesPairedSeries) {
  const fs::path dir = fresh_dir("compare");
  Scenario sc = *preset("vicsek_compare");
  RunOptions opt;
  opt.ticks = 10;
  const Comparison cmp = cmd_compare_vicsek(sc, dir, opt);
  EXPECT_EQ(cmp.mfa.size(), 11u);
  EXPECT_EQ(cmp.vicsek.size(), 11u);
  // identical starting positions
  EXPECT_EQ(cmp.mfa[0].mean_pairwise_distance, cmp.vicsek[0].mean_pairwise_distance);
  EXPECT_EQ(lines(slurp(dir / "compare.csv")), 12u);
  EXPECT_EQ(lines(slurp(dir / "compare_summary.csv")), 3u);
}

TEST(ConsensusHelpers, FirstTickAndBand) {
  std::vector<MetricsRecord> recs(4);
  for (std::size_t t = 0; t < recs.size(); ++t) {
    recs[t].tick = t;
    recs[t].time = 0.5 * static_cast<double>(t);
    recs[t].order_parameter = 0.5 + 0.2 * static_cast<double>(t);
    recs[t].mean_nn_distance = t < 2 ? 5.0 : 1.0;
  }
  EXPECT_EQ(first_consensus_tick(recs), std::optional<std::size_t>(3));
  EXPECT_FALSE(first_consensus_tick(recs, 1.5));
  EXPECT_TRUE(nn_band_held(recs, 1.0, 0.9, 1.1));
  EXPECT_FALSE(nn_band_held(recs, 0.5, 0.9, 1.1));
  EXPECT_FALSE(nn_band_held(recs, 10.0, 0.9, 1.1));
}

#ifdef MRF_FLOCK_CLI_PATH
namespace {

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MRF_FLOCK_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, RunWritesCsvs) {
  const fs::path dir = fresh_dir("cli_run");
  EXPECT_EQ(cli("run --scenario paper_2d_3 --ticks 3 --seed 4 --order parallel --out " + dir.string(),
                fs::temp_directory_path() / "mrf_flock_cli_run.log"),
            0);
  for (const char* f : kCsvs) EXPECT_EQ(lines(slurp(dir / f)), f == std::string("timeseries.csv") ? 4u : 10u) << f;
  const Scenario sc = load_scenario((dir / "scenario.json").string());
  EXPECT_EQ(sc.swarm.seed, 4u);
  EXPECT_EQ(sc.swarm.order, UpdateOrder::parallel);
}

TEST(Cli, InvalidScenarioReportsFieldPath) {
  const fs::path bad = fs::temp_directory_path() / "mrf_flock_cli_bad.json";
  std::ofstream(bad) << R"({"swarm": {"n_robots": 2, "k": 5}})";
  const fs::path log = fs::temp_directory_path() / "mrf_flock_cli_bad.log";
  EXPECT_EQ(cli("run --scenario " + bad.string() + " --out " + fresh_dir("cli_bad").string(), log), 2);
  EXPECT_NE(slurp(log).find("swarm.k"), std::string::npos) << slurp(log);
}

TEST(Cli, RejectsUnknownFlagValues) {
  const fs::path log = fs::temp_directory_path() / "mrf_flock_cli_flags.log";
  EXPECT_NE(cli("run --scenario paper_2d_3 --order random", log), 0);
  EXPECT_NE(cli("run --scenario paper_2d_3 --roost-mode repulsive", log), 0);
  EXPECT_NE(cli("fly", log), 0);
}

TEST(Cli, OracleTestPasses) {
  const fs::path log = fs::temp_directory_path() / "mrf_flock_cli_oracle.log";
  EXPECT_EQ(cli("oracle-test --instances 20", log), 0);
  EXPECT_EQ(slurp(log).find("FAIL"), std::string::npos) << slurp(log);
  EXPECT_EQ(cli("oracle-test --max-members 4 --max-candidates 100", log), 2);
}
#endif
