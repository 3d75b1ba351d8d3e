#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "basket/pipeline.hpp"

using namespace basket;
namespace fs = std::filesystem;

namespace {

// The full 4-arm preset shrunk to seconds: short chains, few replicates, a 2x2 grid.
constexpr const char* kSmall = R"({
  "preset": "paper-4arm",
  "n_reps": 40,
  "mcmc": {"burn_in": 200, "kept_draws": 1000},
  "grid": {"v0": [1, 4], "sigma0_sq": [1, 4], "half_cauchy_a": [1], "reps_per_point": 10, "refine_reps": 20,
           "refine_top": 1}
})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("basket_pipeline_" + name);
    fs::remove_all(dir);
    return dir;
}

PipelineResult run(Command cmd, const fs::path& dir, unsigned threads, const char* text = kSmall) {
    auto cfg = parse_config(text, "small");
    cfg.output_dir = dir.string();
    PipelineOptions opts;
    opts.threads = threads;
    return run_pipeline(cfg, cmd, opts);
}

}  // namespace

TEST(Pipeline, CommandNames) {
    for (auto c : {Command::optimize_prior, Command::calibrate, Command::simulate, Command::oc_table})
        EXPECT_EQ(parse_command(to_string(c)), c);
    EXPECT_FALSE(parse_command("plot").has_value());
}

TEST(Pipeline, OcTableHasOneBlockPerScenarioAndOneRowPerDesign) {
    const auto dir = fresh_dir("table");
    const auto res = run(Command::oc_table, dir, 1);
    ASSERT_EQ(res.exit_code, 0);
    const auto table = slurp(dir / "oc_table.txt");
    std::istringstream in(table);
    std::string line;
    int blocks = 0, design_rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("Scenario", 0) == 0 || line.empty()) continue;
        if (line[0] != ' ') {
            ++blocks;
        } else if (line.find_first_not_of(' ') != std::string::npos && line.find('%') == std::string::npos) {
            ++design_rows;
        }
    }
    EXPECT_EQ(blocks, 8 + 1);  // eight scenarios plus the closing legend line
    EXPECT_EQ(design_rows, 8 * 5);
    EXPECT_NE(table.find("0.20*"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Pipeline, OutputsAreByteIdenticalAcrossRunsAndThreadCounts) {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    ASSERT_EQ(run(Command::simulate, a, 1).exit_code, 0);
    ASSERT_EQ(run(Command::simulate, b, 3).exit_code, 0);
    EXPECT_EQ(slurp(a / "oc.csv"), slurp(b / "oc.csv"));
    ASSERT_EQ(run(Command::optimize_prior, a, 1).exit_code, 0);
    ASSERT_EQ(run(Command::optimize_prior, b, 2).exit_code, 0);
    for (const char* f : {"priors.csv", "trace_OBHM.csv", "trace_COBHM.csv", "trace_AOBHM.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Pipeline, CsvCarriesMetadataHeader) {
    const auto dir = fresh_dir("header");
    auto cfg = parse_config(kSmall, "small");
    cfg.output_dir = dir.string();
    ASSERT_EQ(run_pipeline(cfg, Command::calibrate).exit_code, 0);
    const auto text = slurp(dir / "calibration.csv");
    const auto first = text.substr(0, text.find('\n'));
    EXPECT_EQ(first + "\n", csv_comment_header(parse_config(kSmall, "small")));
    EXPECT_NE(first.find("config_hash="), std::string::npos);
    EXPECT_NE(first.find("base_seed=20240601"), std::string::npos);
    EXPECT_NE(first.find(std::string(tool_version())), std::string::npos);
    fs::remove_all(dir);
}

TEST(Pipeline, DumpChainsWritesIterationColumns) {
    const auto dir = fresh_dir("chains");
    auto cfg = parse_config(kSmall, "small");
    cfg.output_dir = dir.string();
    PipelineOptions opts;
    opts.dump_chains = true;
    ASSERT_EQ(run_pipeline(cfg, Command::simulate, opts).exit_code, 0);
    const auto text = slurp(dir / "chains" / "chain_OBHM.csv");
    EXPECT_NE(text.find("\niteration,theta_1,theta_2,theta_3,theta_4,theta,sigma2\n"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Pipeline, OptimizeWithoutDirectiveIsNotSuccess) {
    const auto dir = fresh_dir("nodirective");
    const auto res = run(Command::optimize_prior, dir, 1, R"({
      "trial": {"arms": [{"p0": 0.05, "p1": 0.2, "max_n": 20, "interims": [10, 20]},
                         {"p0": 0.05, "p1": 0.2, "max_n": 20, "interims": [10, 20]}]},
      "designs": [{"name": "ind", "kind": "independent", "zeta": 0.7, "delta": 0}],
      "scenarios": [{"name": "null", "p": [0.05, 0.05]}]})");
    EXPECT_NE(res.exit_code, 0);
    EXPECT_TRUE(res.artifacts.empty());
    fs::remove_all(dir);
}

TEST(Pipeline, AtomicWriteReplacesTarget) {
    const auto dir = fresh_dir("atomic");
    write_atomic((dir / "x.txt").string(), "one");
    write_atomic((dir / "x.txt").string(), "two");
    EXPECT_EQ(slurp(dir / "x.txt"), "two");
    EXPECT_FALSE(fs::exists(dir / "x.txt.tmp"));
    fs::remove_all(dir);
}
