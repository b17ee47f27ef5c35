#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "penn/errors.hpp"
#include "penn/experiments.hpp"

using namespace penn;

namespace {

ExperimentConfig tiny() {
    ExperimentConfig c;
    c.epochs = 2;
    c.hs_count = 200;
    c.ls_count = 200;
    c.seeds = {0, 1};
    c.hs_factors = {1, 4};
    c.ls_factors = {1, 4};
    c.timing_passes = 20;
    return c;
}

double cell(const Table& t, std::size_t row, const std::string& column) {
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (t.header[i] == column) return std::stod(t.rows.at(row).at(i));
    }
    ADD_FAILURE() << "no column " << column;
    return 0.0;
}

}  // namespace

TEST(Experiments, ComparativeTableStructureAndMeans) {
    ExperimentRunner runner(tiny());
    const auto t = run_comparative(runner);
    ASSERT_EQ(t.main.rows.size(), 6u);
    ASSERT_EQ(t.main.header.size(), 11u);
    EXPECT_EQ(t.main.rows[0][0], "MLP-Res");
    EXPECT_EQ(t.main.rows[3][0], "PENN-BNF");
    EXPECT_EQ(t.main.rows[3][1], "59105");
    // 6 models x 2 regimes x 2 targets x 2 seeds
    EXPECT_EQ(t.runs.rows.size(), 48u);
    EXPECT_EQ(runner.runs_trained(), 48u);

    for (std::size_t r = 0; r < 6; ++r) {
        for (const std::string reg : {"hs", "ls"}) {
            EXPECT_NEAR(cell(t.main, r, reg + "_average"),
                        0.5 * (cell(t.main, r, reg + "_thrust") + cell(t.main, r, reg + "_impulse")), 1e-4);
        }
        EXPECT_NEAR(cell(t.main, r, "synthesis_thrust"),
                    0.5 * (cell(t.main, r, "hs_thrust") + cell(t.main, r, "ls_thrust")), 1e-4);
    }

    // Seed mean of the runs table reproduces the main cell.
    double sum = 0;
    int n = 0;
    for (const auto& row : t.runs.rows) {
        if (row[1] == "penn-bnf" && row[3] == "thrust" && row[5] == "hs") {
            sum += std::stod(row[10]);
            ++n;
        }
    }
    ASSERT_EQ(n, 2);
    EXPECT_NEAR(cell(t.main, 3, "hs_thrust"), sum / 2, 1e-4);
}

TEST(Experiments, RunnerMemoizesAcrossExperiments) {
    ExperimentRunner runner(tiny());
    run_loss_ablation(runner);
    const auto after_loss = runner.runs_trained();
    EXPECT_EQ(after_loss, 2u * 3u * 2u * 2u * 2u);
    const auto size = run_size_dependence(runner);
    // Factor-1 MARE runs were shared with the ablation.
    EXPECT_EQ(runner.runs_trained(), after_loss + 2u * 2u * 2u * 2u);
    ASSERT_EQ(size.main.rows.size(), 8u);
    for (const auto& row : size.main.rows) {
        EXPECT_TRUE(row.back() == "converged" || row.back().rfind("not converged (", 0) == 0) << row.back();
    }
    EXPECT_EQ(size.main.rows[1][3], std::to_string(120 / 4));
}

TEST(Experiments, ScalingAndTimingTables) {
    auto cfg = tiny();
    cfg.regimes = {Regime::HighSpeed};
    cfg.seeds = {0};
    ExperimentRunner runner(cfg);
    const auto s = run_scaling_family(runner);
    ASSERT_EQ(s.main.rows.size(), 5u);
    EXPECT_EQ(s.main.rows[0][0], "PENN-BNF-Down4");
    EXPECT_EQ(s.main.rows[4][1], "924545");
    EXPECT_EQ(s.main.rows[0][5], "");  // low-speed not configured

    const auto timing = run_timing(runner);
    ASSERT_EQ(timing.main.rows.size(), 5u);
    ASSERT_EQ(timing.runs.rows.size(), 5u);
    EXPECT_GT(std::stod(timing.main.rows[2][2]), 0.0);
    EXPECT_FALSE(timing.runs.rows[0].back().empty());
}

TEST(Experiments, SeedMeanFlagsDivergence) {
    RunOutcome a, b;
    a.key.seed = 0;
    a.test_mape = 2.0;
    b.key.seed = 1;
    b.test_mape = 4.0;
    EXPECT_EQ(seed_mean({a, b}, ModelKind::PennBnf, 1.0, Target::Thrust, LossKind::Mare, Regime::HighSpeed), 3.0);
    b.converged = false;
    b.test_mape = std::nan("");
    EXPECT_TRUE(std::isnan(
        seed_mean({a, b}, ModelKind::PennBnf, 1.0, Target::Thrust, LossKind::Mare, Regime::HighSpeed)));
}

TEST(Experiments, ConfigKeys) {
    KvConfig kv;
    kv.set("seeds", "0,1,2");
    kv.set("regimes", "hs");
    kv.set("hs_count", "3200");
    kv.set("hs_factors", "1,10");
    const auto c = ExperimentConfig::from_kv(kv);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(c.regimes, (std::vector<Regime>{Regime::HighSpeed}));
    EXPECT_EQ(c.hs_count, 3200u);
    EXPECT_EQ(c.hs_factors, (std::vector<std::size_t>{1, 10}));
    KvConfig bad;
    bad.set("epoch", "3");
    EXPECT_THROW(ExperimentConfig::from_kv(bad), ConfigError);
}

TEST(Experiments, RunKeyLabelsAreDistinct) {
    RunKey a, b;
    b.seed = 1;
    EXPECT_NE(a.label(), b.label());
    EXPECT_LT(a, b);
}
