#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "penn/checkpoint.hpp"
#include "penn/dataset.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string output;
};

Run cli(const std::string& args) {
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() / ("penn_cli_out_" + std::to_string(++counter) + ".txt");
    const std::string cmd = std::string(PENN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream s;
    s << in.rdbuf();
    fs::remove(log);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("penn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

}  // namespace

TEST_F(Cli, CountParams) {
    auto r = cli("count-params --model penn-bnf");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.output, "59105\n");
    r = cli("count-params --model penn-bnf --width 4");
    EXPECT_EQ(r.output, "924545\n");
    r = cli("count-params --all");
    EXPECT_NE(r.output.find("PENN-CAWF,71873"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("MLP-Mul,83937"), std::string::npos);
}

TEST_F(Cli, GenerateTrainEvaluate) {
    const fs::path csv = dir / "hs.csv";
    auto r = cli("gen-data --regime hs --count 300 --seed 4 --output " + csv.string());
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(penn::load_csv(csv).records.size(), 300u);
    const std::string first = slurp(csv);
    cli("gen-data --regime hs --count 300 --seed 4 --output " + csv.string());
    EXPECT_EQ(slurp(csv), first);

    r = cli("-o " + dir.string() + " train --model penn-abf --epochs 2 --data " + csv.string() +
            " --set batch_size=50");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "model.ckpt"));
    EXPECT_TRUE(fs::exists(dir / "train_history.csv"));
    const std::string metrics = slurp(dir / "train_metrics.csv");
    EXPECT_NE(metrics.find("config.model,penn-abf"), std::string::npos) << metrics;
    EXPECT_NE(metrics.find("test_mape,"), std::string::npos);
    EXPECT_NE(metrics.find("\"60,80,100\""), std::string::npos);
    EXPECT_EQ(penn::load_checkpoint(dir / "model.ckpt").model.spec().kind, penn::ModelKind::PennAbf);

    r = cli("eval --checkpoint " + (dir / "model.ckpt").string() + " --data " + csv.string());
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("MAPE"), std::string::npos);

    r = cli("bench --checkpoint " + (dir / "model.ckpt").string() + " --passes 50");
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("us per single-sample forward"), std::string::npos);
}

TEST_F(Cli, ConfigFileAndOverrides) {
    const fs::path cfg = dir / "run.cfg";
    std::ofstream(cfg) << "# tiny\nmodel = mlp-mul\nregime = ls\ncount = 200\nepochs = 1\n";
    auto r = cli("-o " + dir.string() + " train -c " + cfg.string() + " --set target=impulse");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto ckpt = penn::load_checkpoint(dir / "model.ckpt");
    EXPECT_EQ(ckpt.model.spec().kind, penn::ModelKind::MlpMul);
    EXPECT_EQ(ckpt.model.spec().target, penn::Target::Impulse);
}

TEST_F(Cli, ErrorsUseDistinctExitCodes) {
    auto r = cli("train --regime hs --set no_such_key=1");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("no_such_key"), std::string::npos) << r.output;
    r = cli("train --model penn-bnf");
    EXPECT_EQ(r.code, 2);
    r = cli("frobnicate");
    EXPECT_EQ(r.code, 2);
    const fs::path bad = dir / "bad.csv";
    std::ofstream(bad) << "a,b\n1,2\n";
    r = cli("-o " + dir.string() + " train --data " + bad.string());
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("header"), std::string::npos) << r.output;
}

TEST_F(Cli, ExperimentWritesTables) {
    auto r = cli("-o " + dir.string() +
                 " experiment scaling --epochs 1 --hs-count 200 --set regimes=hs --set timing_passes=10");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "scaling.csv"));
    EXPECT_TRUE(fs::exists(dir / "scaling_runs.csv"));
    EXPECT_NE(slurp(dir / "scaling.csv").find("PENN-BNF-Up4"), std::string::npos);
}
