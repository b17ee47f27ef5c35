#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "penn/kvconfig.hpp"
#include "penn/train.hpp"

namespace penn {

/// Settings shared by every experiment runner. Defaults match the full-size
/// study (50,000 high-speed and 20,000 low-speed samples split 3:1:1, 150
/// epochs, one seed); desk runs shrink counts and add seeds.
struct ExperimentConfig {
    int epochs = 150;
    std::size_t hs_count = 50000;
    std::size_t ls_count = 20000;
    std::optional<std::filesystem::path> hs_data;
    std::optional<std::filesystem::path> ls_data;
    std::optional<double> hs_noise_sd;
    std::optional<double> ls_noise_sd;
    SplitRatios split;
    std::vector<std::uint64_t> seeds{0};
    std::uint64_t data_seed = 0;
    std::uint64_t gen_seed = 1;
    std::vector<Regime> regimes{Regime::HighSpeed, Regime::LowSpeed};
    std::size_t timing_passes = 10000;
    std::vector<std::size_t> hs_factors{1, 5, 20, 200, 500};
    std::vector<std::size_t> ls_factors{1, 5, 20, 100, 200};
    /// Per-run history CSVs go to <out_dir>/runs when set.
    std::optional<std::filesystem::path> out_dir;
    bool parallel = true;
    bool verbose = false;

    static const std::set<std::string>& known_keys();
    /// ConfigError on unknown keys or bad values.
    static ExperimentConfig from_kv(const KvConfig& kv);
};

/// Identity of one training run.
struct RunKey {
    ModelKind model = ModelKind::PennBnf;
    double width = 1.0;
    Target target = Target::Thrust;
    LossKind loss = LossKind::Mare;
    Regime regime = Regime::HighSpeed;
    std::size_t subsample = 1;
    std::uint64_t seed = 0;

    std::string label() const;
    auto operator<=>(const RunKey&) const = default;
};

struct RunOutcome {
    RunKey key;
    bool converged = true;
    std::string failure;
    double test_mape = 0.0;  ///< NaN when the run diverged
    double best_val_mape = 0.0;
    double final_val_mape = 0.0;
    double train_mape = 0.0;
    std::size_t params = 0;
    std::size_t train_samples = 0;
    double train_seconds = 0.0;
};

/// Trains runs on shared, lazily prepared datasets and memoizes outcomes by
/// key, so experiments that overlap pay for each run once. Independent runs
/// execute in parallel (OpenMP) when enabled; each run is itself sequential.
class ExperimentRunner {
public:
    explicit ExperimentRunner(ExperimentConfig config);

    const ExperimentConfig& config() const noexcept { return config_; }
    TrainConfig train_config(const RunKey& key) const;
    const PreparedData& data(Regime regime, std::size_t subsample = 1);

    /// Outcomes in the order of `keys`. A diverged run is recorded as a
    /// non-converged outcome when allow_divergence is set and rethrown
    /// otherwise.
    std::vector<RunOutcome> run(const std::vector<RunKey>& keys, bool allow_divergence = false);

    std::size_t runs_trained() const noexcept { return trained_; }

private:
    RunOutcome run_one(const RunKey& key, bool allow_divergence);

    ExperimentConfig config_;
    std::map<RunKey, RunOutcome> cache_;
    std::map<std::pair<Regime, std::size_t>, PreparedData> data_;
    std::size_t trained_ = 0;
};

/// Rows of strings with a header; written as CSV or aligned text.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write_csv(const std::filesystem::path& path) const;
    std::string to_text() const;
};

struct ExperimentTables {
    Table main;  ///< same rows and columns as the corresponding published table
    Table runs;  ///< one row per training run
};

/// Mean test MAPE over the configured seeds; NaN if any run diverged.
double seed_mean(const std::vector<RunOutcome>& outcomes, ModelKind model, double width, Target target,
                 LossKind loss, Regime regime, std::size_t subsample = 1);

/// All six models, both targets, each configured regime, MARE loss.
ExperimentTables run_comparative(ExperimentRunner& runner);
/// MLP-Mul and PENN-BNF under MSE, MAE and MARE.
ExperimentTables run_loss_ablation(ExperimentRunner& runner);
/// MLP-Mul and PENN-BNF at every subsample factor; diverged runs are flagged
/// rows rather than errors.
ExperimentTables run_size_dependence(ExperimentRunner& runner);
/// PENN-BNF at every width of the scaling family.
ExperimentTables run_scaling_family(ExperimentRunner& runner);
/// Training time and single-sample latency of the scaling family. Training
/// runs execute one at a time so their wall-clock is not shared.
ExperimentTables run_timing(ExperimentRunner& runner);

}  // namespace penn
