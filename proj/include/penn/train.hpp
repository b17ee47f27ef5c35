#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "penn/checkpoint.hpp"
#include "penn/dataset.hpp"
#include "penn/kvconfig.hpp"
#include "penn/model_spec.hpp"
#include "penn/objectives.hpp"
#include "penn/schedule.hpp"
#include "penn/synth.hpp"

namespace penn {

/// Everything that determines one training run.
struct TrainConfig {
    ModelKind model = ModelKind::PennBnf;
    double width = 1.0;
    Target target = Target::Thrust;
    LossKind loss = LossKind::Mare;
    int epochs = 150;
    /// 0 selects the regime default (100 high-speed, 40 low-speed).
    std::size_t batch_size = 0;
    /// Unset selects the default schedule for the model family.
    std::optional<LrSchedule> schedule;
    /// Parameter initialization and mini-batch shuffling.
    std::uint64_t seed = 0;
    /// Train/validation/test partition and subsampling.
    std::uint64_t data_seed = 0;
    SplitRatios split;
    std::size_t subsample = 1;

    /// Exactly one of data_file / generator is used; data_file wins if set.
    std::optional<std::filesystem::path> data_file;
    std::optional<SyntheticGenConfig> generator;
    PredictionPolicy policy;

    ModelSpec model_spec() const;
    LrSchedule effective_schedule() const;
    std::size_t effective_batch_size() const;
    /// ParameterError / ConfigError on an inconsistent config.
    void validate() const;

    /// Keys accepted by from_kv.
    static const std::set<std::string>& known_keys();
    /// Applies keys over `base` (or the defaults); ConfigError on unknown keys
    /// or bad values.
    static TrainConfig from_kv(const KvConfig& kv, TrainConfig base);
    static TrainConfig from_kv(const KvConfig& kv);
    /// Canonical key/value echo (round-trips through from_kv).
    std::map<std::string, std::string> to_kv() const;
};

/// Data exactly as a run sees it.
struct PreparedData {
    DatasetSplit split;  ///< train is already subsampled
    NormalizedSplit inputs;
    NormalizationStats stats;
    std::size_t dropped_zero_impulse = 0;
};

/// Load or generate, drop zero-impulse rows, split, subsample, normalize.
/// ConfigError when the config names no data source.
PreparedData prepare_data(const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_mape = 0.0;
    double lr = 0.0;
};

struct MetricsReport {
    std::vector<EpochRecord> history;
    /// Epoch of the retained model; -1 means the initial parameters.
    int best_epoch = -1;
    double best_val_mape = 0.0;
    double final_val_mape = 0.0;
    double train_mape = 0.0;
    double test_mape = 0.0;
    std::size_t param_count = 0;
    std::size_t train_samples = 0;
    double train_seconds = 0.0;
    double inference_seconds = 0.0;  ///< mean single-sample forward, 0 unless measured
    bool converged = true;
    std::string failure;  ///< divergence message when !converged
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
};

struct TrainResult {
    Checkpoint checkpoint;
    MetricsReport report;
};

/// Mini-batch Adam on the prepared data. Keeps the parameters with the lowest
/// validation MAPE (initial parameters included) and evaluates the test split
/// once, on those. Throws TrainingDiverged on a non-finite batch loss.
TrainResult train(const TrainConfig& config, const PreparedData& data);
TrainResult train(const TrainConfig& config);

/// MAPE of the checkpoint on `records` after the prediction policy.
/// ContractError on an empty set.
double evaluate(const Checkpoint& ckpt, std::span<const SampleRecord> records,
                const PredictionPolicy& policy = {});
double evaluate_normalized(const Checkpoint& ckpt, const Tensor& normalized, std::span<const double> targets,
                           const PredictionPolicy& policy = {});

/// Per-epoch history as CSV (epoch, train_loss, val_mape, lr).
void write_history_csv(const std::filesystem::path& path, const MetricsReport& report);
/// Human-readable multi-line summary.
std::string summarize(const MetricsReport& report);

}  // namespace penn
