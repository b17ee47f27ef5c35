#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "penn/objectives.hpp"
#include "penn/schema.hpp"
#include "penn/tensor.hpp"

namespace penn {

/// One engine observation: 18 inputs in schema column order, two targets.
struct SampleRecord {
    std::array<double, kInputCount> inputs{};
    double thrust = 0.0;   ///< [N]
    double impulse = 0.0;  ///< specific impulse [s]

    double target(Target t) const noexcept { return t == Target::Thrust ? thrust : impulse; }
    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// SchemaError (naming `row`) unless every field is finite, Mach >= 0, the
/// intake pressure recovery lies in (0, 1] and both nozzle areas are positive.
void validate_record(const SampleRecord& record, std::size_t row);

struct LoadResult {
    std::vector<SampleRecord> records;
    std::size_t dropped_zero_impulse = 0;
};

/// Parse the canonical 20-column CSV. Header names and order must match
/// kColumnNames exactly. Zero-impulse rows are dropped (and counted) when the
/// policy says so.
LoadResult read_csv(std::istream& in, const PredictionPolicy& policy = {});
LoadResult load_csv(const std::filesystem::path& path, const PredictionPolicy& policy = {});

/// Shortest round-trip decimal formatting.
void write_csv(std::ostream& out, std::span<const SampleRecord> records);
void write_csv(const std::filesystem::path& path, std::span<const SampleRecord> records);

/// Removes records whose specific impulse is exactly 0; returns how many.
std::size_t drop_zero_impulse(std::vector<SampleRecord>& records);

struct SplitRatios {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

struct DatasetSplit {
    std::vector<SampleRecord> train;
    std::vector<SampleRecord> validation;
    std::vector<SampleRecord> test;
    SplitRatios ratios;
    std::uint64_t seed = 0;
};

/// Seeded shuffle then partition; train and validation sizes are
/// round(n * ratio), test takes the remainder. ParameterError unless ratios
/// are non-negative and sum to 1.
DatasetSplit split(std::vector<SampleRecord> records, const SplitRatios& ratios, std::uint64_t seed);

/// Per-feature and per-target mean / standard deviation (population) of a
/// training split.
struct NormalizationStats {
    std::array<double, kInputCount> input_mean{};
    std::array<double, kInputCount> input_sd{};
    double thrust_mean = 0.0;
    double thrust_sd = 1.0;
    double impulse_mean = 0.0;
    double impulse_sd = 1.0;

    double target_mean(Target t) const noexcept { return t == Target::Thrust ? thrust_mean : impulse_mean; }
    double target_sd(Target t) const noexcept { return t == Target::Thrust ? thrust_sd : impulse_sd; }
    friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;
};

/// StatsError on an empty split or a constant column (named).
NormalizationStats compute_stats(std::span<const SampleRecord> train);

/// z-scored inputs as a [N x 18] tensor.
Tensor normalize_inputs(std::span<const SampleRecord> records, const NormalizationStats& stats);
Tensor denormalize_inputs(const Tensor& normalized, const NormalizationStats& stats);

struct NormalizedSplit {
    Tensor train;
    Tensor validation;
    Tensor test;
};

/// z-score all three splits with statistics taken from the training split.
/// Targets stay in physical units.
std::pair<NormalizedSplit, NormalizationStats> normalize(const DatasetSplit& split);

std::vector<double> targets_of(std::span<const SampleRecord> records, Target target);

/// Uniform sample without replacement of floor(n / factor) records, in their
/// original order. factor 1 returns the input unchanged. ParameterError when
/// factor < 1 or the result would be empty.
std::vector<SampleRecord> subsample(std::span<const SampleRecord> train, std::size_t factor,
                                    std::uint64_t seed);

}  // namespace penn
