#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "penn/dataset.hpp"
#include "penn/model.hpp"
#include "penn/objectives.hpp"

namespace penn {

/// A trained model plus the statistics it was trained against.
///
/// The network's raw output h is read in standardized target units: the
/// physical prediction is target_mean + target_sd * h, with both constants
/// taken from the training split. Losses and metrics are computed on the
/// physical value.
struct Checkpoint {
    Model model;
    NormalizationStats stats;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary container:
///   "PENNCKPT", u32 version, u32 header length, header text
///   (arch, model, width, input_dims, target, layers as key=value lines),
///   normalization statistics, then per layer u32 out, u32 in, weights
///   row-major, bias. All reals are little-endian IEEE-754 binary64.
void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// ContractError on a bad magic, version, header or truncated payload.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Physical-unit prediction on a tape: target_mean + target_sd * forward(x).
Var decoded_forward(Tape& tape, const Model& model, std::span<const LayerVars> bound, Var x,
                    const NormalizationStats& stats);

/// Batched inference in physical units; no policy applied. `normalized` is
/// [N x 18].
std::vector<double> predict_raw(const Checkpoint& ckpt, const Tensor& normalized);

/// Normalize, predict, then apply the prediction policy.
std::vector<double> predict(const Checkpoint& ckpt, std::span<const SampleRecord> records,
                            const PredictionPolicy& policy = {});

}  // namespace penn
