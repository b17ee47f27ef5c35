#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "penn/checkpoint.hpp"

namespace penn {

struct TimingReport {
    std::string model;
    std::size_t param_count = 0;
    std::size_t passes = 0;
    double mean_inference_seconds = 0.0;  ///< per single-sample forward
    double train_seconds = 0.0;           ///< filled by callers that time training
    std::string hardware;
};

/// Mean wall-clock latency of single-sample forward passes, each on its own
/// tape, run on the calling thread only. Records are cycled; at least
/// `passes` forwards are timed after `warmup` untimed ones.
TimingReport bench_timing(const Checkpoint& ckpt, std::span<const SampleRecord> records,
                          std::size_t passes = 10000, std::size_t warmup = 200);

/// CPU model name and logical core count, e.g. "Intel(R) Xeon(R) ... (1 logical cores)".
std::string hardware_description();

}  // namespace penn
