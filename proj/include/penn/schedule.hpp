#pragma once

#include <vector>

namespace penn {

/// Step decay at fixed epoch milestones (epochs counted from 0).
struct LrSchedule {
    double initial_lr = 0.002;
    std::vector<int> milestones;
    double decay_factor = 0.5;

    /// Baseline MLP schedule: 0.01, x0.1 at epochs 80 and 120.
    static LrSchedule mlp_default();
    /// 0.002, x0.5 at epochs 60, 80 and 100.
    static LrSchedule penn_default();

    /// Throws ParameterError on a non-positive lr, a factor outside (0, 1), or
    /// unsorted/negative milestones.
    void validate() const;
};

/// initial_lr * decay_factor^(number of milestones <= epoch)
double lr_at_epoch(const LrSchedule& schedule, int epoch);

}  // namespace penn
