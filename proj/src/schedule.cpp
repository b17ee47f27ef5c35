#include "penn/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "penn/errors.hpp"

namespace penn {

LrSchedule LrSchedule::mlp_default() { return {0.01, {80, 120}, 0.1}; }

LrSchedule LrSchedule::penn_default() { return {0.002, {60, 80, 100}, 0.5}; }

void LrSchedule::validate() const {
    if (!(initial_lr > 0.0)) {
        throw ParameterError("lr schedule: initial lr must be positive, got " +
                             std::to_string(initial_lr));
    }
    if (!(decay_factor > 0.0 && decay_factor < 1.0)) {
        throw ParameterError("lr schedule: decay factor must be in (0, 1), got " +
                             std::to_string(decay_factor));
    }
    if (!std::is_sorted(milestones.begin(), milestones.end()) ||
        (!milestones.empty() && milestones.front() < 0)) {
        throw ParameterError("lr schedule: milestones must be sorted and non-negative");
    }
}

double lr_at_epoch(const LrSchedule& schedule, int epoch) {
    if (epoch < 0) throw ParameterError("lr_at_epoch: negative epoch " + std::to_string(epoch));
    const auto passed = std::upper_bound(schedule.milestones.begin(), schedule.milestones.end(), epoch) -
                        schedule.milestones.begin();
    double lr = schedule.initial_lr;
    for (std::ptrdiff_t i = 0; i < passed; ++i) lr *= schedule.decay_factor;
    return lr;
}

}  // namespace penn
