#pragma once

#include <string>

#include "wordbound/errors.hpp"

namespace wordbound::train {

struct LrSchedule {
    long long total_steps = 0;
    long long warmup_steps = 0;
    double peak_lr = 1e-4;
};

// Piecewise linear: 0 → peak over [0, warmup], peak → 0 over [warmup, total].
// lr_at(warmup) == peak exactly; a zero warmup starts at peak.
inline double lr_at(long long step, const LrSchedule& s) {
    if (step < 0 || step > s.total_steps) {
        throw StepOutOfRange("step " + std::to_string(step) + " outside [0, " +
                             std::to_string(s.total_steps) + "]");
    }
    if (s.warmup_steps < 0 || s.warmup_steps > s.total_steps) {
        throw InvalidConfig("warmup must lie within [0, total_steps]");
    }
    if (step < s.warmup_steps) {
        return s.peak_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
    }
    if (step == s.warmup_steps) {
        return s.peak_lr;
    }
    return s.peak_lr * static_cast<double>(s.total_steps - step) /
           static_cast<double>(s.total_steps - s.warmup_steps);
}

}  // namespace wordbound::train
