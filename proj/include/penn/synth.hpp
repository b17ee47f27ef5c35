#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "penn/dataset.hpp"

namespace penn {

/// High-speed-like: Mach 2-4 at 14-26 km, ramjet dominated.
/// Low-speed-like: Mach 0-2.3 at 0-15 km, turbine dominated, occasional
/// flame-out points with negative thrust.
enum class Regime { HighSpeed, LowSpeed };

std::string regime_name(Regime r);
/// "hs" / "ls" (also "high-speed", "low-speed"); ParameterError otherwise.
Regime parse_regime(std::string_view name);

struct SyntheticGenConfig {
    Regime regime = Regime::HighSpeed;
    std::size_t count = 1000;
    double noise_sd = 0.002;  ///< relative sd of the multiplicative target noise
    std::uint64_t seed = 0;

    /// 0.002 for high-speed, 0.006 for low-speed.
    static double default_noise(Regime r) noexcept;
};

/// Latent operating point the 18 inputs are derived from.
struct OperatingPoint {
    double altitude_m = 0.0;
    double mach = 0.0;
    double turbine_throttle = 0.0;  ///< [0, 1]
    double ramjet_throttle = 0.0;   ///< [0, 1]
    double mixer_setting = 0.0;     ///< [0, 1], bypass-to-mixer area
    double nozzle_setting = 0.0;    ///< [0, 1], extra exit-area opening
    bool flameout = false;
};

struct SurrogateTargets {
    double thrust = 0.0;
    double impulse = 0.0;
};

/// Standard atmosphere: static pressure [Pa] and temperature [K].
std::array<double, 2> standard_atmosphere(double altitude_m);

/// Derive the 18 engine inputs for an operating point.
std::array<double, kInputCount> engine_inputs(const OperatingPoint& op);

/// Closed-form noise-free thrust and specific impulse as a function of the
/// 18 inputs only. Specific impulse is 0 when thrust is not positive.
SurrogateTargets surrogate_targets(const std::array<double, kInputCount>& inputs);

/// Deterministic for a given config; each sample index draws from its own
/// random stream, so the result does not depend on the thread count.
std::vector<SampleRecord> synth_generate(const SyntheticGenConfig& config);

}  // namespace penn
