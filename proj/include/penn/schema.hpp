#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace penn {

/// Number of engine inputs per record.
inline constexpr std::size_t kInputCount = 18;

/// Input group sizes in column order: overall working condition, intake,
/// low-speed + high-speed channel, exhaust.
inline constexpr std::array<std::size_t, 4> kGroupDims{3, 2, 11, 2};

/// Canonical CSV header. Column order is part of the file contract: the model
/// partitions inputs by position.
inline constexpr std::array<std::string_view, kInputCount + 2> kColumnNames{
    // overall working condition
    "atm_static_pressure_pa",
    "atm_static_temperature_k",
    "flight_mach",
    // intake system
    "intake_pressure_recovery",
    "intake_mass_flow_kg_s",
    // low-speed channel
    "fan_relative_speed",
    "compressor_relative_speed",
    "lpt_outlet_total_temperature_k",
    "fan_inlet_total_pressure_pa",
    "lpt_outlet_static_pressure_pa",
    "engine_pressure_ratio",
    "turbine_throttle_lever_angle_deg",
    "turbine_outlet_relative_opening",
    // high-speed channel
    "bypass_to_mixer_area_ratio",
    "combined_throttle_angle_deg",
    "ramjet_fuel_flow_kg_s",
    // exhaust system
    "nozzle_throat_area_m2",
    "nozzle_exit_area_m2",
    // targets
    "thrust_n",
    "specific_impulse_s",
};

namespace column {
inline constexpr std::size_t kPressure = 0;
inline constexpr std::size_t kTemperature = 1;
inline constexpr std::size_t kMach = 2;
inline constexpr std::size_t kPressureRecovery = 3;
inline constexpr std::size_t kMassFlow = 4;
inline constexpr std::size_t kFanSpeed = 5;
inline constexpr std::size_t kCompressorSpeed = 6;
inline constexpr std::size_t kLptTemperature = 7;
inline constexpr std::size_t kFanInletPressure = 8;
inline constexpr std::size_t kLptPressure = 9;
inline constexpr std::size_t kPressureRatio = 10;
inline constexpr std::size_t kTurbineLever = 11;
inline constexpr std::size_t kTurbineOpening = 12;
inline constexpr std::size_t kBypassAreaRatio = 13;
inline constexpr std::size_t kCombinedThrottle = 14;
inline constexpr std::size_t kRamjetFuel = 15;
inline constexpr std::size_t kThroatArea = 16;
inline constexpr std::size_t kExitArea = 17;
}  // namespace column

enum class Target { Thrust, Impulse };

std::string target_name(Target t);
/// Accepts "thrust" / "impulse" (also "specific_impulse", "isp"); ParameterError otherwise.
Target parse_target(std::string_view name);

}  // namespace penn
