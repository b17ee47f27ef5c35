#include "penn/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "penn/errors.hpp"

// Surrogate constants below are modelling choices for a stand-in engine. Their
// only job is to keep every relation smooth, monotone in the right direction,
// and give thrust a wide dynamic range.

namespace penn {

namespace {

constexpr double kGamma = 1.4;
constexpr double kGasConstant = 287.05;
constexpr double kCp = 1005.0;
constexpr double kG0 = 9.80665;
constexpr double kFuelHeating = 4.3e7;
constexpr double kCombustionEfficiency = 0.9;
constexpr double kCpHot = 1150.0;

/// Supersonic exit Mach for an area ratio, by bisection.
double exit_mach(double area_ratio) {
    double lo = 1.0, hi = 10.0;
    const double e = (kGamma + 1.0) / (2.0 * (kGamma - 1.0));
    for (int i = 0; i < 100; ++i) {
        const double m = 0.5 * (lo + hi);
        const double a = (1.0 / m) * std::pow((2.0 / (kGamma + 1.0)) * (1.0 + 0.5 * (kGamma - 1.0) * m * m), e);
        if (a < area_ratio) lo = m;
        else hi = m;
    }
    return 0.5 * (lo + hi);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::string regime_name(Regime r) { return r == Regime::HighSpeed ? "hs" : "ls"; }

Regime parse_regime(std::string_view name) {
    const auto n = lower(name);
    if (n == "hs" || n == "high-speed" || n == "high_speed") return Regime::HighSpeed;
    if (n == "ls" || n == "low-speed" || n == "low_speed") return Regime::LowSpeed;
    throw ParameterError("unknown regime '" + std::string(name) + "' (expected hs or ls)");
}

double SyntheticGenConfig::default_noise(Regime r) noexcept {
    return r == Regime::HighSpeed ? 0.002 : 0.006;
}

std::array<double, 2> standard_atmosphere(double h) {
    if (h < 11000.0) {
        const double t = 288.15 - 0.0065 * h;
        return {101325.0 * std::pow(t / 288.15, 5.25588), t};
    }
    if (h < 20000.0) return {22632.06 * std::exp(-(h - 11000.0) / 6341.62), 216.65};
    const double t = 216.65 + 0.001 * (h - 20000.0);
    return {5474.89 * std::pow(t / 216.65, -34.1632), t};
}

std::array<double, kInputCount> engine_inputs(const OperatingPoint& op) {
    const auto [p0, t0] = standard_atmosphere(op.altitude_m);
    const double m = op.mach;
    const double tt = op.flameout ? 0.0 : op.turbine_throttle;
    const double tr = op.flameout ? 0.0 : op.ramjet_throttle;

    const double ram = 1.0 + 0.2 * m * m;
    const double total_t = t0 * ram;
    const double total_p = p0 * std::pow(ram, 3.5);
    const double recovery = m <= 1.0 ? 1.0 : 1.0 - 0.075 * std::pow(m - 1.0, 1.35);
    const double p2 = recovery * total_p;

    const double fan = 0.55 + 0.45 * std::pow(tt, 0.7);
    const double compressor = 0.65 + 0.35 * std::pow(tt, 0.6);
    const double mdot = 0.0404 * 0.6 * p2 / std::sqrt(total_t) * (0.35 + 0.55 * fan);
    const double epr = 1.0 + 2.2 * std::pow(tt, 1.2) * (1.0 - 0.15 * std::min(m, 2.3) / 2.3) + 0.15 * tr;
    const double lever = 20.0 + 110.0 * tt;
    const double opening = 0.3 + 0.7 * tt;
    const double lpt_t = total_t * (1.0 + 1.8 * tt);
    const double lpt_p = p2 * epr * 0.55;

    const double mixer = 0.2 + 0.6 * op.mixer_setting;
    const double combined = op.flameout ? 0.0 : 10.0 + 100.0 * (0.5 * tt + 0.5 * tr);
    const double ramjet_fuel = mdot * 0.035 * tr;
    const double throat = 0.08 + 0.10 * (0.3 * tt + 0.7 * tr);
    const double exit = throat * (1.1 + 0.9 * m / 4.0 + 0.2 * op.nozzle_setting);

    return {p0,  t0,    m,      recovery, mdot,     fan,       compressor,  lpt_t,  p2,
            lpt_p, epr, lever, opening,  mixer, combined, ramjet_fuel, throat, exit};
}

SurrogateTargets surrogate_targets(const std::array<double, kInputCount>& x) {
    namespace c = column;
    const double p0 = x[c::kPressure];
    const double mdot = x[c::kMassFlow];
    const double v0 = x[c::kMach] * std::sqrt(kGamma * kGasConstant * x[c::kTemperature]);

    // Turbine fuel: idle floor plus a lever-driven part, cut when the
    // combined throttle sits at zero.
    const double lever = std::max(x[c::kTurbineLever] - 20.0, 0.0) / 110.0;
    const double lit = std::min(1.0, x[c::kCombinedThrottle] / 10.0);
    const double turbine_fuel =
        mdot * (0.004 + 0.022 * std::pow(lever, 1.1)) * x[c::kTurbineOpening] * lit;
    const double ramjet_fuel = x[c::kRamjetFuel];
    const double fuel = turbine_fuel + ramjet_fuel;

    const double mixer = x[c::kBypassAreaRatio];
    const double nozzle_t = (x[c::kLptTemperature] +
                             kCombustionEfficiency * kFuelHeating * ramjet_fuel / (mdot * kCpHot)) *
                            (1.0 - 0.08 * mixer);
    const double nozzle_p = x[c::kFanInletPressure] * x[c::kPressureRatio] * (0.97 - 0.06 * mixer);
    const double npr = nozzle_p / p0;
    const double jet = npr > 1.0
                           ? std::sqrt(2.0 * kCp * nozzle_t * (1.0 - std::pow(npr, -(kGamma - 1.0) / kGamma)))
                           : 0.0;
    const double exit_area = x[c::kExitArea];
    const double me = exit_mach(exit_area / x[c::kThroatArea]);
    const double pe = nozzle_p * std::pow(1.0 + 0.2 * me * me, -3.5);

    SurrogateTargets out;
    out.thrust = (mdot + fuel) * jet * 0.97 - mdot * v0 + 0.3 * (pe - p0) * exit_area;
    out.impulse = (out.thrust > 0.0 && fuel > 0.0) ? out.thrust / (fuel * kG0) : 0.0;
    return out;
}

std::vector<SampleRecord> synth_generate(const SyntheticGenConfig& cfg) {
    if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
        throw ParameterError("synth_generate: noise_sd must be finite and non-negative");
    }
    std::vector<SampleRecord> out(cfg.count);
    const auto n = static_cast<std::int64_t>(cfg.count);
    const std::uint32_t tag = cfg.regime == Regime::HighSpeed ? 0x4853u : 0x4c53u;

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32), tag};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

        OperatingPoint op;
        if (cfg.regime == Regime::HighSpeed) {
            op.mach = range(2.0, 4.0);
            op.altitude_m = range(14000.0, 26000.0);
            op.turbine_throttle = range(0.0, 0.3);
            op.ramjet_throttle = range(0.3, 1.0);
        } else {
            op.mach = range(0.0, 2.3);
            op.altitude_m = range(0.0, 15000.0);
            op.turbine_throttle = range(0.15, 1.0);
            op.ramjet_throttle = std::clamp((op.mach - 1.2) / 1.1, 0.0, 1.0) * u(rng);
            op.flameout = u(rng) < 0.03;
        }
        op.mixer_setting = u(rng);
        op.nozzle_setting = u(rng);

        SampleRecord r;
        r.inputs = engine_inputs(op);
        const auto t = surrogate_targets(r.inputs);
        std::normal_distribution<double> noise(0.0, 1.0);
        const double e_thrust = noise(rng);
        const double e_impulse = noise(rng);
        r.thrust = t.thrust * (1.0 + cfg.noise_sd * e_thrust);
        r.impulse = t.impulse * (1.0 + cfg.noise_sd * e_impulse);
        out[static_cast<std::size_t>(i)] = r;
    }
    return out;
}

}  // namespace penn
