#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>

#include "penn/errors.hpp"
#include "penn/synth.hpp"

using namespace penn;

namespace {

SyntheticGenConfig gen(Regime r, std::size_t n, std::uint64_t seed, double noise) {
    SyntheticGenConfig c;
    c.regime = r;
    c.count = n;
    c.seed = seed;
    c.noise_sd = noise;
    return c;
}

OperatingPoint cruise(double mach, double altitude) {
    OperatingPoint op;
    op.mach = mach;
    op.altitude_m = altitude;
    op.turbine_throttle = 0.2;
    op.ramjet_throttle = 0.6;
    op.mixer_setting = 0.5;
    op.nozzle_setting = 0.5;
    return op;
}

}  // namespace

TEST(Synth, DeterministicAndThreadIndependent) {
    const auto cfg = gen(Regime::HighSpeed, 400, 9, 0.002);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = synth_generate(cfg);
    omp_set_num_threads(3);
    const auto b = synth_generate(cfg);
    omp_set_num_threads(saved);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, synth_generate(gen(Regime::HighSpeed, 400, 10, 0.002)));
    // A prefix of a longer run is the shorter run.
    const auto longer = synth_generate(gen(Regime::HighSpeed, 800, 9, 0.002));
    EXPECT_TRUE(std::equal(a.begin(), a.end(), longer.begin()));
}

TEST(Synth, NoiseFreeTargetsAreTheSurrogate) {
    for (Regime r : {Regime::HighSpeed, Regime::LowSpeed}) {
        for (const auto& rec : synth_generate(gen(r, 300, 4, 0.0))) {
            const auto t = surrogate_targets(rec.inputs);
            EXPECT_NEAR(rec.thrust, t.thrust, 1e-10 * std::max(1.0, std::fabs(t.thrust)));
            EXPECT_NEAR(rec.impulse, t.impulse, 1e-10 * std::max(1.0, t.impulse));
        }
    }
}

TEST(Synth, NoiseIsSmallAndRelative) {
    const auto clean = synth_generate(gen(Regime::HighSpeed, 2000, 4, 0.0));
    const auto noisy = synth_generate(gen(Regime::HighSpeed, 2000, 4, 0.01));
    double sq = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        EXPECT_EQ(clean[i].inputs, noisy[i].inputs);
        sq += std::pow(noisy[i].thrust / clean[i].thrust - 1.0, 2);
    }
    EXPECT_NEAR(std::sqrt(sq / 2000.0), 0.01, 0.001);
    EXPECT_THROW(synth_generate(gen(Regime::HighSpeed, 1, 0, -1.0)), ParameterError);
}

TEST(Synth, RecordsAreValidAndRegimesDiffer) {
    const auto hs = synth_generate(gen(Regime::HighSpeed, 10000, 1, 0.002));
    const auto ls = synth_generate(gen(Regime::LowSpeed, 10000, 1, 0.006));
    for (std::size_t i = 0; i < hs.size(); ++i) {
        ASSERT_NO_THROW(validate_record(hs[i], i));
        ASSERT_NO_THROW(validate_record(ls[i], i));
        EXPECT_GE(hs[i].inputs[column::kMach], 2.0);
        EXPECT_LE(ls[i].inputs[column::kMach], 2.3);
    }
    const auto zero_ls = std::count_if(ls.begin(), ls.end(), [](const auto& r) { return r.impulse == 0.0; });
    const auto zero_hs = std::count_if(hs.begin(), hs.end(), [](const auto& r) { return r.impulse == 0.0; });
    EXPECT_GT(zero_ls, 0);
    EXPECT_LT(zero_ls, 1000);
    EXPECT_EQ(zero_hs, 0);
    for (const auto& r : ls) {
        if (r.thrust <= 0.0) EXPECT_EQ(r.impulse, 0.0);
    }
}

TEST(Synth, HighSpeedTargetsSpanTwoOrdersOfMagnitude) {
    const auto hs = synth_generate(gen(Regime::HighSpeed, 10000, 1, 0.002));
    auto [lo, hi] = std::minmax_element(hs.begin(), hs.end(),
                                        [](const auto& a, const auto& b) { return a.thrust < b.thrust; });
    EXPECT_GT(lo->thrust, 0.0);
    EXPECT_GE(hi->thrust / lo->thrust, 100.0);
}

TEST(Synth, ThrustRisesWithRamjetFuel) {
    auto x = engine_inputs(cruise(3.0, 20000.0));
    double prev = surrogate_targets(x).thrust;
    const double base = x[column::kRamjetFuel];
    for (int k = 1; k <= 10; ++k) {
        x[column::kRamjetFuel] = base * (1.0 + 0.1 * k);
        const double t = surrogate_targets(x).thrust;
        EXPECT_GT(t, prev) << "step " << k;
        prev = t;
    }
}

TEST(Synth, IntakeBehaviour) {
    // Pressure recovery falls with supersonic Mach.
    double prev = 2.0;
    for (double m = 1.2; m <= 4.0; m += 0.4) {
        const double sigma = engine_inputs(cruise(m, 20000.0))[column::kPressureRecovery];
        EXPECT_LT(sigma, prev) << "mach " << m;
        EXPECT_GT(sigma, 0.0);
        prev = sigma;
    }
    // Mass flow rises with Mach at fixed altitude and with pressure (lower altitude).
    EXPECT_GT(engine_inputs(cruise(3.0, 20000.0))[column::kMassFlow],
              engine_inputs(cruise(2.5, 20000.0))[column::kMassFlow]);
    EXPECT_GT(engine_inputs(cruise(3.0, 15000.0))[column::kMassFlow],
              engine_inputs(cruise(3.0, 20000.0))[column::kMassFlow]);
}

TEST(Synth, StandardAtmosphere) {
    const auto sl = standard_atmosphere(0.0);
    EXPECT_NEAR(sl[0], 101325.0, 1.0);
    EXPECT_NEAR(sl[1], 288.15, 0.01);
    const auto strat = standard_atmosphere(20000.0);
    EXPECT_NEAR(strat[0], 5474.9, 5.0);
    EXPECT_NEAR(strat[1], 216.65, 0.01);
    const auto upper = standard_atmosphere(25000.0);
    EXPECT_NEAR(upper[0], 2511.0, 5.0);
    EXPECT_NEAR(upper[1], 221.65, 0.01);
    // No high-speed input column is constant, so every one can be standardized.
    EXPECT_NO_THROW(compute_stats(synth_generate(gen(Regime::HighSpeed, 500, 2, 0.002))));
}

TEST(Synth, RegimeNames) {
    EXPECT_EQ(parse_regime(regime_name(Regime::HighSpeed)), Regime::HighSpeed);
    EXPECT_EQ(parse_regime("low-speed"), Regime::LowSpeed);
    EXPECT_THROW(parse_regime("orbital"), ParameterError);
    EXPECT_EQ(SyntheticGenConfig::default_noise(Regime::LowSpeed), 0.006);
}
