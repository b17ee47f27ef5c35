#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "penn/dataset.hpp"
#include "penn/errors.hpp"
#include "penn/synth.hpp"

using namespace penn;

namespace {

std::vector<SampleRecord> make_records(std::size_t n, Regime regime = Regime::HighSpeed,
                                       std::uint64_t seed = 3) {
    SyntheticGenConfig cfg;
    cfg.regime = regime;
    cfg.count = n;
    cfg.seed = seed;
    return synth_generate(cfg);
}

std::string header_line() {
    std::string h;
    for (std::size_t i = 0; i < kColumnNames.size(); ++i) h += (i ? "," : "") + std::string(kColumnNames[i]);
    return h;
}

// Every record gets a distinct tag in the first input so sets can be compared.
std::vector<SampleRecord> tagged(std::size_t n) {
    auto recs = make_records(n);
    for (std::size_t i = 0; i < n; ++i) recs[i].inputs[0] = static_cast<double>(i) + 1.0;
    return recs;
}

std::string error_of(const std::string& csv) {
    std::istringstream in(csv);
    try {
        read_csv(in);
    } catch (const SchemaError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Dataset, CsvRoundTripIsExact) {
    const auto recs = make_records(50);
    std::ostringstream out;
    write_csv(out, recs);
    std::istringstream in(out.str());
    const auto loaded = read_csv(in);
    EXPECT_EQ(loaded.records, recs);
    EXPECT_EQ(loaded.dropped_zero_impulse, 0u);
}

TEST(Dataset, HeaderErrorsNameTheProblem) {
    auto names = std::vector<std::string>(kColumnNames.begin(), kColumnNames.end());
    std::swap(names[0], names[1]);
    std::string permuted;
    for (std::size_t i = 0; i < names.size(); ++i) permuted += (i ? "," : "") + names[i];
    const std::string e1 = error_of(permuted + "\n");
    EXPECT_NE(e1.find("column 1"), std::string::npos) << e1;
    EXPECT_NE(e1.find("order"), std::string::npos) << e1;

    std::string missing = header_line();
    missing.replace(missing.find("flight_mach"), std::string("flight_mach").size(), "mach");
    const std::string e2 = error_of(missing + "\n");
    EXPECT_NE(e2.find("missing: flight_mach"), std::string::npos) << e2;
    EXPECT_NE(e2.find("unexpected: mach"), std::string::npos) << e2;

    EXPECT_NE(error_of("").find("empty"), std::string::npos);
}

TEST(Dataset, CellErrorsAreAddressed) {
    const auto recs = make_records(3);
    std::ostringstream out;
    write_csv(out, recs);
    std::string text = out.str();
    // Corrupt the first cell of the third line (second data row).
    std::size_t pos = 0;
    for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
    text.replace(pos, text.find(',', pos) - pos, "abc");
    const std::string e = error_of(text);
    EXPECT_NE(e.find("row 3"), std::string::npos) << e;
    EXPECT_NE(e.find("atm_static_pressure_pa"), std::string::npos) << e;
    EXPECT_NE(e.find("'abc'"), std::string::npos) << e;

    EXPECT_NE(error_of(header_line() + "\n1,2,3\n").find("expected 20 cells"), std::string::npos);
}

TEST(Dataset, RecordValidation) {
    auto r = make_records(1)[0];
    EXPECT_NO_THROW(validate_record(r, 1));
    auto bad = r;
    bad.inputs[column::kPressureRecovery] = 1.2;
    EXPECT_THROW(validate_record(bad, 1), SchemaError);
    bad = r;
    bad.inputs[column::kMach] = -0.1;
    EXPECT_THROW(validate_record(bad, 1), SchemaError);
    bad = r;
    bad.inputs[column::kExitArea] = 0.0;
    EXPECT_THROW(validate_record(bad, 1), SchemaError);
    bad = r;
    bad.thrust = std::nan("");
    EXPECT_THROW(validate_record(bad, 1), SchemaError);
}

TEST(Dataset, ZeroImpulseRowsDroppedAndCounted) {
    auto recs = make_records(10);
    recs[2].impulse = 0.0;
    recs[7].impulse = 0.0;
    std::ostringstream out;
    write_csv(out, recs);
    {
        std::istringstream in(out.str());
        const auto loaded = read_csv(in);
        EXPECT_EQ(loaded.records.size(), 8u);
        EXPECT_EQ(loaded.dropped_zero_impulse, 2u);
        for (const auto& r : loaded.records) EXPECT_NE(r.impulse, 0.0);
    }
    {
        PredictionPolicy keep;
        keep.drop_zero_impulse = false;
        std::istringstream in(out.str());
        EXPECT_EQ(read_csv(in, keep).records.size(), 10u);
    }
    EXPECT_EQ(drop_zero_impulse(recs), 2u);
    EXPECT_EQ(recs.size(), 8u);
}

TEST(Dataset, SplitSizesFollowRatios) {
    {
        const auto s = split(make_records(50000), {0.6, 0.2, 0.2}, 0);
        EXPECT_EQ(s.train.size(), 30000u);
        EXPECT_EQ(s.validation.size(), 10000u);
        EXPECT_EQ(s.test.size(), 10000u);
    }
    const auto s = split(make_records(20000, Regime::LowSpeed), {0.6, 0.2, 0.2}, 0);
    EXPECT_EQ(s.train.size(), 12000u);
    EXPECT_EQ(s.validation.size(), 4000u);
    EXPECT_EQ(s.test.size(), 4000u);
}

TEST(Dataset, SplitIsDeterministicDisjointAndComplete) {
    const auto recs = tagged(997);
    const auto a = split(recs, {0.6, 0.2, 0.2}, 42);
    const auto b = split(recs, {0.6, 0.2, 0.2}, 42);
    const auto c = split(recs, {0.6, 0.2, 0.2}, 43);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    EXPECT_NE(a.train, c.train);

    std::set<double> seen;
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
        for (const auto& r : *part) EXPECT_TRUE(seen.insert(r.inputs[0]).second);
    }
    EXPECT_EQ(seen.size(), recs.size());
}

TEST(Dataset, SplitRejectsBadRatios) {
    const auto recs = make_records(10);
    EXPECT_THROW(split(recs, {0.5, 0.2, 0.2}, 0), ParameterError);
    EXPECT_THROW(split(recs, {1.2, -0.1, -0.1}, 0), ParameterError);
    EXPECT_NO_THROW(split(recs, {0.625, 0.1875, 0.1875}, 0));
}

TEST(Dataset, NormalizationUsesTrainingStatistics) {
    const auto s = split(make_records(500), {0.6, 0.2, 0.2}, 1);
    const auto [norm, stats] = normalize(s);
    ASSERT_EQ(norm.train.rows(), s.train.size());
    ASSERT_EQ(norm.train.cols(), kInputCount);
    for (std::size_t c = 0; c < kInputCount; ++c) {
        double mean = 0, sq = 0;
        for (std::size_t r = 0; r < norm.train.rows(); ++r) mean += norm.train(r, c);
        mean /= static_cast<double>(norm.train.rows());
        for (std::size_t r = 0; r < norm.train.rows(); ++r) sq += std::pow(norm.train(r, c) - mean, 2);
        EXPECT_NEAR(mean, 0.0, 1e-10) << kColumnNames[c];
        EXPECT_NEAR(sq / static_cast<double>(norm.train.rows()), 1.0, 1e-10) << kColumnNames[c];
    }
    // Validation rows are shifted by the training mean, not their own.
    const std::size_t c = column::kMach;
    const double expect = (s.validation[0].inputs[c] - stats.input_mean[c]) / stats.input_sd[c];
    EXPECT_EQ(norm.validation(0, c), expect);

    const Tensor back = denormalize_inputs(norm.test, stats);
    for (std::size_t col = 0; col < kInputCount; ++col) {
        EXPECT_NEAR(back(3, col), s.test[3].inputs[col], 1e-9 * std::fabs(s.test[3].inputs[col]) + 1e-12);
    }

    double tm = 0;
    for (const auto& r : s.train) tm += r.thrust;
    EXPECT_NEAR(stats.thrust_mean, tm / static_cast<double>(s.train.size()), 1e-9 * std::fabs(tm));
}

TEST(Dataset, ConstantFeatureAndEmptySplitRejected) {
    auto recs = make_records(20);
    for (auto& r : recs) r.inputs[column::kThroatArea] = 0.5;
    try {
        compute_stats(recs);
        FAIL() << "expected StatsError";
    } catch (const StatsError& e) {
        EXPECT_NE(std::string(e.what()).find("nozzle_throat_area_m2"), std::string::npos);
    }
    EXPECT_THROW(compute_stats(std::vector<SampleRecord>{}), StatsError);
}

TEST(Dataset, Subsampling) {
    const auto train = tagged(30000);
    const auto sub = subsample(train, 200, 5);
    EXPECT_EQ(sub.size(), 150u);
    EXPECT_EQ(sub, subsample(train, 200, 5));
    EXPECT_TRUE(std::is_sorted(sub.begin(), sub.end(), [](const auto& a, const auto& b) {
        return a.inputs[0] < b.inputs[0];
    }));
    EXPECT_EQ(subsample(train, 1, 5), train);
    EXPECT_EQ(subsample(train, 500, 5).size(), 60u);

    const auto ls = tagged(12000);
    for (std::size_t f : {1, 5, 20, 100, 200}) EXPECT_EQ(subsample(ls, f, 0).size(), 12000u / f);

    EXPECT_THROW(subsample(std::span(train).first(100), 200, 0), ParameterError);
    EXPECT_THROW(subsample(train, 0, 0), ParameterError);
}

TEST(Dataset, TargetsOf) {
    const auto recs = make_records(4);
    const auto t = targets_of(recs, Target::Impulse);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[2], recs[2].impulse);
    EXPECT_EQ(recs[1].target(Target::Thrust), recs[1].thrust);
}
