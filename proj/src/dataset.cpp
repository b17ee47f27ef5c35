#include "penn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "penn/errors.hpp"

namespace penn {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

void check_header(const std::vector<std::string_view>& header) {
    const std::vector<std::string_view> expected(kColumnNames.begin(), kColumnNames.end());
    if (header == expected) return;

    std::string missing, extra;
    for (auto name : expected) {
        if (std::find(header.begin(), header.end(), name) == header.end()) {
            missing += (missing.empty() ? "" : ", ") + std::string(name);
        }
    }
    for (auto name : header) {
        if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
            extra += (extra.empty() ? "" : ", ") + std::string(name);
        }
    }
    std::string msg = "CSV header does not match the 20-column schema";
    if (!missing.empty()) msg += "; missing: " + missing;
    if (!extra.empty()) msg += "; unexpected: " + extra;
    if (missing.empty() && extra.empty()) {
        for (std::size_t i = 0; i < expected.size() && i < header.size(); ++i) {
            if (header[i] != expected[i]) {
                msg += "; column " + std::to_string(i + 1) + " is '" + std::string(header[i]) +
                       "', expected '" + std::string(expected[i]) + "' (order is fixed)";
                break;
            }
        }
        if (header.size() != expected.size()) msg += "; duplicated columns";
    }
    throw SchemaError(msg);
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last) {
        throw SchemaError("row " + std::to_string(row) + ", column '" +
                          std::string(kColumnNames[col]) + "': cannot parse '" + std::string(cell) +
                          "' as a number");
    }
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

void validate_record(const SampleRecord& r, std::size_t row) {
    auto fail = [&](const std::string& what) {
        throw SchemaError("row " + std::to_string(row) + ": " + what);
    };
    for (std::size_t c = 0; c < kInputCount; ++c) {
        if (!std::isfinite(r.inputs[c])) fail(std::string(kColumnNames[c]) + " is not finite");
    }
    if (!std::isfinite(r.thrust)) fail("thrust_n is not finite");
    if (!std::isfinite(r.impulse)) fail("specific_impulse_s is not finite");
    if (r.inputs[column::kMach] < 0.0) fail("flight_mach is negative");
    const double sigma = r.inputs[column::kPressureRecovery];
    if (!(sigma > 0.0 && sigma <= 1.0)) fail("intake_pressure_recovery outside (0, 1]");
    if (!(r.inputs[column::kThroatArea] > 0.0)) fail("nozzle_throat_area_m2 must be positive");
    if (!(r.inputs[column::kExitArea] > 0.0)) fail("nozzle_exit_area_m2 must be positive");
}

LoadResult read_csv(std::istream& in, const PredictionPolicy& policy) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("CSV is empty (no header row)");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    check_header(split_cells(line));

    LoadResult result;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != kColumnNames.size()) {
            throw SchemaError("row " + std::to_string(row) + ": expected " +
                              std::to_string(kColumnNames.size()) + " cells, got " +
                              std::to_string(cells.size()));
        }
        SampleRecord r;
        for (std::size_t c = 0; c < kInputCount; ++c) r.inputs[c] = parse_cell(cells[c], row, c);
        r.thrust = parse_cell(cells[kInputCount], row, kInputCount);
        r.impulse = parse_cell(cells[kInputCount + 1], row, kInputCount + 1);
        validate_record(r, row);
        if (policy.drop_zero_impulse && r.impulse == 0.0) {
            ++result.dropped_zero_impulse;
            continue;
        }
        result.records.push_back(r);
    }
    if (result.dropped_zero_impulse > 0) {
        std::clog << "dataset: dropped " << result.dropped_zero_impulse
                  << " zero-impulse rows\n";
    }
    return result;
}

LoadResult load_csv(const std::filesystem::path& path, const PredictionPolicy& policy) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open dataset file " + path.string());
    return read_csv(in, policy);
}

void write_csv(std::ostream& out, std::span<const SampleRecord> records) {
    for (std::size_t c = 0; c < kColumnNames.size(); ++c) {
        out << (c ? "," : "") << kColumnNames[c];
    }
    out << '\n';
    for (const auto& r : records) {
        for (std::size_t c = 0; c < kInputCount; ++c) out << format_double(r.inputs[c]) << ',';
        out << format_double(r.thrust) << ',' << format_double(r.impulse) << '\n';
    }
}

void write_csv(const std::filesystem::path& path, std::span<const SampleRecord> records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write dataset file " + path.string());
    write_csv(out, records);
}

std::size_t drop_zero_impulse(std::vector<SampleRecord>& records) {
    const auto before = records.size();
    std::erase_if(records, [](const SampleRecord& r) { return r.impulse == 0.0; });
    return before - records.size();
}

DatasetSplit split(std::vector<SampleRecord> records, const SplitRatios& ratios, std::uint64_t seed) {
    const double total = ratios.train + ratios.validation + ratios.test;
    if (ratios.train < 0.0 || ratios.validation < 0.0 || ratios.test < 0.0 ||
        std::fabs(total - 1.0) > 1e-9) {
        throw ParameterError("split ratios must be non-negative and sum to 1 (got " +
                             std::to_string(ratios.train) + ", " + std::to_string(ratios.validation) +
                             ", " + std::to_string(ratios.test) + ")");
    }
    const std::size_t n = records.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(n * ratios.train)));
    const auto n_val =
        std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(n * ratios.validation)));

    DatasetSplit out;
    out.ratios = ratios;
    out.seed = seed;
    out.train.reserve(n_train);
    out.validation.reserve(n_val);
    out.test.reserve(n - n_train - n_val);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = records[order[i]];
        if (i < n_train) out.train.push_back(r);
        else if (i < n_train + n_val) out.validation.push_back(r);
        else out.test.push_back(r);
    }
    return out;
}

NormalizationStats compute_stats(std::span<const SampleRecord> train) {
    if (train.empty()) throw StatsError("normalization: training split is empty");
    const double n = static_cast<double>(train.size());
    auto mean_sd = [&](auto&& get, const std::string& name) {
        double mean = 0.0;
        for (const auto& r : train) mean += get(r);
        mean /= n;
        double var = 0.0;
        for (const auto& r : train) {
            const double d = get(r) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / n);
        // Summation rounding leaves a constant column with sd ~ 1e-14 * |mean|.
        if (!(sd > 1e-12 * std::fabs(mean)) || !std::isfinite(sd)) {
            throw StatsError("normalization: feature '" + name + "' is constant over the training split");
        }
        return std::pair{mean, sd};
    };
    NormalizationStats s;
    for (std::size_t c = 0; c < kInputCount; ++c) {
        std::tie(s.input_mean[c], s.input_sd[c]) =
            mean_sd([c](const SampleRecord& r) { return r.inputs[c]; }, std::string(kColumnNames[c]));
    }
    std::tie(s.thrust_mean, s.thrust_sd) =
        mean_sd([](const SampleRecord& r) { return r.thrust; }, "thrust_n");
    std::tie(s.impulse_mean, s.impulse_sd) =
        mean_sd([](const SampleRecord& r) { return r.impulse; }, "specific_impulse_s");
    return s;
}

Tensor normalize_inputs(std::span<const SampleRecord> records, const NormalizationStats& stats) {
    Tensor x(records.size(), kInputCount);
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t c = 0; c < kInputCount; ++c) {
            x(i, c) = (records[i].inputs[c] - stats.input_mean[c]) / stats.input_sd[c];
        }
    }
    return x;
}

Tensor denormalize_inputs(const Tensor& normalized, const NormalizationStats& stats) {
    if (normalized.cols() != kInputCount) {
        throw DimensionError("denormalize_inputs: expected 18 columns, got " + normalized.shape_string());
    }
    Tensor x = normalized;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t c = 0; c < kInputCount; ++c) {
            x(i, c) = x(i, c) * stats.input_sd[c] + stats.input_mean[c];
        }
    }
    return x;
}

std::pair<NormalizedSplit, NormalizationStats> normalize(const DatasetSplit& s) {
    const NormalizationStats stats = compute_stats(s.train);
    return {NormalizedSplit{normalize_inputs(s.train, stats), normalize_inputs(s.validation, stats),
                            normalize_inputs(s.test, stats)},
            stats};
}

std::vector<double> targets_of(std::span<const SampleRecord> records, Target target) {
    std::vector<double> y(records.size());
    std::transform(records.begin(), records.end(), y.begin(),
                   [target](const SampleRecord& r) { return r.target(target); });
    return y;
}

std::vector<SampleRecord> subsample(std::span<const SampleRecord> train, std::size_t factor,
                                    std::uint64_t seed) {
    if (factor < 1) throw ParameterError("subsample: factor must be at least 1");
    if (factor == 1) return {train.begin(), train.end()};
    const std::size_t keep = train.size() / factor;
    if (keep == 0) {
        throw ParameterError("subsample: factor " + std::to_string(factor) + " leaves no samples out of " +
                             std::to_string(train.size()));
    }
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(keep);
    std::sort(order.begin(), order.end());
    std::vector<SampleRecord> out;
    out.reserve(keep);
    for (auto i : order) out.push_back(train[i]);
    return out;
}

}  // namespace penn
