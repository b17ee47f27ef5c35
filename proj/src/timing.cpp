#include "penn/timing.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <omp.h>

#include "penn/errors.hpp"

namespace penn {

TimingReport bench_timing(const Checkpoint& ckpt, std::span<const SampleRecord> records, std::size_t passes,
                          std::size_t warmup) {
    if (records.empty()) throw ContractError("bench_timing: no records");
    if (passes == 0) throw ParameterError("bench_timing: passes must be positive");
    const Tensor x = normalize_inputs(records, ckpt.stats);
    std::vector<Tensor> rows;
    rows.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto r = x.row(i);
        rows.push_back(Tensor::vector(std::vector<double>(r.begin(), r.end())));
    }

    const int saved_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    double sink = 0.0;
    auto one = [&](std::size_t i) {
        Tape tape;
        const auto bound = ckpt.model.bind(tape);
        const Var y = decoded_forward(tape, ckpt.model, bound, tape.constant(rows[i % rows.size()]), ckpt.stats);
        sink += tape.value(y)[0];
    };
    for (std::size_t i = 0; i < warmup; ++i) one(i);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < passes; ++i) one(i);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    omp_set_num_threads(saved_threads);
    if (!std::isfinite(sink)) throw ContractError("bench_timing: non-finite prediction");

    TimingReport rep;
    rep.model = display_name(ckpt.model.spec());
    rep.param_count = ckpt.model.param_count();
    rep.passes = passes;
    rep.mean_inference_seconds = elapsed / static_cast<double>(passes);
    rep.hardware = hardware_description();
    return rep;
}

std::string hardware_description() {
    std::string name = "unknown CPU";
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                name = line.substr(colon + 1);
                name.erase(0, name.find_first_not_of(' '));
            }
            break;
        }
    }
    return name + " (" + std::to_string(std::thread::hardware_concurrency()) + " logical cores)";
}

}  // namespace penn
