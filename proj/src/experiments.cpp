#include "penn/experiments.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "penn/errors.hpp"
#include "penn/timing.hpp"

namespace penn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<Regime, 2> kRegimes{Regime::HighSpeed, Regime::LowSpeed};

std::string pct(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

template <class T>
std::vector<T> parse_list(const KvConfig& kv, const std::string& key, std::vector<T> fallback) {
    const auto text = kv.get(key);
    if (!text) return fallback;
    std::vector<T> out;
    std::istringstream in(*text);
    std::string part;
    while (std::getline(in, part, ',')) {
        KvConfig one;
        one.set(key, part);
        if constexpr (std::is_floating_point_v<T>) {
            out.push_back(one.get_double(key, 0.0));
        } else {
            const long long v = one.get_int(key, 0);
            if (v < 0) throw ConfigError("key '" + key + "' takes non-negative integers");
            out.push_back(static_cast<T>(v));
        }
    }
    if (out.empty()) throw ConfigError("key '" + key + "' is empty");
    return out;
}

bool has_regime(const ExperimentConfig& c, Regime r) {
    return std::find(c.regimes.begin(), c.regimes.end(), r) != c.regimes.end();
}

/// Thrust / impulse / average for each regime, then the cross-regime means.
std::vector<std::string> metric_cells(const ExperimentConfig& cfg,
                                      const std::function<double(Regime, Target)>& mean) {
    std::vector<std::string> cells;
    std::array<std::array<double, 3>, 2> v{};
    for (std::size_t r = 0; r < 2; ++r) {
        if (!has_regime(cfg, kRegimes[r])) {
            v[r] = {kNaN, kNaN, kNaN};
            cells.insert(cells.end(), {"", "", ""});
            continue;
        }
        const double t = mean(kRegimes[r], Target::Thrust);
        const double i = mean(kRegimes[r], Target::Impulse);
        v[r] = {t, i, 0.5 * (t + i)};
        for (double x : v[r]) cells.push_back(pct(x));
    }
    const bool both = has_regime(cfg, Regime::HighSpeed) && has_regime(cfg, Regime::LowSpeed);
    for (std::size_t c = 0; c < 3; ++c) cells.push_back(both ? pct(0.5 * (v[0][c] + v[1][c])) : "");
    return cells;
}

std::vector<std::string> metric_header() {
    return {"hs_thrust",        "hs_impulse",        "hs_average",        "ls_thrust",      "ls_impulse",
            "ls_average",       "synthesis_thrust",  "synthesis_impulse", "synthesis_average"};
}

/// "diverged" when training hit a non-finite loss, "not converged" when it
/// finished with validation MAPE above 100%.
std::string run_status(const RunOutcome& o) {
    if (o.converged) return "converged";
    return std::isnan(o.test_mape) ? "diverged" : "not converged";
}

Table runs_table(const std::vector<RunOutcome>& outcomes) {
    Table t;
    t.header = {"run",       "model",         "width",          "target",     "loss",
                "regime",    "subsample",     "seed",           "params",     "train_samples",
                "test_mape", "best_val_mape", "final_val_mape", "train_mape", "train_seconds",
                "converged"};
    for (const auto& o : outcomes) {
        const auto& k = o.key;
        t.rows.push_back({k.label(), model_name(k.model), num(k.width), target_name(k.target), loss_name(k.loss),
                          regime_name(k.regime), std::to_string(k.subsample), std::to_string(k.seed),
                          std::to_string(o.params), std::to_string(o.train_samples), pct(o.test_mape),
                          pct(o.best_val_mape), pct(o.final_val_mape), pct(o.train_mape), num(o.train_seconds),
                          run_status(o)});
    }
    return t;
}

std::vector<RunKey> seeded(const ExperimentConfig& cfg, RunKey base) {
    std::vector<RunKey> keys;
    for (auto s : cfg.seeds) {
        base.seed = s;
        keys.push_back(base);
    }
    return keys;
}

void append(std::vector<RunKey>& to, const std::vector<RunKey>& more) { to.insert(to.end(), more.begin(), more.end()); }

}  // namespace

const std::set<std::string>& ExperimentConfig::known_keys() {
    static const std::set<std::string> keys{
        "epochs",   "hs_count",   "ls_count",  "hs_data",       "ls_data",    "hs_noise_sd",
        "ls_noise_sd", "split",   "seeds",     "data_seed",     "gen_seed",   "regimes",
        "timing_passes", "hs_factors", "ls_factors", "out_dir", "parallel",   "verbose",
    };
    return keys;
}

ExperimentConfig ExperimentConfig::from_kv(const KvConfig& kv) {
    kv.require_known(known_keys());
    ExperimentConfig c;
    c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
    if (c.epochs < 0) throw ConfigError("epochs must be >= 0");
    c.hs_count = static_cast<std::size_t>(std::max(0LL, kv.get_int("hs_count", static_cast<long long>(c.hs_count))));
    c.ls_count = static_cast<std::size_t>(std::max(0LL, kv.get_int("ls_count", static_cast<long long>(c.ls_count))));
    if (auto v = kv.get("hs_data")) c.hs_data = *v;
    if (auto v = kv.get("ls_data")) c.ls_data = *v;
    if (kv.has("hs_noise_sd")) c.hs_noise_sd = kv.get_double("hs_noise_sd", 0.0);
    if (kv.has("ls_noise_sd")) c.ls_noise_sd = kv.get_double("ls_noise_sd", 0.0);
    const auto r = parse_list<double>(kv, "split", {c.split.train, c.split.validation, c.split.test});
    if (r.size() != 3) throw ConfigError("split needs three comma-separated ratios");
    c.split = SplitRatios{r[0], r[1], r[2]};
    c.seeds = parse_list<std::uint64_t>(kv, "seeds", c.seeds);
    c.data_seed = static_cast<std::uint64_t>(kv.get_int("data_seed", static_cast<long long>(c.data_seed)));
    c.gen_seed = static_cast<std::uint64_t>(kv.get_int("gen_seed", static_cast<long long>(c.gen_seed)));
    if (auto v = kv.get("regimes")) {
        c.regimes.clear();
        std::istringstream in(*v);
        std::string part;
        try {
            while (std::getline(in, part, ',')) c.regimes.push_back(parse_regime(part));
        } catch (const ParameterError& e) {
            throw ConfigError(e.what());
        }
        if (c.regimes.empty()) throw ConfigError("regimes is empty");
    }
    c.timing_passes = static_cast<std::size_t>(
        std::max(1LL, kv.get_int("timing_passes", static_cast<long long>(c.timing_passes))));
    c.hs_factors = parse_list<std::size_t>(kv, "hs_factors", c.hs_factors);
    c.ls_factors = parse_list<std::size_t>(kv, "ls_factors", c.ls_factors);
    if (auto v = kv.get("out_dir")) c.out_dir = *v;
    c.parallel = kv.get_bool("parallel", c.parallel);
    c.verbose = kv.get_bool("verbose", c.verbose);
    return c;
}

std::string RunKey::label() const {
    std::ostringstream s;
    s << model_name(model) << "_w" << num(width) << '_' << target_name(target) << '_' << loss_name(loss) << '_'
      << regime_name(regime) << "_f" << subsample << "_s" << seed;
    return s.str();
}

ExperimentRunner::ExperimentRunner(ExperimentConfig config) : config_(std::move(config)) {}

TrainConfig ExperimentRunner::train_config(const RunKey& key) const {
    TrainConfig c;
    c.model = key.model;
    c.width = key.width;
    c.target = key.target;
    c.loss = key.loss;
    c.epochs = config_.epochs;
    c.batch_size = key.regime == Regime::LowSpeed ? 40 : 100;
    c.seed = key.seed;
    c.data_seed = config_.data_seed;
    c.split = config_.split;
    c.subsample = key.subsample;
    const auto& file = key.regime == Regime::HighSpeed ? config_.hs_data : config_.ls_data;
    if (file) {
        c.data_file = *file;
    } else {
        SyntheticGenConfig g;
        g.regime = key.regime;
        g.count = key.regime == Regime::HighSpeed ? config_.hs_count : config_.ls_count;
        const auto& noise = key.regime == Regime::HighSpeed ? config_.hs_noise_sd : config_.ls_noise_sd;
        g.noise_sd = noise.value_or(SyntheticGenConfig::default_noise(key.regime));
        g.seed = config_.gen_seed;
        c.generator = g;
    }
    return c;
}

const PreparedData& ExperimentRunner::data(Regime regime, std::size_t subsample) {
    const auto slot = std::make_pair(regime, subsample);
    auto it = data_.find(slot);
    if (it == data_.end()) {
        RunKey key;
        key.regime = regime;
        key.subsample = subsample;
        it = data_.emplace(slot, prepare_data(train_config(key))).first;
    }
    return it->second;
}

RunOutcome ExperimentRunner::run_one(const RunKey& key, bool allow_divergence) {
    const TrainConfig cfg = train_config(key);
    const PreparedData& prepared = data_.at({key.regime, key.subsample});
    RunOutcome out;
    out.key = key;
    out.params = count_params(cfg.model_spec());
    out.train_samples = prepared.split.train.size();
    try {
        const auto result = train(cfg, prepared);
        const auto& r = result.report;
        out.converged = r.converged;
        out.failure = r.failure;
        out.test_mape = r.test_mape;
        out.best_val_mape = r.best_val_mape;
        out.final_val_mape = r.final_val_mape;
        out.train_mape = r.train_mape;
        out.train_seconds = r.train_seconds;
        if (config_.out_dir) write_history_csv(*config_.out_dir / "runs" / (key.label() + ".csv"), r);
    } catch (const TrainingDiverged& e) {
        if (!allow_divergence) throw;
        out.converged = false;
        out.failure = e.what();
        out.test_mape = out.best_val_mape = out.final_val_mape = out.train_mape = kNaN;
    }
    return out;
}

std::vector<RunOutcome> ExperimentRunner::run(const std::vector<RunKey>& keys, bool allow_divergence) {
    std::vector<RunKey> pending;
    for (const auto& k : keys) {
        if (!cache_.count(k) && std::find(pending.begin(), pending.end(), k) == pending.end()) pending.push_back(k);
    }
    for (const auto& k : pending) data(k.regime, k.subsample);

    std::vector<RunOutcome> fresh(pending.size());
    std::vector<std::exception_ptr> errors(pending.size());
    const auto n = static_cast<std::int64_t>(pending.size());
#pragma omp parallel for schedule(dynamic, 1) if (config_.parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            fresh[i] = run_one(pending[i], allow_divergence);
            if (config_.verbose) {
#pragma omp critical(penn_experiment_log)
                std::clog << "  " << pending[i].label() << ": test MAPE " << pct(fresh[i].test_mape) << "% ("
                          << num(fresh[i].train_seconds) << " s)\n";
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        cache_.emplace(pending[i], fresh[i]);
        ++trained_;
    }
    std::vector<RunOutcome> out;
    out.reserve(keys.size());
    for (const auto& k : keys) out.push_back(cache_.at(k));
    return out;
}

void Table::write_csv(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ContractError("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

std::string Table::to_text() const {
    std::vector<std::size_t> width(header.size(), 0);
    auto widen = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) width[i] = std::max(width[i], cells[i].size());
    };
    widen(header);
    for (const auto& r : rows) widen(r);
    std::ostringstream s;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            s << (i ? "  " : "") << cells[i] << std::string(width[i] - cells[i].size(), ' ');
        }
        s << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s.str();
}

double seed_mean(const std::vector<RunOutcome>& outcomes, ModelKind model, double width, Target target,
                 LossKind loss, Regime regime, std::size_t subsample) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& o : outcomes) {
        const auto& k = o.key;
        if (k.model != model || k.width != width || k.target != target || k.loss != loss || k.regime != regime ||
            k.subsample != subsample) {
            continue;
        }
        if (!o.converged && std::isnan(o.test_mape)) return kNaN;
        sum += o.test_mape;
        ++count;
    }
    return count ? sum / static_cast<double>(count) : kNaN;
}

ExperimentTables run_comparative(ExperimentRunner& runner) {
    const auto& cfg = runner.config();
    std::vector<RunKey> keys;
    for (auto model : kAllModelKinds)
        for (auto regime : cfg.regimes)
            for (auto target : {Target::Thrust, Target::Impulse})
                append(keys, seeded(cfg, RunKey{model, 1.0, target, LossKind::Mare, regime, 1, 0}));
    const auto outcomes = runner.run(keys);

    ExperimentTables t;
    t.main.header = {"model", "params"};
    for (auto& h : metric_header()) t.main.header.push_back(h);
    for (auto model : kAllModelKinds) {
        ModelSpec spec;
        spec.kind = model;
        std::vector<std::string> row{display_name(spec), std::to_string(count_params(spec))};
        for (auto& c : metric_cells(cfg, [&](Regime r, Target tg) {
                 return seed_mean(outcomes, model, 1.0, tg, LossKind::Mare, r);
             })) {
            row.push_back(c);
        }
        t.main.rows.push_back(std::move(row));
    }
    t.runs = runs_table(outcomes);
    return t;
}

ExperimentTables run_loss_ablation(ExperimentRunner& runner) {
    const auto& cfg = runner.config();
    constexpr std::array<ModelKind, 2> models{ModelKind::MlpMul, ModelKind::PennBnf};
    constexpr std::array<LossKind, 3> losses{LossKind::Mse, LossKind::Mae, LossKind::Mare};
    std::vector<RunKey> keys;
    for (auto model : models)
        for (auto loss : losses)
            for (auto regime : cfg.regimes)
                for (auto target : {Target::Thrust, Target::Impulse})
                    append(keys, seeded(cfg, RunKey{model, 1.0, target, loss, regime, 1, 0}));
    const auto outcomes = runner.run(keys);

    ExperimentTables t;
    t.main.header = {"loss", "model"};
    for (auto& h : metric_header()) t.main.header.push_back(h);
    for (auto model : models) {
        ModelSpec spec;
        spec.kind = model;
        for (auto loss : losses) {
            std::vector<std::string> row{loss_name(loss), display_name(spec)};
            for (auto& c : metric_cells(cfg, [&](Regime r, Target tg) {
                     return seed_mean(outcomes, model, 1.0, tg, loss, r);
                 })) {
                row.push_back(c);
            }
            t.main.rows.push_back(std::move(row));
        }
    }
    t.runs = runs_table(outcomes);
    return t;
}

ExperimentTables run_size_dependence(ExperimentRunner& runner) {
    const auto& cfg = runner.config();
    constexpr std::array<ModelKind, 2> models{ModelKind::MlpMul, ModelKind::PennBnf};
    std::vector<RunKey> keys;
    for (auto regime : cfg.regimes) {
        const auto& factors = regime == Regime::HighSpeed ? cfg.hs_factors : cfg.ls_factors;
        for (auto model : models)
            for (auto factor : factors)
                for (auto target : {Target::Thrust, Target::Impulse})
                    append(keys, seeded(cfg, RunKey{model, 1.0, target, LossKind::Mare, regime, factor, 0}));
    }
    const auto outcomes = runner.run(keys, /*allow_divergence=*/true);

    ExperimentTables t;
    t.main.header = {"model", "regime", "factor", "train_samples", "thrust", "impulse", "average", "converged"};
    for (auto regime : cfg.regimes) {
        const auto& factors = regime == Regime::HighSpeed ? cfg.hs_factors : cfg.ls_factors;
        for (auto model : models) {
            ModelSpec spec;
            spec.kind = model;
            for (auto factor : factors) {
                std::size_t total = 0, ok = 0, samples = 0;
                for (const auto& o : outcomes) {
                    if (o.key.model == model && o.key.regime == regime && o.key.subsample == factor) {
                        ++total;
                        ok += o.converged ? 1 : 0;
                        samples = o.train_samples;
                    }
                }
                const double th = seed_mean(outcomes, model, 1.0, Target::Thrust, LossKind::Mare, regime, factor);
                const double im = seed_mean(outcomes, model, 1.0, Target::Impulse, LossKind::Mare, regime, factor);
                t.main.rows.push_back({display_name(spec), regime_name(regime), std::to_string(factor),
                                       std::to_string(samples), pct(th), pct(im), pct(0.5 * (th + im)),
                                       ok == total ? "converged"
                                                   : "not converged (" + std::to_string(total - ok) + "/" +
                                                         std::to_string(total) + ")"});
            }
        }
    }
    t.runs = runs_table(outcomes);
    return t;
}

ExperimentTables run_scaling_family(ExperimentRunner& runner) {
    const auto& cfg = runner.config();
    std::vector<RunKey> keys;
    for (double w : kWidthFamily)
        for (auto regime : cfg.regimes)
            for (auto target : {Target::Thrust, Target::Impulse})
                append(keys, seeded(cfg, RunKey{ModelKind::PennBnf, w, target, LossKind::Mare, regime, 1, 0}));
    const auto outcomes = runner.run(keys);

    ExperimentTables t;
    t.main.header = {"model", "params"};
    for (auto& h : metric_header()) t.main.header.push_back(h);
    for (double w : kWidthFamily) {
        ModelSpec spec;
        spec.width = w;
        std::vector<std::string> row{display_name(spec), std::to_string(count_params(spec))};
        for (auto& c : metric_cells(cfg, [&](Regime r, Target tg) {
                 return seed_mean(outcomes, ModelKind::PennBnf, w, tg, LossKind::Mare, r);
             })) {
            row.push_back(c);
        }
        t.main.rows.push_back(std::move(row));
    }
    t.runs = runs_table(outcomes);
    return t;
}

ExperimentTables run_timing(ExperimentRunner& runner) {
    const auto& cfg = runner.config();
    const std::uint64_t seed = cfg.seeds.front();
    const std::string hardware = hardware_description();

    ExperimentTables t;
    t.main.header = {"model", "hs_training_s", "hs_inference_s", "ls_training_s", "ls_inference_s"};
    t.runs.header = {"model", "regime", "params", "passes", "training_s", "inference_s", "hardware"};
    for (double w : kWidthFamily) {
        ModelSpec spec;
        spec.width = w;
        std::vector<std::string> row{display_name(spec)};
        for (auto regime : kRegimes) {
            if (!has_regime(cfg, regime)) {
                row.insert(row.end(), {"", ""});
                continue;
            }
            // One run per call so no other run shares the clock.
            const RunKey key{ModelKind::PennBnf, w, Target::Thrust, LossKind::Mare, regime, 1, seed};
            const auto outcome = runner.run({key});
            const PreparedData& data = runner.data(regime);
            // Latency does not depend on the weight values.
            const Checkpoint ckpt{Model::create(spec, seed), data.stats};
            const TimingReport rep = bench_timing(ckpt, data.split.test, cfg.timing_passes);
            char latency[32];
            std::snprintf(latency, sizeof(latency), "%.9f", rep.mean_inference_seconds);
            row.push_back(num(outcome[0].train_seconds));
            row.push_back(latency);
            t.runs.rows.push_back({display_name(spec), regime_name(regime), std::to_string(rep.param_count),
                                   std::to_string(rep.passes), num(outcome[0].train_seconds), latency, hardware});
        }
        t.main.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace penn
