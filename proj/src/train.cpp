#include "penn/train.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "penn/adam.hpp"
#include "penn/errors.hpp"

namespace penn {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        KvConfig one;
        one.set(key, part);
        out.push_back(one.get_double(key, 0.0));
    }
    return out;
}

std::uint64_t parse_u64(const KvConfig& kv, const std::string& key, std::uint64_t fallback) {
    const long long v = kv.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError("key '" + key + "' must be non-negative");
    return static_cast<std::uint64_t>(v);
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
    const std::size_t cols = x.cols();
    Tensor out(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::memcpy(out.data().data() + i * cols, x.data().data() + rows[i] * cols, cols * sizeof(double));
    }
    return out;
}

}  // namespace

ModelSpec TrainConfig::model_spec() const {
    ModelSpec spec;
    spec.kind = model;
    spec.width = width;
    spec.target = target;
    return spec;
}

LrSchedule TrainConfig::effective_schedule() const {
    if (schedule) return *schedule;
    return is_penn(model) ? LrSchedule::penn_default() : LrSchedule::mlp_default();
}

std::size_t TrainConfig::effective_batch_size() const {
    if (batch_size > 0) return batch_size;
    if (!data_file && generator && generator->regime == Regime::LowSpeed) return 40;
    return 100;
}

void TrainConfig::validate() const {
    model_spec().validate();
    effective_schedule().validate();
    if (epochs < 0) throw ParameterError("epochs must be >= 0");
    if (subsample < 1) throw ParameterError("subsample factor must be >= 1");
    if (!data_file && !generator) throw ConfigError("no dataset source: set 'data' or 'regime'");
}

const std::set<std::string>& TrainConfig::known_keys() {
    static const std::set<std::string> keys{
        "model",   "width",     "target",  "loss",     "epochs",   "batch_size",
        "lr",      "lr_milestones", "lr_decay", "seed", "data_seed", "split",
        "subsample", "data",    "regime",  "count",    "noise_sd", "gen_seed",
        "clamp_negative_thrust", "drop_zero_impulse",
    };
    return keys;
}

TrainConfig TrainConfig::from_kv(const KvConfig& kv, TrainConfig c) {
    kv.require_known(known_keys());
    try {
        if (auto v = kv.get("model")) c.model = parse_model_kind(*v);
        c.width = kv.get_double("width", c.width);
        if (auto v = kv.get("target")) c.target = parse_target(*v);
        if (auto v = kv.get("loss")) c.loss = parse_loss(*v);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
    const long long batch = kv.get_int("batch_size", static_cast<long long>(c.batch_size));
    if (batch < 0) throw ConfigError("batch_size must be non-negative");
    c.batch_size = static_cast<std::size_t>(batch);

    if (kv.has("lr") || kv.has("lr_milestones") || kv.has("lr_decay")) {
        LrSchedule s = c.effective_schedule();
        s.initial_lr = kv.get_double("lr", s.initial_lr);
        s.decay_factor = kv.get_double("lr_decay", s.decay_factor);
        if (auto v = kv.get("lr_milestones")) {
            s.milestones.clear();
            if (!v->empty()) {
                for (double m : parse_list("lr_milestones", *v)) s.milestones.push_back(static_cast<int>(m));
            }
        }
        c.schedule = s;
    }
    c.seed = parse_u64(kv, "seed", c.seed);
    c.data_seed = parse_u64(kv, "data_seed", c.data_seed);
    if (auto v = kv.get("split")) {
        const auto r = parse_list("split", *v);
        if (r.size() != 3) throw ConfigError("split needs three comma-separated ratios");
        c.split = SplitRatios{r[0], r[1], r[2]};
    }
    const long long sub = kv.get_int("subsample", static_cast<long long>(c.subsample));
    if (sub < 1) throw ConfigError("subsample must be >= 1");
    c.subsample = static_cast<std::size_t>(sub);

    if (auto v = kv.get("data")) c.data_file = *v;
    if (kv.has("regime") || kv.has("count") || kv.has("noise_sd") || kv.has("gen_seed")) {
        SyntheticGenConfig g = c.generator.value_or(SyntheticGenConfig{});
        if (auto v = kv.get("regime")) {
            try {
                g.regime = parse_regime(*v);
            } catch (const ParameterError& e) {
                throw ConfigError(e.what());
            }
            if (!kv.has("noise_sd")) g.noise_sd = SyntheticGenConfig::default_noise(g.regime);
        }
        const long long count = kv.get_int("count", static_cast<long long>(g.count));
        if (count < 0) throw ConfigError("count must be non-negative");
        g.count = static_cast<std::size_t>(count);
        g.noise_sd = kv.get_double("noise_sd", g.noise_sd);
        g.seed = parse_u64(kv, "gen_seed", g.seed);
        c.generator = g;
    }
    c.policy.clamp_negative_thrust = kv.get_bool("clamp_negative_thrust", c.policy.clamp_negative_thrust);
    c.policy.drop_zero_impulse = kv.get_bool("drop_zero_impulse", c.policy.drop_zero_impulse);
    return c;
}

TrainConfig TrainConfig::from_kv(const KvConfig& kv) { return from_kv(kv, TrainConfig{}); }

std::map<std::string, std::string> TrainConfig::to_kv() const {
    std::map<std::string, std::string> m;
    const LrSchedule s = effective_schedule();
    m["model"] = model_name(model);
    m["width"] = fmt(width);
    m["target"] = target_name(target);
    m["loss"] = loss_name(loss);
    m["epochs"] = std::to_string(epochs);
    m["batch_size"] = std::to_string(effective_batch_size());
    m["lr"] = fmt(s.initial_lr);
    std::string ms;
    for (std::size_t i = 0; i < s.milestones.size(); ++i) ms += (i ? "," : "") + std::to_string(s.milestones[i]);
    m["lr_milestones"] = ms;
    m["lr_decay"] = fmt(s.decay_factor);
    m["seed"] = std::to_string(seed);
    m["data_seed"] = std::to_string(data_seed);
    m["split"] = fmt(split.train) + "," + fmt(split.validation) + "," + fmt(split.test);
    m["subsample"] = std::to_string(subsample);
    if (data_file) m["data"] = data_file->string();
    if (generator) {
        m["regime"] = regime_name(generator->regime);
        m["count"] = std::to_string(generator->count);
        m["noise_sd"] = fmt(generator->noise_sd);
        m["gen_seed"] = std::to_string(generator->seed);
    }
    m["clamp_negative_thrust"] = policy.clamp_negative_thrust ? "true" : "false";
    m["drop_zero_impulse"] = policy.drop_zero_impulse ? "true" : "false";
    return m;
}

PreparedData prepare_data(const TrainConfig& config) {
    std::vector<SampleRecord> records;
    PreparedData out;
    if (config.data_file) {
        auto loaded = load_csv(*config.data_file, config.policy);
        records = std::move(loaded.records);
        out.dropped_zero_impulse = loaded.dropped_zero_impulse;
    } else if (config.generator) {
        records = synth_generate(*config.generator);
        if (config.policy.drop_zero_impulse) out.dropped_zero_impulse = drop_zero_impulse(records);
    } else {
        throw ConfigError("no dataset source: set 'data' or 'regime'");
    }
    out.split = split(std::move(records), config.split, config.data_seed);
    if (config.subsample > 1) {
        out.split.train = subsample(out.split.train, config.subsample, config.data_seed ^ 0x5ab5a3b1e5ull);
    }
    std::tie(out.inputs, out.stats) = normalize(out.split);
    return out;
}

double evaluate_normalized(const Checkpoint& ckpt, const Tensor& normalized, std::span<const double> targets,
                           const PredictionPolicy& policy) {
    if (targets.empty()) throw ContractError("evaluate: split is empty");
    if (normalized.rows() != targets.size()) {
        throw ContractError("evaluate: " + std::to_string(normalized.rows()) + " input rows vs " +
                            std::to_string(targets.size()) + " targets");
    }
    auto y_hat = predict_raw(ckpt, normalized);
    for (auto& v : y_hat) v = apply_policy(ckpt.model.spec().target, v, policy);
    return mape(targets, y_hat);
}

double evaluate(const Checkpoint& ckpt, std::span<const SampleRecord> records, const PredictionPolicy& policy) {
    if (records.empty()) throw ContractError("evaluate: split is empty");
    const auto y = targets_of(records, ckpt.model.spec().target);
    return evaluate_normalized(ckpt, normalize_inputs(records, ckpt.stats), y, policy);
}

TrainResult train(const TrainConfig& config, const PreparedData& data) {
    config.validate();
    const ModelSpec spec = config.model_spec();
    const Target target = spec.target;
    const std::size_t n = data.split.train.size();
    if (n == 0) throw ContractError("train: training split is empty");
    if (data.split.validation.empty()) throw ContractError("train: validation split is empty");

    const auto t_start = std::chrono::steady_clock::now();
    const LrSchedule schedule = config.effective_schedule();
    const std::size_t batch = config.effective_batch_size();

    Checkpoint current{Model::create(spec, config.seed), data.stats};
    auto params = current.model.parameter_tensors();
    std::vector<const Tensor*> const_params(params.begin(), params.end());
    AdamState adam = AdamState::for_params(const_params);

    const Tensor& x_train = data.inputs.train;
    const auto y_train = targets_of(data.split.train, target);
    const auto y_val = targets_of(data.split.validation, target);

    MetricsReport report;
    report.config = config.to_kv();
    report.seed = config.seed;
    report.param_count = current.model.param_count();
    report.train_samples = n;

    Checkpoint best = current;
    report.best_val_mape = evaluate_normalized(current, data.inputs.validation, y_val, config.policy);
    report.final_val_mape = report.best_val_mape;
    report.best_epoch = -1;

    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<const Tensor*> grads(params.size());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_at_epoch(schedule, epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        int batch_index = 0;
        for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
            const std::size_t rows = std::min(batch, n - start);
            const std::span<const std::size_t> idx(order.data() + start, rows);
            Tensor y(rows);
            for (std::size_t i = 0; i < rows; ++i) y[i] = y_train[idx[i]];

            Tape tape;
            const auto bound = current.model.bind(tape);
            const Var x = tape.constant(gather_rows(x_train, idx));
            const Var pred = decoded_forward(tape, current.model, bound, x, current.stats);
            const Var l = loss(tape, config.loss, pred, y, config.policy.mare_epsilon);
            const double value = tape.value(l).item();
            if (!std::isfinite(value)) {
                throw TrainingDiverged("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                                           std::to_string(batch_index),
                                       epoch, batch_index);
            }
            tape.backward(l);
            for (std::size_t k = 0; k < bound.size(); ++k) {
                grads[2 * k] = &tape.grad(bound[k].w);
                grads[2 * k + 1] = &tape.grad(bound[k].b);
            }
            adam_step(params, grads, adam, lr);
            loss_sum += value * static_cast<double>(rows);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.train_loss = loss_sum / static_cast<double>(n);
        rec.val_mape = evaluate_normalized(current, data.inputs.validation, y_val, config.policy);
        report.history.push_back(rec);
        report.final_val_mape = rec.val_mape;
        if (rec.val_mape < report.best_val_mape) {
            report.best_val_mape = rec.val_mape;
            report.best_epoch = epoch;
            best = current;
        }
    }
    report.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    report.converged = std::isfinite(report.final_val_mape) && report.final_val_mape <= 100.0;
    if (!report.converged) report.failure = "final validation MAPE above 100%";

    report.train_mape = evaluate_normalized(best, x_train, y_train, config.policy);
    const auto y_test = targets_of(data.split.test, target);
    report.test_mape = evaluate_normalized(best, data.inputs.test, y_test, config.policy);
    return TrainResult{std::move(best), std::move(report)};
}

TrainResult train(const TrainConfig& config) {
    config.validate();
    return train(config, prepare_data(config));
}

void write_history_csv(const std::filesystem::path& path, const MetricsReport& report) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ContractError("cannot write " + path.string());
    out << "epoch,train_loss,val_mape,lr\n";
    for (const auto& r : report.history) {
        out << r.epoch << ',' << fmt(r.train_loss) << ',' << fmt(r.val_mape) << ',' << fmt(r.lr) << '\n';
    }
}

std::string summarize(const MetricsReport& r) {
    std::ostringstream s;
    const auto get = [&](const char* k) {
        const auto it = r.config.find(k);
        return it == r.config.end() ? std::string("?") : it->second;
    };
    s << get("model") << " (width " << get("width") << ", " << r.param_count << " params), target "
      << get("target") << ", loss " << get("loss") << ", seed " << r.seed << '\n';
    s << "  train samples " << r.train_samples << ", epochs " << r.history.size() << ", best epoch "
      << r.best_epoch << '\n';
    s.precision(4);
    s << std::fixed;
    s << "  val MAPE " << r.best_val_mape << "%  test MAPE " << r.test_mape << "%  train MAPE " << r.train_mape
      << "%\n";
    s << "  train time " << r.train_seconds << " s" << (r.converged ? "" : "  [not converged]") << '\n';
    return s.str();
}

}  // namespace penn
