// penn: data generation, training, evaluation and the experiment tables.
//
// Every subcommand reads an optional flat key=value config file (--config),
// then its named flags, then --set key=value overrides, in that order.
// Exit codes: 0 success, 2 usage or configuration error, 1 anything else.

#include <CLI11.hpp>

#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "penn/checkpoint.hpp"
#include "penn/errors.hpp"
#include "penn/experiments.hpp"
#include "penn/synth.hpp"
#include "penn/timing.hpp"
#include "penn/train.hpp"

namespace fs = std::filesystem;
using namespace penn;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

/// Config sources for one subcommand.
struct KeySources {
    std::string config_file;
    std::vector<std::string> overrides;
    // deque: CLI11 keeps pointers to the values, so they must not move.
    std::deque<std::pair<std::string, std::optional<std::string>>> flags;

    std::optional<std::string>& flag(const std::string& key) {
        flags.emplace_back(key, std::nullopt);
        return flags.back().second;
    }

    KvConfig resolve(const std::set<std::string>& known) const {
        KvConfig kv = config_file.empty() ? KvConfig{} : KvConfig::load(config_file);
        for (const auto& [key, value] : flags)
            if (value) kv.set(key, *value);
        for (const auto& o : overrides) kv.set_override(o);
        kv.require_known(known);
        return kv;
    }
};

void add_common(CLI::App* cmd, KeySources& src) {
    cmd->add_option("-c,--config", src.config_file, "flat key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", src.overrides, "key=value override (repeatable)");
}

fs::path default_out_dir() {
    if (const char* env = std::getenv("PENN_OUT_DIR"); env && *env) return env;
    return "penn_out";
}

std::set<std::string> with(std::set<std::string> keys, std::initializer_list<const char*> more) {
    for (auto k : more) keys.insert(k);
    return keys;
}

int cmd_gen_data(const KeySources& src, const fs::path& out_dir) {
    const auto kv = src.resolve({"regime", "count", "noise_sd", "seed", "output"});
    SyntheticGenConfig g;
    g.regime = parse_regime(kv.get_string("regime", "hs"));
    g.noise_sd = kv.get_double("noise_sd", SyntheticGenConfig::default_noise(g.regime));
    const long long count = kv.get_int("count", 1000);
    if (count < 0) throw ConfigError("count must be non-negative");
    g.count = static_cast<std::size_t>(count);
    g.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    const fs::path output = kv.get_string("output", (out_dir / ("data_" + regime_name(g.regime) + ".csv")).string());
    const auto records = synth_generate(g);
    write_csv(output, records);
    std::size_t zero = 0;
    for (const auto& r : records) zero += r.impulse == 0.0 ? 1 : 0;
    std::cout << "wrote " << records.size() << " " << regime_name(g.regime) << " records (" << zero
              << " zero-impulse) to " << output.string() << '\n';
    return 0;
}

void write_metrics(const fs::path& path, const MetricsReport& r) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << "key,value\n";
    for (const auto& [k, v] : r.config) {
        out << "config." << k << ',' << (v.find(',') == std::string::npos ? v : '"' + v + '"') << '\n';
    }
    out.precision(17);
    out << "params," << r.param_count << '\n'
        << "train_samples," << r.train_samples << '\n'
        << "best_epoch," << r.best_epoch << '\n'
        << "best_val_mape," << r.best_val_mape << '\n'
        << "final_val_mape," << r.final_val_mape << '\n'
        << "train_mape," << r.train_mape << '\n'
        << "test_mape," << r.test_mape << '\n'
        << "train_seconds," << r.train_seconds << '\n'
        << "converged," << (r.converged ? "true" : "false") << '\n';
}

int cmd_train(const KeySources& src, const fs::path& out_dir) {
    const auto kv = src.resolve(with(TrainConfig::known_keys(), {"checkpoint", "history", "metrics"}));
    KvConfig train_kv;
    for (const auto& [k, v] : kv.entries())
        if (TrainConfig::known_keys().count(k)) train_kv.set(k, v);
    const TrainConfig cfg = TrainConfig::from_kv(train_kv);
    if (!cfg.data_file && !cfg.generator) {
        throw ConfigError("train needs a dataset source: --data FILE or --regime hs|ls");
    }
    const auto result = train(cfg);
    const fs::path ckpt = kv.get_string("checkpoint", (out_dir / "model.ckpt").string());
    save_checkpoint(ckpt, result.checkpoint);
    write_history_csv(kv.get_string("history", (out_dir / "train_history.csv").string()), result.report);
    write_metrics(kv.get_string("metrics", (out_dir / "train_metrics.csv").string()), result.report);
    std::cout << summarize(result.report) << "checkpoint: " << ckpt.string() << '\n';
    return 0;
}

int cmd_eval(const KeySources& src) {
    const auto kv = src.resolve({"checkpoint", "data", "regime", "count", "noise_sd", "gen_seed",
                                 "clamp_negative_thrust", "drop_zero_impulse"});
    const auto path = kv.get("checkpoint");
    if (!path) throw ConfigError("eval needs --checkpoint");
    const Checkpoint ckpt = load_checkpoint(fs::path(*path));
    PredictionPolicy policy;
    policy.clamp_negative_thrust = kv.get_bool("clamp_negative_thrust", true);
    policy.drop_zero_impulse = kv.get_bool("drop_zero_impulse", true);

    std::vector<SampleRecord> records;
    if (auto data = kv.get("data")) {
        records = load_csv(*data, policy).records;
    } else if (auto regime = kv.get("regime")) {
        SyntheticGenConfig g;
        g.regime = parse_regime(*regime);
        g.count = static_cast<std::size_t>(kv.get_int("count", 1000));
        g.noise_sd = kv.get_double("noise_sd", SyntheticGenConfig::default_noise(g.regime));
        g.seed = static_cast<std::uint64_t>(kv.get_int("gen_seed", 1));
        records = synth_generate(g);
        if (policy.drop_zero_impulse) drop_zero_impulse(records);
    } else {
        throw ConfigError("eval needs a dataset source: --data FILE or --regime hs|ls");
    }
    const double m = evaluate(ckpt, records, policy);
    std::cout << display_name(ckpt.model.spec()) << " " << target_name(ckpt.model.spec().target) << " MAPE "
              << m << "% over " << records.size() << " records\n";
    return 0;
}

int cmd_count_params(const KeySources& src, bool all) {
    const auto kv = src.resolve({"model", "width"});
    if (all) {
        for (auto kind : kAllModelKinds) {
            ModelSpec spec;
            spec.kind = kind;
            std::cout << display_name(spec) << ',' << count_params(spec) << '\n';
        }
        for (double w : kWidthFamily) {
            if (w == 1.0) continue;
            ModelSpec spec;
            spec.width = w;
            std::cout << display_name(spec) << ',' << count_params(spec) << '\n';
        }
        return 0;
    }
    ModelSpec spec;
    try {
        spec.kind = parse_model_kind(kv.get_string("model", "penn-bnf"));
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    spec.width = kv.get_double("width", 1.0);
    spec.validate();
    std::cout << count_params(spec) << '\n';
    return 0;
}

int cmd_experiment(const KeySources& src, const std::string& name, const fs::path& out_dir) {
    auto kv = src.resolve(ExperimentConfig::known_keys());
    if (!kv.has("out_dir")) kv.set("out_dir", out_dir.string());
    const ExperimentConfig cfg = ExperimentConfig::from_kv(kv);
    ExperimentRunner runner(cfg);
    ExperimentTables t;
    if (name == "comparative") t = run_comparative(runner);
    else if (name == "loss") t = run_loss_ablation(runner);
    else if (name == "size") t = run_size_dependence(runner);
    else if (name == "scaling") t = run_scaling_family(runner);
    else t = run_timing(runner);
    const fs::path dir = *cfg.out_dir;
    t.main.write_csv(dir / (name + ".csv"));
    t.runs.write_csv(dir / (name + "_runs.csv"));
    std::cout << t.main.to_text() << "\n" << runner.runs_trained() << " runs; tables in " << dir.string() << '\n';
    if (name == "timing") std::cout << "hardware: " << hardware_description() << '\n';
    return 0;
}

int cmd_bench(const KeySources& src) {
    const auto kv = src.resolve({"checkpoint", "model", "width", "regime", "count", "passes", "seed"});
    SyntheticGenConfig g;
    g.regime = parse_regime(kv.get_string("regime", "hs"));
    g.count = static_cast<std::size_t>(kv.get_int("count", 1000));
    g.noise_sd = SyntheticGenConfig::default_noise(g.regime);
    auto records = synth_generate(g);
    drop_zero_impulse(records);

    std::optional<Checkpoint> ckpt;
    if (auto path = kv.get("checkpoint")) {
        ckpt = load_checkpoint(fs::path(*path));
    } else {
        ModelSpec spec;
        spec.kind = parse_model_kind(kv.get_string("model", "penn-bnf"));
        spec.width = kv.get_double("width", 1.0);
        spec.validate();
        ckpt = Checkpoint{Model::create(spec, static_cast<std::uint64_t>(kv.get_int("seed", 0))),
                          compute_stats(records)};
    }
    const auto passes = static_cast<std::size_t>(std::max(1LL, kv.get_int("passes", 10000)));
    const TimingReport rep = bench_timing(*ckpt, records, passes);
    std::cout << rep.model << " (" << rep.param_count << " params): " << rep.mean_inference_seconds * 1e6
              << " us per single-sample forward over " << rep.passes << " passes\n"
              << "hardware: " << rep.hardware << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PENN aeroengine performance models: data, training, experiments"};
    app.require_subcommand(1);
    std::string out_dir_flag;
    app.add_option("-o,--out", out_dir_flag, "output directory (default: $PENN_OUT_DIR or ./penn_out)");

    KeySources gen_src, train_src, eval_src, count_src, exp_src, bench_src;

    auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset CSV");
    add_common(gen, gen_src);
    gen->add_option("--regime", gen_src.flag("regime"), "hs or ls");
    gen->add_option("--count", gen_src.flag("count"), "number of samples");
    gen->add_option("--noise-sd", gen_src.flag("noise_sd"), "relative target noise sd");
    gen->add_option("--seed", gen_src.flag("seed"), "generator seed");
    gen->add_option("--output", gen_src.flag("output"), "CSV path");

    auto* tr = app.add_subcommand("train", "train one model and save a checkpoint");
    tr->footer(
        "Config keys: model width target loss epochs batch_size lr lr_milestones lr_decay seed data_seed split "
        "subsample data regime count noise_sd gen_seed clamp_negative_thrust drop_zero_impulse checkpoint "
        "history metrics");
    add_common(tr, train_src);
    tr->add_option("--model", train_src.flag("model"), "mlp-res, mlp-mul, penn-fcf, penn-bnf, penn-abf, penn-cawf");
    tr->add_option("--width", train_src.flag("width"), "width multiplier: 0.25, 0.5, 1, 2, 4");
    tr->add_option("--target", train_src.flag("target"), "thrust or impulse");
    tr->add_option("--loss", train_src.flag("loss"), "mse, mae or mare");
    tr->add_option("--epochs", train_src.flag("epochs"));
    tr->add_option("--seed", train_src.flag("seed"));
    tr->add_option("--data", train_src.flag("data"), "dataset CSV");
    tr->add_option("--regime", train_src.flag("regime"), "generate data for hs or ls instead of --data");
    tr->add_option("--count", train_src.flag("count"), "generated sample count");
    tr->add_option("--checkpoint", train_src.flag("checkpoint"), "checkpoint output path");

    auto* ev = app.add_subcommand("eval", "MAPE of a checkpoint on a dataset");
    add_common(ev, eval_src);
    ev->add_option("--checkpoint", eval_src.flag("checkpoint"));
    ev->add_option("--data", eval_src.flag("data"), "dataset CSV");
    ev->add_option("--regime", eval_src.flag("regime"), "generate data for hs or ls instead of --data");
    ev->add_option("--count", eval_src.flag("count"));

    auto* cp = app.add_subcommand("count-params", "print the trainable parameter count");
    add_common(cp, count_src);
    cp->add_option("--model", count_src.flag("model"));
    cp->add_option("--width", count_src.flag("width"));
    bool count_all = false;
    cp->add_flag("--all", count_all, "list every model and family member");

    auto* ex = app.add_subcommand("experiment", "run an experiment grid and write its tables");
    ex->footer(
        "Config keys: epochs hs_count ls_count hs_data ls_data hs_noise_sd ls_noise_sd split seeds data_seed "
        "gen_seed regimes timing_passes hs_factors ls_factors out_dir parallel verbose");
    add_common(ex, exp_src);
    std::string exp_name;
    ex->add_option("name", exp_name, "comparative, loss, size, scaling or timing")
        ->required()
        ->check(CLI::IsMember({"comparative", "loss", "size", "scaling", "timing"}));
    ex->add_option("--epochs", exp_src.flag("epochs"));
    ex->add_option("--seeds", exp_src.flag("seeds"), "comma-separated training seeds");
    ex->add_option("--hs-count", exp_src.flag("hs_count"));
    ex->add_option("--ls-count", exp_src.flag("ls_count"));

    auto* be = app.add_subcommand("bench", "single-sample inference latency");
    add_common(be, bench_src);
    be->add_option("--checkpoint", bench_src.flag("checkpoint"));
    be->add_option("--model", bench_src.flag("model"));
    be->add_option("--width", bench_src.flag("width"));
    be->add_option("--passes", bench_src.flag("passes"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    const fs::path out_dir = out_dir_flag.empty() ? default_out_dir() : fs::path(out_dir_flag);
    try {
        if (gen->parsed()) return cmd_gen_data(gen_src, out_dir);
        if (tr->parsed()) return cmd_train(train_src, out_dir);
        if (ev->parsed()) return cmd_eval(eval_src);
        if (cp->parsed()) return cmd_count_params(count_src, count_all);
        if (ex->parsed()) return cmd_experiment(exp_src, exp_name, out_dir);
        if (be->parsed()) return cmd_bench(bench_src);
    } catch (const ConfigError& e) {
        std::cerr << "penn: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "penn: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
