#include "penn/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "penn/errors.hpp"

namespace penn {

namespace {

constexpr char kMagic[8] = {'P', 'E', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::size_t kPredictChunk = 256;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void read_exact(std::istream& in, void* dst, std::size_t n, const char* what) {
    in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw ContractError(std::string("checkpoint truncated while reading ") + what);
    }
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    read_exact(in, b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in, const char* what) {
    unsigned char b[8];
    read_exact(in, b, 8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

std::string format_exact(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string header_text(const ModelSpec& spec, std::size_t layer_count) {
    std::ostringstream h;
    h << "arch=" << (is_penn(spec.kind) ? "penn" : "baseline") << '\n'
      << "model=" << model_name(spec.kind) << '\n'
      << "width=" << format_exact(spec.width) << '\n'
      << "input_dims=" << spec.group_dims[0] << ',' << spec.group_dims[1] << ','
      << spec.group_dims[2] << ',' << spec.group_dims[3] << '\n'
      << "target=" << target_name(spec.target) << '\n'
      << "layers=" << layer_count << '\n';
    return h.str();
}

ModelSpec parse_header(const std::string& text, std::size_t& layer_count) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ContractError("checkpoint header line '" + line + "' is malformed");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ContractError(std::string("checkpoint header lacks '") + key + "'");
        return it->second;
    };
    ModelSpec spec;
    try {
        spec.kind = parse_model_kind(need("model"));
        spec.width = std::stod(need("width"));
        spec.target = parse_target(need("target"));
        std::istringstream dims(need("input_dims"));
        std::string part;
        for (std::size_t g = 0; g < 4; ++g) {
            if (!std::getline(dims, part, ',')) throw ContractError("checkpoint input_dims needs 4 entries");
            spec.group_dims[g] = std::stoul(part);
        }
        layer_count = std::stoul(need("layers"));
    } catch (const ContractError&) {
        throw;
    } catch (const std::exception& e) {
        throw ContractError(std::string("checkpoint header is invalid: ") + e.what());
    }
    const std::string arch = need("arch");
    if (arch != (is_penn(spec.kind) ? "penn" : "baseline")) {
        throw ContractError("checkpoint architecture tag '" + arch + "' does not match model " +
                            model_name(spec.kind));
    }
    return spec;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    const auto layers = ckpt.model.layers();
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, kCheckpointVersion);
    const auto header = header_text(ckpt.model.spec(), layers.size());
    put_u32(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    const auto& s = ckpt.stats;
    put_u32(out, static_cast<std::uint32_t>(kInputCount));
    for (double v : s.input_mean) put_f64(out, v);
    for (double v : s.input_sd) put_f64(out, v);
    put_f64(out, s.thrust_mean);
    put_f64(out, s.thrust_sd);
    put_f64(out, s.impulse_mean);
    put_f64(out, s.impulse_sd);

    for (const auto& layer : layers) {
        put_u32(out, static_cast<std::uint32_t>(layer.out_dim()));
        put_u32(out, static_cast<std::uint32_t>(layer.in_dim()));
        for (std::size_t i = 0; i < layer.weights.size(); ++i) put_f64(out, layer.weights[i]);
        for (std::size_t i = 0; i < layer.bias.size(); ++i) put_f64(out, layer.bias[i]);
    }
    if (!out) throw ContractError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractError("cannot open " + path.string() + " for writing");
    save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(std::istream& in) {
    char magic[8];
    read_exact(in, magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ContractError("not a checkpoint file (bad magic)");
    const auto version = get_u32(in, "version");
    if (version != kCheckpointVersion) {
        throw ContractError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto header_len = get_u32(in, "header length");
    if (header_len > (1u << 16)) throw ContractError("checkpoint header length is implausible");
    std::string header(header_len, '\0');
    read_exact(in, header.data(), header_len, "header");
    std::size_t layer_count = 0;
    const ModelSpec spec = parse_header(header, layer_count);

    NormalizationStats s;
    if (get_u32(in, "input count") != kInputCount) throw ContractError("checkpoint input count is not 18");
    for (auto& v : s.input_mean) v = get_f64(in, "statistics");
    for (auto& v : s.input_sd) v = get_f64(in, "statistics");
    s.thrust_mean = get_f64(in, "statistics");
    s.thrust_sd = get_f64(in, "statistics");
    s.impulse_mean = get_f64(in, "statistics");
    s.impulse_sd = get_f64(in, "statistics");

    const auto expected = layer_shapes(spec);
    if (expected.size() != layer_count) {
        throw ContractError("checkpoint lists " + std::to_string(layer_count) + " layers, " +
                            display_name(spec) + " has " + std::to_string(expected.size()));
    }
    std::vector<DenseLayer> layers;
    layers.reserve(layer_count);
    for (std::size_t l = 0; l < layer_count; ++l) {
        const auto out_dim = get_u32(in, "layer shape");
        const auto in_dim = get_u32(in, "layer shape");
        if (in_dim != expected[l].first || out_dim != expected[l].second) {
            throw ContractError("checkpoint layer " + std::to_string(l) + " is " + std::to_string(out_dim) +
                                "x" + std::to_string(in_dim) + ", expected " +
                                std::to_string(expected[l].second) + "x" + std::to_string(expected[l].first));
        }
        DenseLayer layer(in_dim, out_dim);
        for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] = get_f64(in, "weights");
        for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] = get_f64(in, "bias");
        layers.push_back(std::move(layer));
    }
    return Checkpoint{Model(spec, std::move(layers)), s};
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractError("cannot open checkpoint " + path.string());
    return load_checkpoint(in);
}

Var decoded_forward(Tape& tape, const Model& model, std::span<const LayerVars> bound, Var x,
                    const NormalizationStats& stats) {
    const Target t = model.spec().target;
    return tape.affine(model.forward(tape, bound, x), stats.target_sd(t), stats.target_mean(t));
}

std::vector<double> predict_raw(const Checkpoint& ckpt, const Tensor& normalized) {
    if (normalized.cols() != kInputCount) {
        throw ContractError("predict: inputs are " + normalized.shape_string() + ", model expects 18 columns");
    }
    const std::size_t n = normalized.rows();
    std::vector<double> out(n);
    const auto chunks = static_cast<std::int64_t>((n + kPredictChunk - 1) / kPredictChunk);

#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kPredictChunk;
        const std::size_t rows = std::min(kPredictChunk, n - begin);
        Tensor x(rows, kInputCount);
        std::memcpy(x.data().data(), normalized.data().data() + begin * kInputCount, rows * kInputCount * sizeof(double));
        Tape tape;
        const auto bound = ckpt.model.bind(tape);
        const Var y = decoded_forward(tape, ckpt.model, bound, tape.constant(std::move(x)), ckpt.stats);
        const Tensor& v = tape.value(y);
        for (std::size_t r = 0; r < rows; ++r) out[begin + r] = v[r];
    }
    return out;
}

std::vector<double> predict(const Checkpoint& ckpt, std::span<const SampleRecord> records,
                            const PredictionPolicy& policy) {
    auto y = predict_raw(ckpt, normalize_inputs(records, ckpt.stats));
    for (auto& v : y) v = apply_policy(ckpt.model.spec().target, v, policy);
    return y;
}

}  // namespace penn
