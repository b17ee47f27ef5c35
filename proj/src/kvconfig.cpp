#include "penn/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "penn/errors.hpp"

namespace penn {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KvConfig KvConfig::parse(std::istream& in, const std::string& source) {
    KvConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value', got '" +
                              body + "'");
        }
        auto key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        cfg.set(std::move(key), trim(std::string_view(body).substr(eq + 1)));
    }
    return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

void KvConfig::set_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    }
    auto key = trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("override '" + std::string(assignment) + "' has an empty key");
    set(std::move(key), trim(assignment.substr(eq + 1)));
}

void KvConfig::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

std::optional<std::string> KvConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
        throw ConfigError("key '" + key + "': '" + *v + "' is not a number");
    }
    return out;
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
        throw ConfigError("key '" + key + "': '" + *v + "' is not an integer");
    }
    return out;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError("key '" + key + "': '" + *v + "' is not a boolean");
}

void KvConfig::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
}

}  // namespace penn
