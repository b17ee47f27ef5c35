#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace penn {

/// Flat `key = value` text. Blank lines and `#` comments are ignored; later
/// assignments override earlier ones.
class KvConfig {
public:
    static KvConfig parse(std::istream& in, const std::string& source = "<config>");
    static KvConfig load(const std::filesystem::path& path);

    /// "key=value" as given on a command line; ConfigError if there is no '='.
    void set_override(std::string_view assignment);
    void set(std::string key, std::string value);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// ConfigError naming the first key not in `known`.
    void require_known(const std::set<std::string>& known) const;

    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace penn
