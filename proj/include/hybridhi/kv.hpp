#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hybridhi::kv {

// Flat typed key-value documents in a TOML subset:
//   # comment
//   key = 1.5            (number)
//   name = "text"        (string)
//   flag = true          (bool)
//   list = [1, 2, 3]     (number list)
//   [section]            (prefixes following keys with "section.")
using Value = std::variant<bool, double, std::string, std::vector<double>>;

class Document {
public:
    static Document parse(const std::string& text, const std::string& origin = "<string>");
    static Document load(const std::filesystem::path& file);

    void save(const std::filesystem::path& file) const;
    std::string dump() const;

    bool contains(const std::string& key) const { return values_.contains(key); }
    void set(const std::string& key, Value v) { values_[key] = std::move(v); }
    void erase(const std::string& key) { values_.erase(key); }
    const std::map<std::string, Value>& values() const { return values_; }

    // Typed getters throw ConfigError on type mismatch.
    double number(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::string string(const std::string& key, const std::string& fallback) const;
    std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;

    // Keys not in `known` (used to reject typos).
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

private:
    std::map<std::string, Value> values_;
};

}  // namespace hybridhi::kv
