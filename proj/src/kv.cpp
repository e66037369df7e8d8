#include "hybridhi/kv.hpp"

#include "hybridhi/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hybridhi::kv {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool parse_number(const std::string& s, double& out) {
    std::string_view v = s;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    std::string cleaned(v);
    cleaned.erase(std::remove(cleaned.begin(), cleaned.end(), '_'), cleaned.end());
    const auto r = std::from_chars(cleaned.data(), cleaned.data() + cleaned.size(), out);
    return r.ec == std::errc() && r.ptr == cleaned.data() + cleaned.size();
}

std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, r.ptr);
    return s;
}

}  // namespace

Document Document::parse(const std::string& text, const std::string& origin) {
    Document doc;
    std::istringstream in(text);
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError(where + ": empty key or value");
        if (!section.empty()) key = section + "." + key;

        if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"') throw ConfigError(where + ": unterminated string");
            doc.values_[key] = val.substr(1, val.size() - 2);
        } else if (val == "true" || val == "false") {
            doc.values_[key] = (val == "true");
        } else if (val.front() == '[') {
            if (val.back() != ']') throw ConfigError(where + ": unterminated list");
            std::vector<double> items;
            std::istringstream ls(val.substr(1, val.size() - 2));
            std::string item;
            while (std::getline(ls, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                double d = 0;
                if (!parse_number(item, d)) throw ConfigError(where + ": list items must be numbers");
                items.push_back(d);
            }
            doc.values_[key] = std::move(items);
        } else {
            double d = 0;
            if (!parse_number(val, d)) throw ConfigError(where + ": cannot parse value '" + val + "'");
            doc.values_[key] = d;
        }
    }
    return doc;
}

Document Document::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), file.string());
}

std::string Document::dump() const {
    std::ostringstream out;
    for (const auto& [key, v] : values_) {
        out << key << " = ";
        if (const auto* b = std::get_if<bool>(&v)) out << (*b ? "true" : "false");
        else if (const auto* d = std::get_if<double>(&v)) out << format_number(*d);
        else if (const auto* s = std::get_if<std::string>(&v)) out << '"' << *s << '"';
        else {
            const auto& l = std::get<std::vector<double>>(v);
            out << '[';
            for (std::size_t i = 0; i < l.size(); ++i) out << (i ? ", " : "") << format_number(l[i]);
            out << ']';
        }
        out << '\n';
    }
    return out.str();
}

void Document::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot write " + file.string());
    out << dump();
}

double Document::number(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    throw ConfigError("config key '" + key + "' must be a number");
}

std::int64_t Document::integer(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto* d = std::get_if<double>(&it->second);
    if (!d || *d != std::floor(*d)) throw ConfigError("config key '" + key + "' must be an integer");
    return static_cast<std::int64_t>(*d);
}

bool Document::boolean(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* b = std::get_if<bool>(&it->second)) return *b;
    throw ConfigError("config key '" + key + "' must be true or false");
}

std::string Document::string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw ConfigError("config key '" + key + "' must be a quoted string");
}

std::vector<double> Document::list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* l = std::get_if<std::vector<double>>(&it->second)) return *l;
    if (const auto* d = std::get_if<double>(&it->second)) return {*d};
    throw ConfigError("config key '" + key + "' must be a list of numbers");
}

std::vector<std::string> Document::unknown_keys(const std::vector<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [key, v] : values_)
        if (std::find(known.begin(), known.end(), key) == known.end()) out.push_back(key);
    return out;
}

}  // namespace hybridhi::kv
