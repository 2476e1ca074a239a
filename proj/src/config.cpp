#include "ms2d/config.hpp"

#include "ms2d/common.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace ms2d {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        c.kv_[key] = val;
    }
    return c;
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

std::string Config::get_str(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

double Config::get_f64(const std::string& key, double def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': not a number: " + it->second);
    }
}

long long Config::get_i64(const std::string& key, long long def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        size_t pos = 0;
        long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': not an integer: " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw UsageError("config key '" + key + "': not a boolean: " + v);
}

std::string Config::require_str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw UsageError("missing mandatory config key: " + key);
    return it->second;
}

double Config::require_f64(const std::string& key) const {
    if (!has(key)) throw UsageError("missing mandatory config key: " + key);
    return get_f64(key, 0.0);
}

long long Config::require_i64(const std::string& key) const {
    if (!has(key)) throw UsageError("missing mandatory config key: " + key);
    return get_i64(key, 0);
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (auto it = kv_.lower_bound(prefix); it != kv_.end(); ++it) {
        if (it->first.compare(0, prefix.size(), prefix) != 0) break;
        out.push_back(it->first);
    }
    return out;
}

std::string Config::to_text() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

uint64_t Config::hash() const {
    std::string t = to_text();
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : t) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::pair<double, double> parse_range(const std::string& s) {
    size_t colon = s.find(':');
    if (colon == std::string::npos)
        throw UsageError("expected lo:hi range, got: " + s);
    try {
        double lo = std::stod(s.substr(0, colon));
        double hi = std::stod(s.substr(colon + 1));
        return {lo, hi};
    } catch (const std::exception&) {
        throw UsageError("expected numeric lo:hi range, got: " + s);
    }
}

} // namespace ms2d
