#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ms2d {

/**
 * Flat key = value configuration. Lines are UTF-8 text, `#` starts a comment,
 * keys and values are trimmed. Later assignments override earlier ones.
 */
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_str(const std::string& key, const std::string& def) const;
    double get_f64(const std::string& key, double def) const;
    long long get_i64(const std::string& key, long long def) const;
    bool get_bool(const std::string& key, bool def) const;

    /** Throwing accessors for mandatory keys. */
    std::string require_str(const std::string& key) const;
    double require_f64(const std::string& key) const;
    long long require_i64(const std::string& key) const;

    /** Keys matching `prefix` (e.g. "precursor3."), sorted. */
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

    /** Serialized key = value text, sorted by key; stable across runs. */
    std::string to_text() const;

    /** FNV-1a hash of to_text(), for provenance records. */
    uint64_t hash() const;

private:
    std::map<std::string, std::string> kv_;
};

/** Parses "lo:hi" into a pair; both bounds required. */
std::pair<double, double> parse_range(const std::string& s);

} // namespace ms2d
