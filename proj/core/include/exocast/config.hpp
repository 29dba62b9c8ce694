#pragma once

#include <map>
#include <string>
#include <vector>

namespace exocast {

/// Flat `key = value` configuration with optional `[section]` headers;
/// section names prefix keys as "section.key". '#' starts a comment.
/// Parse errors throw ConfigError with the line number.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key) const;
    int get_int_or(const std::string& key, int fallback) const;
    double get_double(const std::string& key) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    /// Comma-separated list value; empty value -> empty list.
    std::vector<std::string> get_list_or(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    /// Keys in sorted order (canonical form for manifests).
    std::string dump() const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace exocast
