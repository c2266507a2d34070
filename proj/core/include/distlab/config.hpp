#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace distlab {

/// Flat structured config text: `[section]` headers, `key = value` lines,
/// `#` comments. Line numbers are kept for diagnostics, and the canonical
/// re-rendering feeds the provenance hash embedded in reports.
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    /// All keys of one section as a string map (manifold blocks are parsed
    /// this way).
    std::map<std::string, std::string> section_map(const std::string& section) const;

    /// Sections in original order.
    std::vector<std::string> sections() const;

    std::string canonical_text() const;
    std::uint64_t hash() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string origin_;
    std::vector<std::string> section_order_;
    std::map<std::string, std::map<std::string, Entry>> sections_;

    const Entry* find(const std::string& section, const std::string& key) const;
};

} // namespace distlab
