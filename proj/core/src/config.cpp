#include "distlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "distlab/errors.hpp"
#include "distlab/numeric.hpp"

namespace distlab {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw InvalidInput(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw InvalidInput(origin + ":" + std::to_string(lineno) + ": empty section name");
            if (!cfg.sections_.count(section)) cfg.section_order_.push_back(section);
            cfg.sections_[section]; // materialize
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw InvalidInput(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw InvalidInput(origin + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw InvalidInput(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
        if (cfg.sections_[section].count(key))
            throw InvalidInput(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                               "' in [" + section + "]");
        cfg.sections_[section][key] = {value, lineno};
    }
    return cfg;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return nullptr;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    return &kit->second;
}

bool ConfigFile::has_section(const std::string& section) const { return sections_.count(section) > 0; }

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e)
        throw InvalidInput(origin_ + ": missing required field '" + key + "' in [" + section + "]");
    return e->value;
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw InvalidInput(origin_ + ": missing required field '" + key + "' in [" + section + "]");
    char* end = nullptr;
    double v = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || *end != '\0')
        throw InvalidInput(origin_ + ":" + std::to_string(e->line) + ": field '" + key +
                           "' is not a number: '" + e->value + "'");
    return v;
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw InvalidInput(origin_ + ": missing required field '" + key + "' in [" + section + "]");
    char* end = nullptr;
    long v = std::strtol(e->value.c_str(), &end, 10);
    if (end == e->value.c_str() || *end != '\0')
        throw InvalidInput(origin_ + ":" + std::to_string(e->line) + ": field '" + key +
                           "' is not an integer: '" + e->value + "'");
    return v;
}

long ConfigFile::get_int_or(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    throw InvalidInput(origin_ + ":" + std::to_string(e->line) + ": field '" + key +
                       "' must be true/false, got '" + e->value + "'");
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw InvalidInput(origin_ + ": missing required field '" + key + "' in [" + section + "]");
    std::vector<double> out;
    std::istringstream ss(e->value);
    std::string field;
    while (std::getline(ss, field, ',')) {
        field = trim(field);
        char* end = nullptr;
        double v = std::strtod(field.c_str(), &end);
        if (end == field.c_str() || *end != '\0')
            throw InvalidInput(origin_ + ":" + std::to_string(e->line) + ": field '" + key +
                               "' has a bad list entry: '" + field + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw InvalidInput(origin_ + ":" + std::to_string(e->line) + ": field '" + key + "' is an empty list");
    return out;
}

std::vector<std::string> ConfigFile::get_strings(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw InvalidInput(origin_ + ": missing required field '" + key + "' in [" + section + "]");
    std::vector<std::string> out;
    std::istringstream ss(e->value);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    return out;
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
    if (!sections_.count(section)) section_order_.push_back(section);
    sections_[section][key] = {value, 0};
}

std::map<std::string, std::string> ConfigFile::section_map(const std::string& section) const {
    std::map<std::string, std::string> out;
    auto sit = sections_.find(section);
    if (sit == sections_.end()) return out;
    for (const auto& [key, entry] : sit->second) out[key] = entry.value;
    return out;
}

std::vector<std::string> ConfigFile::sections() const { return section_order_; }

std::string ConfigFile::canonical_text() const {
    // Sections in declaration order, keys alphabetical: a stable rendering
    // so equal configs hash equal regardless of formatting.
    std::ostringstream out;
    for (const std::string& section : section_order_) {
        out << "[" << section << "]\n";
        for (const auto& [key, entry] : sections_.at(section)) out << key << " = " << entry.value << "\n";
    }
    return out.str();
}

std::uint64_t ConfigFile::hash() const { return fnv1a_hash(canonical_text()); }

} // namespace distlab
