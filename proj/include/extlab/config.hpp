#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "extlab/core.hpp"

namespace extlab {

// One [section] of a config file: an ordered key=value list.
struct ConfigSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    const std::string* find(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double dflt) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    Vec2 get_vec2(const std::string& key) const;
    Vec2 get_vec2(const std::string& key, Vec2 dflt) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key) const;
};

// Sections + key=value text format shared by all commands.  '#' and ';' start
// comments, section headers are bracketed, keys may repeat across sections
// (e.g. one [obstacle] section per obstacle) but not within one.
struct Config {
    std::string source_name;
    std::vector<ConfigSection> sections;

    const ConfigSection* find(const std::string& name) const;
    const ConfigSection& require(const std::string& name) const;
    std::vector<const ConfigSection*> all(const std::string& name) const;

    static Config parse_string(const std::string& text, const std::string& source_name);
    static Config parse_file(const std::string& path);
};

}  // namespace extlab
