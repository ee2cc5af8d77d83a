#include "extlab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace extlab {
namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& s, const std::string& ctx) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config: cannot parse '" + s + "' as number for " + ctx);
    }
}

int parse_int(const std::string& s, const std::string& ctx) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ValidationError("config: cannot parse '" + s + "' as integer for " + ctx);
    return v;
}

}  // namespace

bool ConfigSection::has(const std::string& key) const { return find(key) != nullptr; }

const std::string* ConfigSection::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

std::string ConfigSection::get_string(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw ValidationError("config: missing key '" + key + "' in section [" + name + "]");
    return *v;
}

std::string ConfigSection::get_string(const std::string& key, const std::string& dflt) const {
    const std::string* v = find(key);
    return v ? *v : dflt;
}

double ConfigSection::get_double(const std::string& key) const {
    return parse_double(get_string(key), "[" + name + "] " + key);
}

double ConfigSection::get_double(const std::string& key, double dflt) const {
    const std::string* v = find(key);
    return v ? parse_double(*v, "[" + name + "] " + key) : dflt;
}

int ConfigSection::get_int(const std::string& key) const {
    return parse_int(get_string(key), "[" + name + "] " + key);
}

int ConfigSection::get_int(const std::string& key, int dflt) const {
    const std::string* v = find(key);
    return v ? parse_int(*v, "[" + name + "] " + key) : dflt;
}

bool ConfigSection::get_bool(const std::string& key, bool dflt) const {
    const std::string* v = find(key);
    if (!v) return dflt;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ValidationError("config: cannot parse '" + *v + "' as bool for [" + name + "] " + key);
}

Vec2 ConfigSection::get_vec2(const std::string& key) const {
    const auto toks = split_ws(get_string(key));
    if (toks.size() != 2)
        throw ValidationError("config: key '" + key + "' in [" + name + "] must hold two numbers");
    return {parse_double(toks[0], key), parse_double(toks[1], key)};
}

Vec2 ConfigSection::get_vec2(const std::string& key, Vec2 dflt) const {
    return has(key) ? get_vec2(key) : dflt;
}

std::vector<double> ConfigSection::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& t : split_ws(get_string(key))) out.push_back(parse_double(t, key));
    return out;
}

std::vector<int> ConfigSection::get_ints(const std::string& key) const {
    std::vector<int> out;
    for (const auto& t : split_ws(get_string(key))) out.push_back(parse_int(t, key));
    return out;
}

const ConfigSection* Config::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const ConfigSection& Config::require(const std::string& name) const {
    const ConfigSection* s = find(name);
    if (!s) throw ValidationError("config " + source_name + ": missing section [" + name + "]");
    return *s;
}

std::vector<const ConfigSection*> Config::all(const std::string& name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections)
        if (s.name == name) out.push_back(&s);
    return out;
}

Config Config::parse_string(const std::string& text, const std::string& source_name) {
    Config cfg;
    cfg.source_name = source_name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    ConfigSection* current = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError(source_name + ":" + std::to_string(lineno) +
                                      ": malformed section header '" + line + "'");
            cfg.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            current = &cfg.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(source_name + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
        if (!current)
            throw ValidationError(source_name + ":" + std::to_string(lineno) +
                                  ": key-value pair before any [section]");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError(source_name + ":" + std::to_string(lineno) + ": empty key");
        if (current->has(key))
            throw ValidationError(source_name + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "' in section [" + current->name + "]");
        current->entries.emplace_back(std::move(key), std::move(value));
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("config: cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

}  // namespace extlab
