#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rtp/errors.hpp"

namespace rtp {

/// Flat key=value config with one [section] per experiment. Global keys
/// (model, master_seed, output_dir) come before the first section header.
/// Lines starting with '#' are comments. Every diagnostic carries file:line.
struct ConfigFile {
    struct Entry {
        std::string value;
        int line = 0;
    };
    struct Section {
        std::string name;
        int line = 0;
        std::map<std::string, Entry> keys;
    };

    std::string path;
    std::map<std::string, Entry> globals;
    std::vector<Section> sections;

    const Section* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.begin(), e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
}

} // namespace detail

inline ConfigFile parse_config_text(const std::string& text, const std::string& path) {
    ConfigFile cfg;
    cfg.path = path;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    ConfigFile::Section* current = nullptr;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw config_error(path + ":" + std::to_string(lineno) + ": unterminated section header");
            const std::string name = detail::trim(t.substr(1, t.size() - 2));
            if (name.empty())
                throw config_error(path + ":" + std::to_string(lineno) + ": empty section name");
            if (cfg.find(name))
                throw config_error(path + ":" + std::to_string(lineno) + ": duplicate section [" + name + "]");
            cfg.sections.push_back({name, lineno, {}});
            current = &cfg.sections.back();
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
        auto& table = current ? current->keys : cfg.globals;
        if (table.count(key))
            throw config_error(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        table[key] = {value, lineno};
    }
    return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str(), path);
}

/// Command-line overrides: "key=value" targets a global key,
/// "section.key=value" a section key (creating the section if needed).
inline void apply_override(ConfigFile& cfg, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw config_error("override '" + spec + "' is not of the form key=value");
    const std::string key = detail::trim(spec.substr(0, eq));
    const std::string value = detail::trim(spec.substr(eq + 1));
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        cfg.globals[key] = {value, 0};
        return;
    }
    const std::string section = key.substr(0, dot);
    const std::string inner = key.substr(dot + 1);
    if (section.empty() || inner.empty())
        throw config_error("override '" + spec + "' has an empty section or key part");
    for (auto& s : cfg.sections)
        if (s.name == section) {
            s.keys[inner] = {value, 0};
            return;
        }
    cfg.sections.push_back({section, 0, {{inner, {value, 0}}}});
}

// --- typed value parsing -----------------------------------------------------

inline double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error(where + ": '" + v + "' is not a number");
    }
}

inline long long parse_int(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw config_error(where + ": '" + v + "' is not an integer");
    }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const std::uint64_t i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw config_error(where + ": '" + v + "' is not an unsigned integer");
    }
}

inline bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error(where + ": '" + v + "' is not a boolean");
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(v);
    while (std::getline(is, cell, ',')) {
        const std::string t = detail::trim(cell);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

} // namespace rtp
