#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "plab/error.hpp"

namespace plab {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// %.9g is idempotent under parse/format, which keeps re-serialized files
// byte-identical.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace detail

// Flat `key = value` configuration with `#` comments and dotted section
// prefixes (e.g. `sto.num_samples = 8`). Keys serialize in sorted order so
// saved files are diff-friendly and reproducible.
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.entries_[key] = value;
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write config file: " + path);
        out << serialize();
    }

    std::string serialize() const {
        std::ostringstream out;
        for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
        return out.str();
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("missing config key: " + key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    long long get_int(const std::string& key) const {
        const std::string s = get_string(key);
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not an integer: `" + s + "`");
        }
    }
    long long get_int(const std::string& key, long long fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    bool get_bool(const std::string& key) const {
        const std::string s = get_string(key);
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw ConfigError("config key " + key + ": not a boolean: `" + s + "`");
    }
    bool get_bool(const std::string& key, bool fallback) const {
        return has(key) ? get_bool(key) : fallback;
    }

    // Space-separated list of reals.
    std::vector<double> get_doubles(const std::string& key) const {
        std::istringstream in(get_string(key));
        std::vector<double> out;
        std::string tok;
        while (in >> tok) out.push_back(to_double(key, tok));
        if (out.empty()) throw ConfigError("config key " + key + ": empty list");
        return out;
    }
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const {
        return has(key) ? get_doubles(key) : fallback;
    }

    std::vector<std::string> get_strings(const std::string& key) const {
        std::istringstream in(get_string(key));
        std::vector<std::string> out;
        std::string tok;
        while (in >> tok) out.push_back(tok);
        if (out.empty()) throw ConfigError("config key " + key + ": empty list");
        return out;
    }
    std::vector<std::string> get_strings(const std::string& key,
                                         const std::vector<std::string>& fallback) const {
        return has(key) ? get_strings(key) : fallback;
    }

    void set_string(const std::string& key, const std::string& value) { entries_[key] = value; }
    void set_double(const std::string& key, double value) { entries_[key] = detail::fmt_double(value); }
    void set_int(const std::string& key, long long value) { entries_[key] = std::to_string(value); }
    void set_bool(const std::string& key, bool value) { entries_[key] = value ? "true" : "false"; }
    void set_doubles(const std::string& key, const std::vector<double>& values) {
        std::ostringstream out;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out << ' ';
            out << detail::fmt_double(values[i]);
        }
        entries_[key] = out.str();
    }

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    static double to_double(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not a number: `" + s + "`");
        }
    }

    std::map<std::string, std::string> entries_;
};

} // namespace plab
