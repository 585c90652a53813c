#ifndef MFREG_CONFIG_HPP
#define MFREG_CONFIG_HPP

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfreg/data_io.hpp"
#include "mfreg/errors.hpp"

namespace mfreg {

// Flat key-value configuration. Keys are dotted ("grid.learning_rates");
// an INI-style [section] header prefixes the keys that follow it, so
//
//   [grid]
//   learning_rates = 0.001, 0.01
//
// and `grid.learning_rates = 0.001, 0.01` are equivalent.
class Config {
public:
    static Config parse(std::istream& in) {
        Config c;
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view sv = detail::trim(line);
            if (sv.empty() || sv[0] == '#' || sv[0] == ';') continue;
            if (sv.front() == '[') {
                if (sv.back() != ']')
                    throw parse_error(line_no, "config line " + std::to_string(line_no) +
                                                   ": unterminated section header");
                section = std::string(detail::trim(sv.substr(1, sv.size() - 2)));
                continue;
            }
            auto eq = sv.find('=');
            if (eq == std::string_view::npos)
                throw parse_error(line_no, "config line " + std::to_string(line_no) +
                                               ": expected key = value");
            std::string key(detail::trim(sv.substr(0, eq)));
            std::string value(detail::trim(sv.substr(eq + 1)));
            if (key.empty())
                throw parse_error(line_no,
                                  "config line " + std::to_string(line_no) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            c.values_[key] = value;
        }
        return c;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw io_error("cannot open config file: " + path);
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback = {}) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw contract_error("config: missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        auto v = detail::parse_double(it->second);
        if (!v) throw contract_error("config: key '" + key + "' is not a number");
        return *v;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        auto v = detail::parse_int(it->second);
        if (!v) throw contract_error("config: key '" + key + "' is not an integer");
        return *v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& s = it->second;
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw contract_error("config: key '" + key + "' is not a boolean");
    }

    // Comma- or whitespace-separated list of numbers.
    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        for (const std::string& tok : tokens(key)) {
            auto v = detail::parse_double(tok);
            if (!v)
                throw contract_error("config: key '" + key + "' has non-numeric entry '" + tok +
                                     "'");
            out.push_back(*v);
        }
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key) const { return tokens(key); }

private:
    std::vector<std::string> tokens(const std::string& key) const {
        std::vector<std::string> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::string buf;
        for (char ch : it->second) {
            if (ch == ',' || ch == ' ' || ch == '\t') {
                if (!buf.empty()) out.push_back(buf);
                buf.clear();
            } else {
                buf.push_back(ch);
            }
        }
        if (!buf.empty()) out.push_back(buf);
        return out;
    }

    std::map<std::string, std::string> values_;
};

} // namespace mfreg

#endif
