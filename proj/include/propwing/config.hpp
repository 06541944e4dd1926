#pragma once

// Flat `key = value` configuration files with `[section]` headers.
// Keys are addressed as "section.key"; `#` and `;` start comments.

#include "propwing/csv.hpp"
#include "propwing/errors.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace propwing {

class Config {
public:
    static Config parse(std::istream& in, std::string origin = "<config>") {
        Config cfg;
        cfg.origin_ = std::move(origin);
        std::string section;
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string_view line = csv::trim(raw);
            if (line.empty() || line.front() == '#' || line.front() == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError("unterminated section header", line_no);
                section = std::string(csv::trim(line.substr(1, line.size() - 2)));
                if (section.empty()) throw ParseError("empty section name", line_no);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
            const std::string key(csv::trim(line.substr(0, eq)));
            std::string_view value = line.substr(eq + 1);
            if (const auto hash = value.find(" #"); hash != std::string_view::npos) value = value.substr(0, hash);
            if (key.empty()) throw ParseError("empty key", line_no);
            const std::string full = section.empty() ? key : section + "." + key;
            if (cfg.values_.count(full)) throw ParseError("duplicate key '" + full + "'", line_no);
            cfg.values_[full] = std::string(csv::trim(value));
            cfg.lines_[full] = line_no;
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open '" + path + "' for reading");
        try {
            Config cfg = parse(in, path);
            cfg.base_dir_ = std::filesystem::path(path).parent_path();
            return cfg;
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what(), e.line());
        }
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key) const {
        used_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) throw ValidationError(origin_ + ": missing key '" + key + "'");
        return it->second;
    }

    std::string str(const std::string& key, const std::string& fallback) const {
        return has(key) ? str(key) : fallback;
    }

    double num(const std::string& key) const {
        const std::string v = str(key);
        double out = 0.0;
        if (!csv::parse_double(v, out)) {
            throw ValidationError(origin_ + ": key '" + key + "' is not a number: '" + v + "'");
        }
        return out;
    }

    double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

    std::optional<double> opt_num(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return num(key);
    }

    int integer(const std::string& key, int fallback) const {
        if (!has(key)) return fallback;
        const double v = num(key);
        if (v != static_cast<double>(static_cast<int>(v))) {
            throw ValidationError(origin_ + ": key '" + key + "' must be an integer");
        }
        return static_cast<int>(v);
    }

    /// Path values are resolved against the directory holding the file.
    std::string path(const std::string& key) const {
        const std::filesystem::path p(str(key));
        return (p.is_absolute() ? p : base_dir_ / p).lexically_normal().string();
    }

    /// Keys that were present but never read; typos show up here.
    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) {
            if (!used_.count(k)) out.push_back(k);
        }
        return out;
    }

    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    mutable std::set<std::string> used_;
    std::string origin_;
    std::filesystem::path base_dir_;
};

}  // namespace propwing
