#pragma once

// Minimal reader/writer for the comma-separated tables exchanged by the tool.
// Lines starting with '#' are comments; comments of the form "# key=value"
// are collected as metadata. The first non-comment line is the header.

#include "propwing/errors.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace propwing::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<int> row_lines;  // source line of each row
    std::map<std::string, std::string> meta;
};

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view text, double& value) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc() && ptr == end;
}

inline double parse_double_or_throw(std::string_view text, const std::string& what) {
    double v = 0.0;
    if (!parse_double(text, v)) throw ValidationError("cannot parse " + what + " '" + std::string(text) + "'");
    return v;
}

/// Shortest representation that reads back to the identical double.
inline std::string format(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Fixed-precision representation for human-facing reports.
inline std::string format_fixed(double v, int digits) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
    return std::string(buf, ptr);
}

/// Reads a numeric table whose header must equal `expected_header` exactly.
inline Table read(std::istream& in, const std::vector<std::string>& expected_header) {
    Table t;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '#') {
            auto body = trim(s.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string_view::npos) {
                t.meta[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
            }
            continue;
        }
        const auto fields = split(s);
        if (!have_header) {
            std::vector<std::string> header(fields.begin(), fields.end());
            if (header != expected_header) {
                std::string want;
                for (std::size_t i = 0; i < expected_header.size(); ++i) {
                    want += (i ? "," : "") + expected_header[i];
                }
                throw ParseError("expected header '" + want + "'", line_no);
            }
            t.header = std::move(header);
            have_header = true;
            continue;
        }
        if (fields.size() != expected_header.size()) {
            throw ParseError("expected " + std::to_string(expected_header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!parse_double(fields[i], row[i])) {
                throw ParseError("field '" + expected_header[i] + "' is not a number: '" + std::string(fields[i]) + "'",
                                 line_no);
            }
        }
        t.rows.push_back(std::move(row));
        t.row_lines.push_back(line_no);
    }
    if (!have_header) throw ParseError("missing header line", line_no + 1);
    return t;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace propwing::csv
