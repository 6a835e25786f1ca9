/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Minimal RFC-4180 style CSV reading and writing.
 */

#include "edupredict/common.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace edupredict::csv {

struct Row {
    std::size_t line = 0;  // 1-based line where the row starts
    std::vector<std::string> fields;
};

/// Reads the next record, honouring quoted fields (which may span lines and
/// contain doubled quotes). Returns false at end of input.
inline bool read_row(std::istream& in, char delimiter, std::size_t& line, Row& row) {
    row.fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    row.line = line + 1;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            row.fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            ++line;
            row.fields.push_back(std::move(field));
            return true;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any) return false;
    if (quoted) {
        throw Error(ErrorCode::RowError, "line " + std::to_string(row.line) + ": unterminated quoted field");
    }
    ++line;
    row.fields.push_back(std::move(field));
    return true;
}

inline std::vector<Row> read_all(std::istream& in, char delimiter = ',') {
    std::vector<Row> rows;
    std::size_t line = 0;
    Row row;
    while (read_row(in, delimiter, line, row)) {
        if (row.fields.size() == 1 && row.fields[0].empty()) continue;  // blank line
        rows.push_back(row);
    }
    return rows;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path + "'");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    return out;
}

inline std::string quote(const std::string& field, char delimiter = ',') {
    if (field.find_first_of(std::string("\"\n\r") + delimiter) == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',') {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << delimiter;
        out << quote(fields[i], delimiter);
    }
    out << '\n';
}

/// Shortest decimal text that parses back to the same double; NaN → "".
inline std::string format_double(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Parses a decimal; empty or non-numeric text yields nullopt.
inline std::optional<double> parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace edupredict::csv
