#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pqtail/errors.hpp"

namespace pqtail {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Shorter form for the human-readable console tables.
inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

/// Minimal CSV assembly; cells are pre-formatted strings.  The first row
/// closed with end_row() becomes the header.
class CsvTable {
public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header)
        : header_(std::move(header)), have_header_(true) {}

    void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

    void add(std::string cell) { current_.push_back(std::move(cell)); }

    void end_row() {
        if (!have_header_) {
            header_ = std::move(current_);
            have_header_ = true;
        } else {
            rows_.push_back(std::move(current_));
        }
        current_.clear();
    }

    std::string str() const {
        std::string out = join(header_);
        for (const auto& r : rows_) out += join(r);
        return out;
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        line += '\n';
        return line;
    }
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::string> current_;
    bool have_header_ = false;
};

/// Streaming JSON writer with deterministic key order and fmt17 numbers.
class JsonWriter {
public:
    void begin_object() { prefix(); out_ += '{'; stack_.push_back('}'); fresh_ = true; }
    void end_object() { close(); }
    void begin_array() { prefix(); out_ += '['; stack_.push_back(']'); fresh_ = true; }
    void end_array() { close(); }

    void key(const std::string& k) {
        comma();
        out_ += quote(k);
        out_ += ':';
        pending_key_ = true;
    }

    void value(double v) { prefix(); out_ += fmt17(v); }
    void value(std::uint64_t v) { prefix(); out_ += std::to_string(v); }
    void value(int v) { prefix(); out_ += std::to_string(v); }
    void value(bool v) { prefix(); out_ += v ? "true" : "false"; }
    void value(const std::string& v) { prefix(); out_ += quote(v); }
    void value(const char* v) { value(std::string(v)); }
    void null_value() { prefix(); out_ += "null"; }

    const std::string& str() const { return out_; }

private:
    void comma() {
        if (!fresh_) out_ += ',';
        fresh_ = false;
    }
    void prefix() {
        if (pending_key_) {
            pending_key_ = false;
            return;
        }
        comma();
    }
    void close() {
        out_ += stack_.back();
        stack_.pop_back();
        fresh_ = false;
    }
    static std::string quote(const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            switch (c) {
                case '"': q += "\\\""; break;
                case '\\': q += "\\\\"; break;
                case '\n': q += "\\n"; break;
                case '\t': q += "\\t"; break;
                case '\r': q += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        q += buf;
                    } else {
                        q += c;
                    }
            }
        }
        q += '"';
        return q;
    }

    std::string out_;
    std::vector<char> stack_;
    bool fresh_ = true;
    bool pending_key_ = false;
};

/// Fixed-width console table for the human summary.
inline void print_table(std::ostream& os, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size() && c < width.size(); ++c)
            width[c] = std::max(width[c], r[c].size());
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            os << cells[c];
            if (c + 1 < cells.size())
                os << std::string(width[c] - cells[c].size() + 2, ' ');
        }
        os << '\n';
    };
    emit(header);
    std::vector<std::string> rule(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) rule[c] = std::string(width[c], '-');
    emit(rule);
    for (const auto& r : rows) emit(r);
}

} // namespace pqtail
