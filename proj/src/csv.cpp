#include "crispnam/csv.hpp"

#include "crispnam/common.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace crispnam::csv {

namespace {

// Parses one record starting at `pos`; returns false at end of input.
bool next_record(const std::string& text, std::size_t& pos, std::vector<std::string>& out) {
    out.clear();
    if (pos >= text.size()) return false;
    std::string field;
    bool quoted = false;
    bool any = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field += '"';
                    pos += 2;
                } else {
                    quoted = false;
                    ++pos;
                }
            } else {
                field += c;
                ++pos;
            }
            any = true;
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
            ++pos;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
            any = true;
            ++pos;
        } else if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') {
            pos += 2;
            break;
        } else if (c == '\n' || c == '\r') {
            ++pos;
            break;
        } else {
            field += c;
            any = true;
            ++pos;
        }
    }
    if (!any && out.empty()) return false; // trailing blank line
    out.push_back(std::move(field));
    return true;
}

} // namespace

Table read(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    std::size_t pos = 0;
    // skip comment lines before the header
    while (pos < text.size() && text[pos] == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
        if (pos < text.size()) ++pos;
    }

    Table t;
    if (!next_record(text, pos, t.header)) throw ValidationError("CSV input has no header row");
    std::vector<std::string> row;
    std::size_t line = 1;
    while (next_record(text, pos, row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue; // blank line
        if (row.size() != t.header.size())
            throw ValidationError("CSV row " + std::to_string(line) + " has " +
                                  std::to_string(row.size()) + " fields, expected " +
                                  std::to_string(t.header.size()));
        t.rows.push_back(row);
    }
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    return read(in);
}

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
        if (c == '"') q += "\"\"";
        else q += c;
    }
    q += '"';
    return q;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace crispnam::csv
