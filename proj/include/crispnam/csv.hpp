#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crispnam::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// RFC-4180-style reader: quoted fields, "" escapes, newlines inside quotes,
// CRLF or LF line endings. Leading lines starting with '#' are treated as
// comments (artifact files carry their config fingerprint there).
Table read(std::istream& in);
Table read_file(const std::string& path);

std::string quote(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

std::string format_double(double v);

} // namespace crispnam::csv
