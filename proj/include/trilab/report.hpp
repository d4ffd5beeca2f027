#pragma once

#include <string>
#include <vector>

namespace trilab::report {

// RFC-4180 field quoting
std::string csv_field(const std::string& s);
std::string csv_row(const std::vector<std::string>& fields);

// path empty or "-" writes to stdout
void write_text(const std::string& path, const std::string& content);

}  // namespace trilab::report
