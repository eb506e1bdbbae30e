#pragma once

#include <string>
#include <string_view>

#include "hmf/datamodel.hpp"

namespace hmf {

// Comma-separated, no header, one row per line. A cell is observed iff it
// parses as a finite decimal; empty cells and `nan` (any case) are missing.
// DataError with line/column on ragged rows or bad tokens.
ObservedMatrix parse_matrix(std::string_view text, const std::string& source = "<memory>");
ObservedMatrix load_matrix(const std::string& path);

// Missing cells are written as `nan`; numbers use the shortest round-trip form.
std::string format_matrix(const ObservedMatrix& m);
std::string format_matrix(const Matrix& m);
void save_matrix(const std::string& path, const ObservedMatrix& m);
void save_matrix(const std::string& path, const Matrix& m);

std::string format_double(double x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace hmf
