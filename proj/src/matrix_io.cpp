#include "hmf/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "hmf/error.hpp"

namespace hmf {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_nan_token(std::string_view s) {
  return s.size() == 3 && (s[0] == 'n' || s[0] == 'N') && (s[1] == 'a' || s[1] == 'A') &&
         (s[2] == 'n' || s[2] == 'N');
}

}  // namespace

ObservedMatrix parse_matrix(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(pos, end - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError(source + ": empty matrix");

  std::vector<std::vector<double>> vals;
  std::vector<std::vector<std::uint8_t>> obs;
  std::size_t width = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::vector<double> row;
    std::vector<std::uint8_t> row_obs;
    std::string_view line = lines[ln];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t start = 0;
    for (std::size_t col = 1;; ++col) {
      const std::size_t comma = line.find(',', start);
      const std::string_view tok =
          trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (tok.empty() || is_nan_token(tok)) {
        row.push_back(0.0);
        row_obs.push_back(0);
      } else {
        double v = 0.0;
        const std::string_view num = !tok.empty() && tok.front() == '+' ? tok.substr(1) : tok;
        const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc() || p != num.data() + num.size() || !std::isfinite(v))
          throw DataError(source + ": line " + std::to_string(ln + 1) + ", column " +
                          std::to_string(col) + ": cannot parse '" + std::string(tok) + "'");
        row.push_back(v);
        row_obs.push_back(1);
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (ln == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw DataError(source + ": line " + std::to_string(ln + 1) + ": ragged row with " +
                      std::to_string(row.size()) + " cells, expected " + std::to_string(width));
    }
    vals.push_back(std::move(row));
    obs.push_back(std::move(row_obs));
  }

  ObservedMatrix m(static_cast<Index>(vals.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) {
      m.values(static_cast<Index>(i), static_cast<Index>(j)) = vals[i][j];
      m.mask(static_cast<Index>(i), static_cast<Index>(j)) = obs[i][j];
    }
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw DataError("write to '" + path + "' failed");
}

ObservedMatrix load_matrix(const std::string& path) { return parse_matrix(read_file(path), path); }

std::string format_double(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string format_matrix(const ObservedMatrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += m.observed(i, j) ? format_double(m.values(i, j)) : "nan";
    }
    out += '\n';
  }
  return out;
}

std::string format_matrix(const Matrix& m) { return format_matrix(ObservedMatrix(m)); }

void save_matrix(const std::string& path, const ObservedMatrix& m) { write_file(path, format_matrix(m)); }
void save_matrix(const std::string& path, const Matrix& m) { write_file(path, format_matrix(m)); }

}  // namespace hmf
