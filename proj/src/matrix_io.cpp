#include "blindid/matrix_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "blindid/errors.hpp"

namespace blindid {

std::string format_complex(Complex c) {
  char buf[96];
  const double im = c.imag();
  std::snprintf(buf, sizeof buf, "%.17g%c%.17gi", c.real(), std::signbit(im) ? '-' : '+',
                std::fabs(im));
  return buf;
}

bool parse_complex(std::string_view token, Complex& out) {
  const std::string s(token);
  if (s.empty() || s.back() != 'i') return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  const double re = std::strtod(begin, &end);
  if (end == begin || (*end != '+' && *end != '-')) return false;
  const char* im_begin = end;
  const double im = std::strtod(im_begin, &end);
  if (end == im_begin || *end != 'i' || end + 1 != begin + s.size()) return false;
  if (!std::isfinite(re) || !std::isfinite(im)) return false;
  out = Complex(re, im);
  return true;
}

void write_matrix(std::ostream& os, const ComplexMatrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << format_complex(m(r, c));
    }
    os << '\n';
  }
}

ComplexMatrix read_matrix(std::istream& is, const std::string& source) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(source, line_no + 1, "missing 'rows cols' header");
  long rows = 0;
  long cols = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> rows >> cols) || (header >> extra) || rows < 1 || cols < 1) {
      throw ParseError(source, line_no, "header must be two positive integers 'rows cols'");
    }
  }

  ComplexMatrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!next_line()) {
      throw ParseError(source, line_no + 1,
                       "expected " + std::to_string(rows) + " rows, found " + std::to_string(r));
    }
    std::istringstream row(line);
    std::string token;
    long c = 0;
    while (row >> token) {
      if (c >= cols) throw ParseError(source, line_no, "too many entries in row");
      Complex value;
      if (!parse_complex(token, value)) {
        throw ParseError(source, line_no, "bad complex entry '" + token + "'");
      }
      m(r, c++) = value;
    }
    if (c != cols) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(cols) + " entries, found " + std::to_string(c));
    }
  }
  if (next_line()) throw ParseError(source, line_no, "trailing data after matrix");
  return m;
}

void save_matrix(const std::filesystem::path& path, const ComplexMatrix& m) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  write_matrix(os, m);
}

ComplexMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(path.string(), 0, "cannot open file");
  return read_matrix(is, path.string());
}

ComplexVector load_vector(const std::filesystem::path& path) {
  ComplexMatrix m = load_matrix(path);
  if (m.cols() != 1) throw ParseError(path.string(), 1, "expected a column vector (cols = 1)");
  return m.col(0);
}

KeyValues read_key_values(std::istream& is, const std::string& source) {
  KeyValues out;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    if (out.contains(key)) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    out.emplace(std::move(key), std::move(value));
  }
  return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(path.string(), 0, "cannot open file");
  return read_key_values(is, path.string());
}

}  // namespace blindid
