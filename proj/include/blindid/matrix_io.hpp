#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "blindid/types.hpp"

namespace blindid {

// Text format: first line "rows cols", then one row per line with entries
// rendered as a+bi / a-bi (17 significant digits), space-separated.
// Vectors are rows x 1 matrices.

std::string format_complex(Complex c);
/// Parses a single a+bi token; returns false on malformed or non-finite input.
bool parse_complex(std::string_view token, Complex& out);

void write_matrix(std::ostream& os, const ComplexMatrix& m);
/// Throws ParseError naming `source` and the offending line.
ComplexMatrix read_matrix(std::istream& is, const std::string& source = "<stream>");

void save_matrix(const std::filesystem::path& path, const ComplexMatrix& m);
ComplexMatrix load_matrix(const std::filesystem::path& path);

ComplexVector load_vector(const std::filesystem::path& path);

/// Line-oriented "key = value" files; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(std::istream& is, const std::string& source = "<stream>");
KeyValues load_key_values(const std::filesystem::path& path);

}  // namespace blindid
