#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "blindid/errors.hpp"
#include "blindid/matrix_io.hpp"
#include "oracles.hpp"

using namespace blindid;

namespace {

ComplexMatrix parse(const std::string& text) {
  std::istringstream is(text);
  return read_matrix(is, "test.mat");
}

int parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    CHECK(e.source() == "test.mat");
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("complex entries render with sign and suffix") {
  CHECK(format_complex({1.5, -2.0}) == "1.5-2i");
  CHECK(format_complex({-0.25, 0.0}) == "-0.25+0i");
  CHECK(format_complex({0.0, -0.0}) == "0-0i");

  Complex c;
  REQUIRE(parse_complex("3-4i", c));
  CHECK(c == Complex(3, -4));
  REQUIRE(parse_complex("-1e-3+2.5e2i", c));
  CHECK(c == Complex(-1e-3, 250));
  CHECK_FALSE(parse_complex("3", c));
  CHECK_FALSE(parse_complex("3+4", c));
  CHECK_FALSE(parse_complex("3+4ix", c));
  CHECK_FALSE(parse_complex("i", c));
  CHECK_FALSE(parse_complex("nan+0i", c));
  CHECK_FALSE(parse_complex("1+infi", c));
}

TEST_CASE("matrix text parses") {
  const ComplexMatrix m = parse("2 2\n1+0i 0-1i\n\n2.5+3i -4-0i\n");
  CHECK(m(0, 1) == Complex(0, -1));
  CHECK(m(1, 0) == Complex(2.5, 3));
  CHECK(m(1, 1) == Complex(-4, 0));
}

TEST_CASE("malformed matrix text reports the line") {
  CHECK(parse_error_line("") == 1);
  CHECK(parse_error_line("2\n1+0i\n") == 1);
  CHECK(parse_error_line("0 3\n") == 1);
  CHECK(parse_error_line("1 2 3\n") == 1);
  CHECK(parse_error_line("2 1\n1+0i\n") == 3);
  CHECK(parse_error_line("1 2\n1+0i\n") == 2);
  CHECK(parse_error_line("1 1\n1+0i 2+0i\n") == 2);
  CHECK(parse_error_line("1 1\nabc\n") == 2);
  CHECK(parse_error_line("1 1\n1+0i\n5+0i\n") == 3);
}

TEST_CASE("random matrices round-trip bit-exactly") {
  oracle::Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    ComplexMatrix m = rng.matrix(rng.index(1, 7), rng.index(1, 7));
    m(0, 0) *= 1e-300;
    std::stringstream ss;
    write_matrix(ss, m);
    const ComplexMatrix back = read_matrix(ss);
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("files and vectors") {
  const auto dir = std::filesystem::temp_directory_path() / "blindid_test_matrix_io";
  std::filesystem::create_directories(dir);
  oracle::Rng rng(22);
  const ComplexMatrix v = rng.matrix(5, 1);
  save_matrix(dir / "v.mat", v);
  CHECK((load_vector(dir / "v.mat") - v.col(0)).norm() == 0.0);
  save_matrix(dir / "m.mat", rng.matrix(2, 2));
  CHECK_THROWS_AS(load_vector(dir / "m.mat"), ParseError);
  CHECK_THROWS_AS(load_matrix(dir / "missing.mat"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("key value files") {
  std::istringstream ok("# comment\nn = 12\n  m1=3  # trailing\n\nmode = subspace\n");
  const KeyValues kv = read_key_values(ok, "cfg");
  CHECK(kv.size() == 3);
  CHECK(kv.at("n") == "12");
  CHECK(kv.at("m1") == "3");
  CHECK(kv.at("mode") == "subspace");

  std::istringstream dup("n = 1\nn = 2\n");
  CHECK_THROWS_AS(read_key_values(dup, "cfg"), ParseError);
  std::istringstream bad("n 12\n");
  try {
    read_key_values(bad, "cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
}
