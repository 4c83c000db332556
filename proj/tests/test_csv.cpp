#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dro/csv.hpp"

using namespace dro;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}
} // namespace

TEST_CASE("format_value: 12 significant digits") {
    CHECK(format_value(1.0) == "1");
    CHECK(format_value(0.1) == "0.1");
    CHECK(format_value(-2.5) == "-2.5");
    CHECK(format_value(48.1366935465) == "48.1366935465");
    CHECK(format_value(1.0 / 3.0) == "0.333333333333");
    CHECK(format_value(1e-15) == "1e-15");
    CHECK(format_value(0.0) == "0");
}

TEST_CASE("write_csv: header, LF endings, quoting") {
    const std::string path = "csv_test_tmp.csv";
    write_csv(path, {"a", "b,c", "c"},
              {{"1", "plain", "he said \"hi\""}, {"2", "line\nbreak", "x"}});
    const std::string text = slurp(path);
    std::remove(path.c_str());
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
    // comma-containing header cell and quote-containing cell are quoted
    CHECK(text.find("\"b,c\"") != std::string::npos);
    CHECK(text.find("\"he said \"\"hi\"\"\"") != std::string::npos);
    CHECK(text.find("\"line\nbreak\"") != std::string::npos);
    // plain cells are not quoted
    CHECK(text.find("\"plain\"") == std::string::npos);
    CHECK(text.rfind("a,", 0) == 0);
}

TEST_CASE("write_csv: ragged rows are rejected") {
    const std::string path = "csv_test_ragged.csv";
    CHECK_THROWS_AS(write_csv(path, {"a", "b"}, {{"1"}}), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("write_csv_numeric: full-precision round trip") {
    const std::string path = "csv_test_num.csv";
    write_csv_numeric(path, {"x", "y"}, {{0.1, 48.1366935465}, {-1.0, 2e-9}});
    const std::string text = slurp(path);
    std::remove(path.c_str());
    CHECK(text == "x,y\n0.1,48.1366935465\n-1,2e-09\n");
}
