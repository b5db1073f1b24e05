#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "topolow/common.hpp"
#include "topolow/configuration.hpp"
#include "topolow/csv_io.hpp"

using namespace topolow;

namespace {

csv::CellGrid grid_from(const std::string& text, csv::Layout layout = csv::Layout::Auto) {
  std::istringstream in(text);
  return csv::read_grid(in, layout);
}

}  // namespace

TEST_SUITE("csv_io") {
  TEST_CASE("cell tokens") {
    CHECK(csv::parse_cell("12.5") == ObservationCell::exact(12.5));
    CHECK(csv::parse_cell("  7 ") == ObservationCell::exact(7));
    CHECK(csv::parse_cell("<10") == ObservationCell::left_censored(10));
    CHECK(csv::parse_cell("< 10") == ObservationCell::left_censored(10));
    CHECK(csv::parse_cell(">40") == ObservationCell::right_censored(40));
    CHECK(csv::parse_cell(" > 4e1") == ObservationCell::right_censored(40));
    CHECK_FALSE(csv::parse_cell("").observed());
    CHECK_FALSE(csv::parse_cell("NA").observed());
    CHECK_FALSE(csv::parse_cell("  ").observed());
    CHECK(csv::parse_cell("1e-3").value == 0.001);
  }

  TEST_CASE("malformed tokens carry their position") {
    CHECK_THROWS_AS(csv::parse_cell("abc"), ParseError);
    CHECK_THROWS_AS(csv::parse_cell("1,5"), ParseError);
    CHECK_THROWS_AS(csv::parse_cell("<"), ParseError);
    CHECK_THROWS_AS(csv::parse_cell("inf"), ParseError);
    try {
      csv::parse_cell("x1", 4, 9);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
      CHECK(e.column() == 9);
      CHECK(std::string(e.what()).find("line 4, column 9") != std::string::npos);
    }
  }

  TEST_CASE("format round trips") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
      const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
      CHECK(csv::parse_cell(csv::format_number(v)).value == v);
    }
    CHECK(csv::format_number(0.1) == "0.1");
    CHECK(csv::format_number(2.0 / 3.0, 6) == "0.666667");
    for (const auto& cell : {ObservationCell::missing(), ObservationCell::exact(3.25), ObservationCell::left_censored(1),
                             ObservationCell::right_censored(0.5)})
      CHECK(csv::parse_cell(csv::format_cell(cell)) == cell);
  }

  TEST_CASE("long layout") {
    const auto grid = grid_from(
        "object_i,object_j,value\n"
        "a,b,1.5\n"
        "b,a,<2\n"
        "a,c,NA\n"
        "c,b,>9\n");
    CHECK(grid.labels == std::vector<std::string>{"a", "b", "c"});
    const auto d = csv::to_dissimilarity(grid);
    CHECK(d.at(0, 1) == ObservationCell::exact(1.5));
    CHECK(d.at(1, 0) == ObservationCell::left_censored(2));
    CHECK_FALSE(d.at(0, 2).observed());
    CHECK(d.at(2, 1) == ObservationCell::right_censored(9));
    CHECK(d.at(2, 2) == ObservationCell::exact(0));
  }

  TEST_CASE("long layout rejects duplicates and short rows") {
    CHECK_THROWS_AS(grid_from("object_i,object_j,value\na,b,1\na,b,2\n"), ParseError);
    try {
      grid_from("object_i,object_j,value\na,b,1\na,c\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("wide layout") {
    const auto grid = grid_from(
        ",x,y,z\n"
        "x,0,1,<3\n"
        "y,1,0,\n"
        "z,>3,NA,0\n");
    const auto d = csv::to_dissimilarity(grid);
    CHECK(d.labels() == std::vector<std::string>{"x", "y", "z"});
    CHECK(d.at(0, 2) == ObservationCell::left_censored(3));
    CHECK(d.at(2, 0) == ObservationCell::right_censored(3));
    CHECK_FALSE(d.at(1, 2).observed());
    CHECK_FALSE(d.at(2, 1).observed());
  }

  TEST_CASE("wide layout errors point at the cell") {
    try {
      grid_from(",x,y\nx,0,1\ny,oops,0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 3);
    }
    CHECK_THROWS_AS(grid_from(",x,y\ny,0,1\nx,1,0\n"), ParseError);
    CHECK_THROWS_AS(grid_from(",x,y\nx,0,1\n"), ParseError);
    CHECK_THROWS_AS(grid_from(""), ParseError);
  }

  TEST_CASE("wide write then read is lossless") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    DissimilarityMatrix d(default_labels(6));
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        if (i == j) continue;
        switch ((i * 7 + j) % 4) {
          case 0: break;
          case 1: d.set(i, j, ObservationCell::exact(u(rng))); break;
          case 2: d.set(i, j, ObservationCell::left_censored(u(rng))); break;
          default: d.set(i, j, ObservationCell::right_censored(u(rng)));
        }
      }
    std::ostringstream out;
    csv::write_wide(out, d);
    std::istringstream in(out.str());
    CHECK(csv::to_dissimilarity(csv::read_grid(in)) == d);
  }

  TEST_CASE("coordinates round trip") {
    Configuration config(3, 2);
    config.point(0)[0] = 1.0 / 3.0;
    config.point(1)[1] = -2.5e-17;
    config.point(2)[0] = 12345.678901234567;
    std::ostringstream out;
    csv::write_coordinates(out, config, {"p", "q", "r"});
    CHECK(out.str().rfind("label,dim_1,dim_2\n", 0) == 0);
    std::istringstream in(out.str());
    const auto read = csv::read_coordinates(in);
    CHECK(read.labels == std::vector<std::string>{"p", "q", "r"});
    CHECK(read.coords == config.coords());
  }

  TEST_CASE("similarity grid and file helpers") {
    const auto dir = std::filesystem::temp_directory_path() / "topolow_csv_test";
    std::filesystem::remove_all(dir);
    csv::write_text_file(dir / "nested" / "s.csv", ",a,b\na,8,2\nb,4,8\n");
    const auto s = csv::to_similarity(csv::read_grid_file(dir / "nested" / "s.csv"));
    CHECK(s.at(0, 1) == ObservationCell::exact(2));
    CHECK_THROWS_AS(csv::read_grid_file(dir / "missing.csv"), ParseError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("split_record") {
    CHECK(csv::split_record(" a , \"b c\" ,,d") == std::vector<std::string>{"a", "b c", "", "d"});
    CHECK(csv::trim("  x\t") == "x");
  }
}
