#include "asmcvar/data.hpp"
#include "asmcvar/errors.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace asmcvar;

namespace {

const char* kFrenchStyle =
    "This file was created using the 202306 CRSP database.\r\n"
    "\r\n"
    "  Average Value Weighted Returns -- Monthly\r\n"
    ",SMALL LoBM,ME1 BM2,BIG HiBM\r\n"
    "197107,1.23,-0.50,2.00\r\n"
    "197108,0.10,0.20,0.30\r\n"
    "197109,-1.00,0.00,4.50\r\n"
    "\r\n"
    "  Average Equal Weighted Returns -- Monthly\r\n"
    ",SMALL LoBM,ME1 BM2,BIG HiBM\r\n"
    "197107,9.99,9.99,9.99\r\n";

ReturnPanel parse(const std::string& text, bool percent = true) {
  std::istringstream in(text);
  return parse_panel(in, percent, "test");
}

}  // namespace

TEST_CASE("percent cells are divided by 100") {
  const auto panel = parse(kFrenchStyle);
  CHECK(panel.returns(0, 0) == doctest::Approx(0.0123).epsilon(1e-15));
  CHECK(panel.returns(2, 2) == doctest::Approx(0.045).epsilon(1e-15));
}

TEST_CASE("only the first data block is read and its title recorded") {
  const auto panel = parse(kFrenchStyle);
  CHECK(panel.periods() == 3);
  CHECK(panel.num_assets() == 3);
  CHECK(panel.dates == std::vector<int>{197107, 197108, 197109});
  CHECK(panel.assets == std::vector<std::string>{"SMALL LoBM", "ME1 BM2", "BIG HiBM"});
  CHECK(panel.provenance.block_title == "Average Value Weighted Returns -- Monthly");
  CHECK(panel.provenance.first_line == 5);
  CHECK(panel.provenance.last_line == 7);
}

TEST_CASE("raw returns pass through unchanged") {
  const auto panel = parse("200001,0.5,0.25\n200002,0.125,-1\n", false);
  CHECK(panel.returns(0, 0) == 0.5);
  CHECK(panel.returns(1, 1) == -1.0);
  CHECK(panel.assets == std::vector<std::string>{"asset_1", "asset_2"});
}

TEST_CASE("sentinel cells raise a data error naming date and asset") {
  const std::string text = "date,A,B\n200001,1.0,-99.99\n200002,-999,2.0\n";
  try {
    parse(text);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("200001 B") != std::string::npos);
    CHECK(msg.find("200002 A") != std::string::npos);
  }
}

TEST_CASE("malformed rows report their line number") {
  try {
    parse("date,A,B\n200001,1.0,2.0\n200002,1.0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse("date,A,B\n200001,1.0,abc\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("200013,1.0,2.0\n"), ParseError);
}

TEST_CASE("shape and ordering violations") {
  CHECK_THROWS_AS(parse("200001,1.0\n200002,2.0\n"), ShapeError);
  CHECK_THROWS_AS(parse("no data here\n"), ShapeError);
  CHECK_THROWS_AS(parse("200002,1,2\n200001,1,2\n"), DataError);
  CHECK_THROWS_AS(load_panel("/nonexistent/panel.csv"), DataError);
}

TEST_CASE("a 623-month, 25-asset file loads with matching shape") {
  std::ostringstream text;
  text << "date";
  for (int j = 0; j < 25; ++j) text << ",P" << j;
  text << '\n';
  int count = 0;
  for (int ym = 197107; ym <= 202305; ++ym) {
    if (ym % 100 == 13) ym += 88;
    text << ym;
    for (int j = 0; j < 25; ++j) text << ',' << 0.01 * (j + count % 7);
    text << '\n';
    ++count;
  }
  const auto panel = parse(text.str());
  CHECK(panel.periods() == 623);
  CHECK(panel.num_assets() == 25);
  CHECK(panel.dates.front() == 197107);
  CHECK(panel.dates.back() == 202305);
}

TEST_CASE("write then load restores the panel bit for bit") {
  Matrix R = oracle::random_returns(11, 17, 4);
  R(0, 0) = 0.1 + 0.2;  // not exactly representable in short decimal
  R(1, 1) = -1e-300;
  const auto panel = oracle::make_panel(R);
  const auto path = std::filesystem::temp_directory_path() / "asmcvar_roundtrip.csv";
  write_panel(panel, path);
  const auto back = load_panel(path, false);
  std::filesystem::remove(path);
  CHECK(back.dates == panel.dates);
  CHECK(back.assets == panel.assets);
  REQUIRE(back.returns.rows() == R.rows());
  REQUIRE(back.returns.cols() == R.cols());
  CHECK((back.returns.array() == R.array()).all());
}

TEST_CASE("slice_window boundaries") {
  const auto panel = oracle::make_panel(oracle::random_returns(3, 70, 3));
  const auto w = slice_window(panel, 61, 60);
  REQUIRE(w.has_value());
  CHECK(w->start_index == 0);
  CHECK(w->end_index == 60);
  CHECK(w->R.rows() == 60);
  CHECK((w->R.array() == panel.returns.topRows(60).array()).all());
  CHECK_FALSE(slice_window(panel, 60, 60).has_value());
  CHECK_FALSE(slice_window(panel, 5, 60).has_value());
  CHECK_THROWS_AS(slice_window(panel, 0, 60), ParameterError);
  CHECK_THROWS_AS(slice_window(panel, 71, 60), ParameterError);
}

TEST_CASE("consecutive windows share T-1 rows") {
  const auto panel = oracle::make_panel(oracle::random_returns(4, 30, 2));
  const std::size_t T = 6;
  for (std::size_t t = T + 1; t < 30; ++t) {
    const auto a = slice_window(panel, t, T);
    const auto b = slice_window(panel, t + 1, T);
    REQUIRE(a);
    REQUIRE(b);
    CHECK((a->R.bottomRows(T - 1).array() == b->R.topRows(T - 1).array()).all());
    for (Index i = 0; i < static_cast<Index>(T); ++i)
      CHECK((a->R.row(i).array() == panel.returns.row(static_cast<Index>(a->start_index) + i).array()).all());
  }
}
