#include "doctest.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "ppfit/errors.hpp"
#include "ppfit/io.hpp"
#include "support/oracles.hpp"

using namespace ppfit;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("pattern csv round trip") {
  const std::string dir = oracle::make_temp_dir("io");
  PointPattern p;
  p.points = {{0.125, 0.25}, {1.0 / 3.0, 2.0 / 7.0}, {1e-17, 12345.678901234567}};
  write_pattern_csv(dir + "/p.csv", p);
  const PointPattern q = read_pattern_csv(dir + "/p.csv");
  REQUIRE(q.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(q.points[i].x == p.points[i].x);  // exact round trip
    CHECK(q.points[i].y == p.points[i].y);
  }
  CHECK_FALSE(q.marked());
}

TEST_CASE("pattern csv with marks") {
  const std::string dir = oracle::make_temp_dir("io");
  write_file(dir + "/m.csv", "x,y,mark\n1,2,oak\n3,4,pine\n");
  const PointPattern p = read_pattern_csv(dir + "/m.csv");
  REQUIRE(p.marked());
  CHECK(p.marks[1] == "pine");
  write_pattern_csv(dir + "/m2.csv", p);
  const PointPattern q = read_pattern_csv(dir + "/m2.csv");
  CHECK(q.marks == p.marks);
}

TEST_CASE("pattern csv header and field validation") {
  const std::string dir = oracle::make_temp_dir("io");
  write_file(dir + "/bad1.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(read_pattern_csv(dir + "/bad1.csv"), input_error);
  write_file(dir + "/bad2.csv", "x,y\n1\n");
  CHECK_THROWS_AS(read_pattern_csv(dir + "/bad2.csv"), input_error);
  write_file(dir + "/bad3.csv", "x,y\n1,zebra\n");
  CHECK_THROWS_AS(read_pattern_csv(dir + "/bad3.csv"), input_error);
  write_file(dir + "/bad4.csv", "x,y\n1,nan\n");
  CHECK_THROWS_AS(read_pattern_csv(dir + "/bad4.csv"), input_error);
  CHECK_THROWS_AS(read_pattern_csv(dir + "/missing.csv"), input_error);
}

TEST_CASE("pattern csv tolerates CRLF, BOM, blank lines") {
  const std::string dir = oracle::make_temp_dir("io");
  write_file(dir + "/crlf.csv", "\xEF\xBB\xBFx,y\r\n1,2\r\n\r\n3,4\r\n");
  const PointPattern p = read_pattern_csv(dir + "/crlf.csv");
  REQUIRE(p.size() == 2);
  CHECK(p.points[1].x == 3.0);
}

TEST_CASE("segments csv") {
  const std::string dir = oracle::make_temp_dir("io");
  write_file(dir + "/s.csv", "x1,y1,x2,y2\n0,0,1,1\n2,2,3,2\n");
  const SegmentPattern s = read_segments_csv(dir + "/s.csv");
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[1].b.x == 3.0);
  write_file(dir + "/zero.csv", "x1,y1,x2,y2\n1,1,1,1\n");
  CHECK_THROWS_AS(read_segments_csv(dir + "/zero.csv"), input_error);
}

TEST_CASE("window csv") {
  const std::string dir = oracle::make_temp_dir("io");
  write_file(dir + "/w.csv", "x,y\n0,0\n4,0\n4,3\n0,3\n");
  const Window w = read_window_csv(dir + "/w.csv");
  CHECK(area(w) == doctest::Approx(12.0));
  // Repeated closing vertex is dropped.
  write_file(dir + "/wc.csv", "x,y\n0,0\n4,0\n4,3\n0,3\n0,0\n");
  CHECK(area(read_window_csv(dir + "/wc.csv")) == doctest::Approx(12.0));
}

TEST_CASE("zone csvs") {
  const std::string dir = oracle::make_temp_dir("io");
  write_file(dir + "/z.csv",
             "zone,x,y\nA,0,0\nA,1,0\nA,1,1\nA,0,1\nB,2,0\nB,3,0\nB,3,1\n");
  const auto zones = read_zones_csv(dir + "/z.csv");
  REQUIRE(zones.size() == 2);
  CHECK(zones.at("A").size() == 4);
  CHECK(zones.at("B").size() == 3);
  write_file(dir + "/v.csv", "zone,value\nA,1.5\nB,-2\n");
  const auto vals = read_zone_values_csv(dir + "/v.csv");
  CHECK(vals.at("A") == 1.5);
  CHECK(vals.at("B") == -2.0);
  write_file(dir + "/vdup.csv", "zone,value\nA,1\nA,2\n");
  CHECK_THROWS_AS(read_zone_values_csv(dir + "/vdup.csv"), input_error);
}

TEST_CASE("esri ascii raster round trip") {
  const std::string dir = oracle::make_temp_dir("io");
  Raster r;
  r.x0 = -1.5;
  r.y0 = 2.25;
  r.cell = 0.5;
  r.ncols = 3;
  r.nrows = 2;
  r.nodata = -9999;
  r.values = {1.0, 2.0, 3.0, -9999.0, 1.0 / 3.0, 6.0};
  write_raster_asc(dir + "/r.asc", r);
  const Raster q = read_raster_asc(dir + "/r.asc");
  CHECK(q.ncols == 3);
  CHECK(q.nrows == 2);
  CHECK(q.x0 == r.x0);
  CHECK(q.cell == r.cell);
  for (std::size_t i = 0; i < r.values.size(); ++i) CHECK(q.values[i] == r.values[i]);
  CHECK(q.is_nodata(0, 1));
}

TEST_CASE("esri ascii header variants") {
  const std::string dir = oracle::make_temp_dir("io");
  // Keys in scrambled order and mixed case; nodata omitted.
  write_file(dir + "/h.asc",
             "CELLSIZE 2\nnrows 2\nXLLCORNER 10\nncols 2\nyllcorner 20\n"
             "1 2\n3 4\n");
  const Raster r = read_raster_asc(dir + "/h.asc");
  CHECK(r.cell == 2.0);
  CHECK(r.x0 == 10.0);
  // First data row is the top row.
  CHECK(r.at(0, 1) == 1.0);
  CHECK(r.at(0, 0) == 3.0);
  CHECK(r.at(1, 0) == 4.0);

  write_file(dir + "/badkey.asc", "ncols 2\nnrows 1\nxllcorner 0\n1 2\n");
  CHECK_THROWS_AS(read_raster_asc(dir + "/badkey.asc"), input_error);
  write_file(dir + "/short.asc",
             "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3\n");
  CHECK_THROWS_AS(read_raster_asc(dir + "/short.asc"), input_error);
}

TEST_CASE("xllcenter is rejected") {
  const std::string dir = oracle::make_temp_dir("io");
  write_file(dir + "/c.asc",
             "ncols 1\nnrows 1\nxllcenter 0\nyllcorner 0\ncellsize 1\n5\n");
  CHECK_THROWS_AS(read_raster_asc(dir + "/c.asc"), input_error);
}

TEST_CASE("format_double shortest round trip") {
  const double cases[] = {0.0,   -0.0, 1.0,    0.1,   1.0 / 3.0, 1e-300,
                          1e300, M_PI, 2.0e17, 123.25};
  for (double v : cases) {
    const std::string s = format_double(v);
    double back = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(res.ec == std::errc());
    CHECK(back == v);
  }
  CHECK(format_double(0.1).size() <= 4);  // "0.1", not "0.1000000000000000055..."
  CHECK(format_double(1.0) == "1");
}
