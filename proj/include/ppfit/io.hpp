#pragma once

#include <map>
#include <string>
#include <vector>

#include "ppfit/geometry.hpp"

namespace ppfit {

// CSV with header `x,y` or `x,y,mark`. UTF-8, '.' decimal separator.
PointPattern read_pattern_csv(const std::string& path);
void write_pattern_csv(const std::string& path, const PointPattern& p);

// CSV with header `x1,y1,x2,y2`, one segment per row.
SegmentPattern read_segments_csv(const std::string& path);

// CSV polygon vertex list with header `x,y`, vertices in boundary order.
Window read_window_csv(const std::string& path);

// Zone polygons: header `zone,x,y`, rows grouped by zone label in boundary
// order. Zone values: header `zone,value`.
std::map<std::string, std::vector<Point>> read_zones_csv(const std::string& path);
std::map<std::string, double> read_zone_values_csv(const std::string& path);

// ESRI ASCII grid: ncols, nrows, xllcorner, yllcorner, cellsize,
// NODATA_value, then nrows rows top to bottom.
Raster read_raster_asc(const std::string& path);
void write_raster_asc(const std::string& path, const Raster& r);

// Numeric formatting shared by all writers: shortest text that round-trips.
std::string format_double(double v);

// Low-level helpers, exposed for tests.
std::vector<std::string> split_csv_line(const std::string& line);
double parse_double(const std::string& token, const std::string& context);

}  // namespace ppfit
