#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ppfit {

struct Point {
  double x = 0;
  double y = 0;
};

struct Segment {
  Point a;
  Point b;
};

struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double diagonal() const;
};

// Observation window: a simple polygon in planar meters. Immutable after
// construction; construction validates simplicity and positive area.
class Window {
 public:
  explicit Window(std::vector<Point> boundary);
  static Window rectangle(double x0, double y0, double x1, double y1);

  const std::vector<Point>& boundary() const { return boundary_; }
  const BBox& bbox() const { return bbox_; }
  double area() const { return area_; }

 private:
  std::vector<Point> boundary_;
  BBox bbox_;
  double area_ = 0;
};

// A finite planar point pattern with optional discrete marks.
struct PointPattern {
  std::vector<Point> points;
  std::vector<std::string> marks;  // empty, or one label per point

  int size() const { return static_cast<int>(points.size()); }
  bool marked() const { return !marks.empty(); }
  PointPattern filter_mark(const std::string& mark) const;
};

struct SegmentPattern {
  std::vector<Segment> segments;
  int size() const { return static_cast<int>(segments.size()); }
};

// Pixel grid over a window bbox. Square cells, row 0 is the bottom row;
// the ESRI ASCII writer emits rows top to bottom. Cells whose center falls
// outside the window carry the nodata sentinel.
struct Raster {
  double x0 = 0, y0 = 0;  // lower-left corner
  double cell = 1;
  int ncols = 0, nrows = 0;
  double nodata = -9999.0;
  std::vector<double> values;  // row-major from the bottom row

  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * ncols + ix]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * ncols + ix]; }
  bool is_nodata(int ix, int iy) const { return at(ix, iy) == nodata; }
  bool is_nodata_index(std::size_t i) const { return values[i] == nodata; }

  double center_x(int ix) const { return x0 + (ix + 0.5) * cell; }
  double center_y(int iy) const { return y0 + (iy + 0.5) * cell; }
  int col_of(double x) const { return static_cast<int>((x - x0) / cell); }
  int row_of(double y) const { return static_cast<int>((y - y0) / cell); }
  bool in_grid(int ix, int iy) const { return ix >= 0 && ix < ncols && iy >= 0 && iy < nrows; }
  double cell_area() const { return cell * cell; }

  // Value of the cell containing (x,y); widens to the nearest defined cell
  // within max_ring Chebyshev rings. nullopt if none is defined there.
  std::optional<double> value_at(double x, double y, int max_ring = 0) const;

  int count_defined() const;
  Raster like(double fill) const;  // same geometry, all defined cells = fill
};

bool contains(const Window& w, Point p);
double area(const Window& w);
Raster rasterize(const Window& w, double cell);
double dist_point_segment(Point p, const Segment& s);
double dist_point_boundary(const Window& w, Point p);

double squared_dist(Point a, Point b);

}  // namespace ppfit
