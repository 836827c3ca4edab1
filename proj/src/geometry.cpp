#include "ppfit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>

#include "ppfit/errors.hpp"

namespace ppfit {

namespace {

std::mutex g_warn_mutex;
warning_handler g_warn_handler;

double shoelace_area(const std::vector<Point>& poly) {
  double acc = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    acc += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(acc);
}

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect_interior(Point a, Point b, Point c, Point d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

void set_warning_handler(warning_handler h) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  g_warn_handler = std::move(h);
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    std::fprintf(stderr, "ppfit: warning: %s\n", message.c_str());
  }
}

const char* version() { return "0.1.0"; }

double BBox::diagonal() const { return std::hypot(width(), height()); }

Window::Window(std::vector<Point> boundary) : boundary_(std::move(boundary)) {
  if (boundary_.size() < 3) throw input_error("window polygon needs at least 3 vertices");
  // Drop an explicitly repeated closing vertex.
  if (boundary_.size() > 3 && boundary_.front().x == boundary_.back().x &&
      boundary_.front().y == boundary_.back().y) {
    boundary_.pop_back();
  }
  bbox_.x0 = bbox_.x1 = boundary_[0].x;
  bbox_.y0 = bbox_.y1 = boundary_[0].y;
  for (const Point& p : boundary_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw input_error("window polygon has a nonfinite vertex");
    }
    bbox_.x0 = std::min(bbox_.x0, p.x);
    bbox_.y0 = std::min(bbox_.y0, p.y);
    bbox_.x1 = std::max(bbox_.x1, p.x);
    bbox_.y1 = std::max(bbox_.y1, p.y);
  }
  area_ = shoelace_area(boundary_);
  const double scale = std::max(1.0, bbox_.diagonal());
  if (area_ <= 1e-12 * scale * scale) {
    throw input_error("invalid window: polygon area is zero");
  }
  // Simplicity check: no two non-adjacent edges may cross.
  const std::size_t n = boundary_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent around the wrap
      if (segments_intersect_interior(boundary_[i], boundary_[(i + 1) % n], boundary_[j],
                                      boundary_[(j + 1) % n])) {
        throw input_error("invalid window: polygon is self-intersecting");
      }
    }
  }
}

Window Window::rectangle(double x0, double y0, double x1, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw input_error("invalid window rectangle");
  return Window({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

PointPattern PointPattern::filter_mark(const std::string& mark) const {
  if (!marked()) throw input_error("pattern has no marks to filter on");
  PointPattern out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (marks[i] == mark) {
      out.points.push_back(points[i]);
      out.marks.push_back(marks[i]);
    }
  }
  return out;
}

double squared_dist(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double dist_point_segment(Point p, const Segment& s) {
  const double vx = s.b.x - s.a.x;
  const double vy = s.b.y - s.a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 <= 0) return std::sqrt(squared_dist(p, s.a));
  double t = ((p.x - s.a.x) * vx + (p.y - s.a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  const Point foot{s.a.x + t * vx, s.a.y + t * vy};
  return std::sqrt(squared_dist(p, foot));
}

double dist_point_boundary(const Window& w, Point p) {
  const std::vector<Point>& b = w.boundary();
  const std::size_t n = b.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, dist_point_segment(p, Segment{b[i], b[(i + 1) % n]}));
  }
  return best;
}

bool contains(const Window& w, Point p) {
  const BBox& bb = w.bbox();
  const double scale = std::max(1.0, bb.diagonal());
  const double edge_tol = 1e-12 * scale;
  if (p.x < bb.x0 - edge_tol || p.x > bb.x1 + edge_tol || p.y < bb.y0 - edge_tol ||
      p.y > bb.y1 + edge_tol) {
    return false;
  }
  // Boundary counts as inside.
  if (dist_point_boundary(w, p) <= edge_tol) return true;
  // Even-odd ray cast along +x.
  const std::vector<Point>& b = w.boundary();
  const std::size_t n = b.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& pi = b[i];
    const Point& pj = b[j];
    if ((pi.y > p.y) != (pj.y > p.y)) {
      const double xint = pj.x + (p.y - pj.y) / (pi.y - pj.y) * (pi.x - pj.x);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

double area(const Window& w) { return w.area(); }

Raster rasterize(const Window& w, double cell) {
  if (!(cell > 0) || !std::isfinite(cell)) throw input_error("cell size must be positive");
  const BBox& bb = w.bbox();
  if (cell > bb.width() || cell > bb.height()) {
    warn("cell size exceeds a window bbox side; raster degenerates to very few cells");
  }
  Raster r;
  r.x0 = bb.x0;
  r.y0 = bb.y0;
  r.cell = cell;
  r.ncols = std::max(1, static_cast<int>(std::ceil(bb.width() / cell - 1e-12)));
  r.nrows = std::max(1, static_cast<int>(std::ceil(bb.height() / cell - 1e-12)));
  r.values.assign(static_cast<std::size_t>(r.ncols) * r.nrows, r.nodata);
  for (int iy = 0; iy < r.nrows; ++iy) {
    for (int ix = 0; ix < r.ncols; ++ix) {
      if (contains(w, {r.center_x(ix), r.center_y(iy)})) r.at(ix, iy) = 0.0;
    }
  }
  return r;
}

std::optional<double> Raster::value_at(double x, double y, int max_ring) const {
  int ix = col_of(x);
  int iy = row_of(y);
  if (in_grid(ix, iy) && !is_nodata(ix, iy)) return at(ix, iy);
  double best = std::numeric_limits<double>::infinity();
  std::optional<double> value;
  for (int ring = (in_grid(ix, iy) ? 1 : 0); ring <= max_ring; ++ring) {
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring && ring > 0) continue;
        const int cx = ix + dx;
        const int cy = iy + dy;
        if (!in_grid(cx, cy) || is_nodata(cx, cy)) continue;
        const double d2 = squared_dist({x, y}, {center_x(cx), center_y(cy)});
        if (d2 < best) {
          best = d2;
          value = at(cx, cy);
        }
      }
    }
    if (value) return value;  // nearest ring with any defined cell wins
  }
  return value;
}

int Raster::count_defined() const {
  int k = 0;
  for (double v : values) {
    if (v != nodata) ++k;
  }
  return k;
}

Raster Raster::like(double fill) const {
  Raster out = *this;
  for (double& v : out.values) {
    if (v != nodata) v = fill;
  }
  return out;
}

}  // namespace ppfit
