#include "ppfit/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ppfit/errors.hpp"
#include "ppfit/parallel.hpp"

namespace ppfit {

namespace {

void check_bandwidth(KernelSpec spec) {
  if (!(spec.h > 0) || !std::isfinite(spec.h)) {
    throw input_error("bandwidth must be positive and finite");
  }
}

double kernel_norm(double h) { return 1.0 / (2.0 * M_PI * h * h); }

// Mass-conserving smoother of weighted source points: each source i deposits
// mass_i distributed as κ_h restricted to the normalization cell set
// (in-window only, or the whole grid). Sources whose discrete kernel sum
// underflows everywhere dump their mass into the nearest eligible cell, so
// the raster integral equals Σ mass_i exactly.
Raster normalized_smooth(const std::vector<Point>& pts, const std::vector<double>& mass,
                         const Raster& grid, KernelSpec spec, bool window_cells_only) {
  check_bandwidth(spec);
  Raster out = grid.like(0.0);
  const int n = static_cast<int>(pts.size());
  if (n == 0) return out;
  const double h = spec.h;
  const double inv2h2 = 1.0 / (2.0 * h * h);
  const double cell2 = grid.cell_area();
  const double max_extent =
      std::hypot(grid.ncols * grid.cell, grid.nrows * grid.cell) + grid.cell;

  auto eligible = [&](int ix, int iy) { return !window_cells_only || !grid.is_nodata(ix, iy); };

  // Discrete kernel sum per source under its truncation radius, radius
  // widened per source until the sum is positive or the grid is covered.
  std::vector<double> radius(n), corrector(n);
  parallel_for(n, [&](int i) {
    double r = 6.0 * h;
    double acc = 0;
    for (;; r *= 2.0) {
      acc = 0;
      const int ix0 = std::max(0, grid.col_of(pts[i].x - r));
      const int ix1 = std::min(grid.ncols - 1, grid.col_of(pts[i].x + r));
      const int iy0 = std::max(0, grid.row_of(pts[i].y - r));
      const int iy1 = std::min(grid.nrows - 1, grid.row_of(pts[i].y + r));
      const double r2 = r * r;
      for (int iy = iy0; iy <= iy1; ++iy) {
        for (int ix = ix0; ix <= ix1; ++ix) {
          if (!eligible(ix, iy)) continue;
          const double d2 = squared_dist(pts[i], {grid.center_x(ix), grid.center_y(iy)});
          if (d2 > r2) continue;
          acc += std::exp(-d2 * inv2h2);
        }
      }
      if (acc > 0 || r > max_extent) break;
    }
    radius[i] = r;
    corrector[i] = acc * cell2;  // kernel_norm cancels in the ratio
  });

  const int total = grid.ncols * grid.nrows;
  parallel_for(total, [&](int idx) {
    const int ix = idx % grid.ncols;
    const int iy = idx / grid.ncols;
    if (grid.is_nodata(ix, iy)) return;
    const Point c{grid.center_x(ix), grid.center_y(iy)};
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      if (corrector[i] <= 0) continue;
      const double d2 = squared_dist(pts[i], c);
      if (d2 > radius[i] * radius[i]) continue;
      acc += mass[i] * std::exp(-d2 * inv2h2) / corrector[i];
    }
    out.at(ix, iy) = acc;
  });

  // Underflowed sources: all mass to the nearest eligible cell.
  for (int i = 0; i < n; ++i) {
    if (corrector[i] > 0) continue;
    int bx = -1, by = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int iy = 0; iy < grid.nrows; ++iy) {
      for (int ix = 0; ix < grid.ncols; ++ix) {
        if (!eligible(ix, iy) || grid.is_nodata(ix, iy)) continue;
        const double d2 = squared_dist(pts[i], {grid.center_x(ix), grid.center_y(iy)});
        if (d2 < best) {
          best = d2;
          bx = ix;
          by = iy;
        }
      }
    }
    if (bx >= 0) out.at(bx, by) += mass[i] / cell2;
  }
  return out;
}

}  // namespace

double raster_integral(const Raster& r) {
  double acc = 0;
  for (int iy = 0; iy < r.nrows; ++iy) {
    for (int ix = 0; ix < r.ncols; ++ix) {
      if (!r.is_nodata(ix, iy)) acc += r.at(ix, iy);
    }
  }
  return acc * r.cell_area();
}

Raster kernel_intensity(const PointPattern& x, const Window& w, KernelSpec spec,
                        const Raster& grid) {
  check_bandwidth(spec);
  (void)w;  // window geometry enters through the grid's nodata mask
  if (x.size() == 0) {
    warn("kernel_intensity: empty pattern, returning zero raster");
    return grid.like(0.0);
  }
  return normalized_smooth(x.points, std::vector<double>(x.points.size(), 1.0), grid, spec,
                           /*window_cells_only=*/true);
}

Raster pixel_count_density(const PointPattern& p, const Raster& grid, KernelSpec spec) {
  if (p.size() == 0) return grid.like(0.0);
  return normalized_smooth(p.points, std::vector<double>(p.points.size(), 1.0), grid, spec,
                           /*window_cells_only=*/false);
}

Raster segment_density(const SegmentPattern& L, const Window& w, KernelSpec spec,
                       const Raster& grid) {
  (void)w;
  if (L.size() == 0) return grid.like(0.0);
  check_bandwidth(spec);
  const double step = grid.cell / 2.0;
  std::vector<Point> samples;
  std::vector<double> mass;
  for (const Segment& s : L.segments) {
    const double len = std::sqrt(squared_dist(s.a, s.b));
    const int k = std::max(1, static_cast<int>(std::ceil(len / step)));
    // Midpoints of k equal subintervals, each carrying len/k meters of line.
    for (int i = 0; i < k; ++i) {
      const double t = (i + 0.5) / k;
      samples.push_back({s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y)});
      mass.push_back(len / k);
    }
  }

  Raster out = grid.like(0.0);
  const double inv2h2 = 1.0 / (2.0 * spec.h * spec.h);
  const double norm = kernel_norm(spec.h);
  const double r2 = 36.0 * spec.h * spec.h;
  const int n = static_cast<int>(samples.size());
  const int total = grid.ncols * grid.nrows;
  parallel_for(total, [&](int idx) {
    const int ix = idx % grid.ncols;
    const int iy = idx / grid.ncols;
    if (grid.is_nodata(ix, iy)) return;
    const Point c{grid.center_x(ix), grid.center_y(iy)};
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      const double d2 = squared_dist(samples[i], c);
      if (d2 <= r2) acc += mass[i] * std::exp(-d2 * inv2h2);
    }
    out.at(ix, iy) = acc * norm;
  });
  return out;
}

namespace {

template <typename DistFn>
Raster distance_impl(const Raster& grid, const DistFn& dist) {
  Raster out = grid.like(0.0);
  const int total = grid.ncols * grid.nrows;
  parallel_for(total, [&](int idx) {
    const int ix = idx % grid.ncols;
    const int iy = idx / grid.ncols;
    if (grid.is_nodata(ix, iy)) return;
    out.at(ix, iy) = dist(Point{grid.center_x(ix), grid.center_y(iy)});
  });
  return out;
}

}  // namespace

Raster distance_raster(const SegmentPattern& target, const Raster& grid) {
  if (target.size() == 0) throw input_error("distance_raster: empty segment pattern");
  return distance_impl(grid, [&](Point c) {
    double best = std::numeric_limits<double>::infinity();
    for (const Segment& s : target.segments) best = std::min(best, dist_point_segment(c, s));
    return best;
  });
}

Raster distance_raster(const PointPattern& target, const Raster& grid) {
  if (target.size() == 0) throw input_error("distance_raster: empty point pattern");
  return distance_impl(grid, [&](Point c) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : target.points) best = std::min(best, squared_dist(c, p));
    return std::sqrt(best);
  });
}

Raster interpolate_intensity(const std::vector<Point>& at, const std::vector<double>& values,
                             const Window& w, KernelSpec spec, const Raster& grid) {
  (void)w;
  if (at.empty() || at.size() != values.size()) {
    throw input_error("interpolate_intensity: need matching nonempty points and values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw input_error("interpolate_intensity: nonfinite value");
  }
  check_bandwidth(spec);
  Raster out = grid.like(0.0);
  const int n = static_cast<int>(at.size());
  const double inv2h2 = 1.0 / (2.0 * spec.h * spec.h);
  const double r2 = 36.0 * spec.h * spec.h;
  const int total = grid.ncols * grid.nrows;
  parallel_for(total, [&](int idx) {
    const int ix = idx % grid.ncols;
    const int iy = idx / grid.ncols;
    if (grid.is_nodata(ix, iy)) return;
    const Point c{grid.center_x(ix), grid.center_y(iy)};
    // Rescale by the nearest point's kernel value; the ratio is unchanged
    // and the h → 0 limit degrades to nearest-neighbor instead of 0/0.
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) dmin = std::min(dmin, squared_dist(at[i], c));
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
      const double d2 = squared_dist(at[i], c);
      if (d2 - dmin > r2) continue;  // negligible next to the nearest point
      const double k = std::exp(-(d2 - dmin) * inv2h2);
      num += values[i] * k;
      den += k;
    }
    out.at(ix, iy) = den < 1e-300 ? grid.nodata : num / den;
  });
  return out;
}

}  // namespace ppfit
