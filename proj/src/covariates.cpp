#include "ppfit/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ppfit/bandwidth.hpp"
#include "ppfit/errors.hpp"
#include "ppfit/smoothing.hpp"

namespace ppfit {

namespace {

double eval_base(const Covariate& c, Point p, int max_ring) {
  switch (c.kind) {
    case Covariate::Kind::coord_x:
      return p.x;
    case Covariate::Kind::coord_y:
      return p.y;
    case Covariate::Kind::zone: {
      for (std::size_t z = 0; z < c.zones.size(); ++z) {
        if (contains(c.zones[z], p)) return c.zone_values[z];
      }
      // Off-zone points borrow from the rasterized fallback.
      if (auto v = c.raster.value_at(p.x, p.y, max_ring)) return *v;
      throw input_error("covariate '" + c.name + "': point (" + std::to_string(p.x) + "," +
                        std::to_string(p.y) + ") lies in no zone and near no defined cell");
    }
    case Covariate::Kind::raster:
    default: {
      if (auto v = c.raster.value_at(p.x, p.y, max_ring)) {
        if (!std::isfinite(*v)) {
          throw input_error("covariate '" + c.name + "': nonfinite value near (" +
                            std::to_string(p.x) + "," + std::to_string(p.y) + ")");
        }
        return *v;
      }
      throw input_error("covariate '" + c.name + "': no defined cell within " +
                        std::to_string(max_ring) + " cells of (" + std::to_string(p.x) + "," +
                        std::to_string(p.y) + ")");
    }
  }
}

}  // namespace

std::vector<std::string> CovariateStack::raw_names() const {
  std::vector<std::string> names;
  names.reserve(raw_count());
  for (const Covariate& c : base) names.push_back(c.name);
  for (auto [i, j] : interaction_map) names.push_back(base[i].name + ":" + base[j].name);
  return names;
}

std::vector<std::string> CovariateStack::design_names() const {
  std::vector<std::string> names = raw_names();
  if (!standardized) return names;
  std::vector<std::string> out;
  out.reserve(kept.size());
  for (int k : kept) out.push_back(names[k]);
  return out;
}

double eval_column(const CovariateStack& stack, int k, Point p, int max_ring) {
  const int K = stack.base_count();
  if (k < K) return eval_base(stack.base[k], p, max_ring);
  const auto [i, j] = stack.interaction_map[k - K];
  return eval_base(stack.base[i], p, max_ring) * eval_base(stack.base[j], p, max_ring);
}

std::optional<double> try_eval_column(const CovariateStack& stack, int k, Point p) {
  auto base = [&](const Covariate& c) -> std::optional<double> {
    switch (c.kind) {
      case Covariate::Kind::coord_x:
        return p.x;
      case Covariate::Kind::coord_y:
        return p.y;
      case Covariate::Kind::zone:
        for (std::size_t z = 0; z < c.zones.size(); ++z) {
          if (contains(c.zones[z], p)) return c.zone_values[z];
        }
        return c.raster.value_at(p.x, p.y, 0);
      case Covariate::Kind::raster:
      default:
        return c.raster.value_at(p.x, p.y, 0);
    }
  };
  const int K = stack.base_count();
  if (k < K) return base(stack.base[k]);
  const auto [i, j] = stack.interaction_map[k - K];
  const auto a = base(stack.base[i]);
  const auto b = base(stack.base[j]);
  if (!a || !b) return std::nullopt;
  return *a * *b;
}

Matrix eval_at(const CovariateStack& stack, const std::vector<Point>& points) {
  const int m = static_cast<int>(points.size());
  const int K = stack.base_count();
  Matrix raw(m, stack.raw_count());
  for (int r = 0; r < m; ++r) {
    double* row = raw.row(r);
    for (int k = 0; k < K; ++k) row[k] = eval_base(stack.base[k], points[r], 3);
    for (std::size_t t = 0; t < stack.interaction_map.size(); ++t) {
      const auto [i, j] = stack.interaction_map[t];
      row[K + t] = row[i] * row[j];
    }
  }
  if (!stack.standardized) return raw;

  Matrix out(m, static_cast<int>(stack.kept.size()));
  for (int r = 0; r < m; ++r) {
    const double* src = raw.row(r);
    double* dst = out.row(r);
    for (std::size_t c = 0; c < stack.kept.size(); ++c) {
      dst[c] = (src[stack.kept[c]] - stack.mean[c]) / stack.sd[c];
    }
  }
  return out;
}

CovariateStack expand_interactions(const CovariateStack& stack, bool include_squares) {
  if (stack.standardized) throw config_error("expand interactions before standardizing");
  if (stack.base_count() < 2) throw config_error("interactions need at least 2 covariates");
  CovariateStack out = stack;
  out.interaction_map.clear();
  const int K = stack.base_count();
  if (include_squares) {
    for (int i = 0; i < K; ++i) out.interaction_map.emplace_back(i, i);
  }
  for (int i = 0; i < K; ++i) {
    for (int j = i + 1; j < K; ++j) out.interaction_map.emplace_back(i, j);
  }
  return out;
}

CovariateStack standardize(const CovariateStack& stack, const QuadratureScheme& q) {
  if (stack.standardized) throw config_error("stack already standardized");
  CovariateStack out = stack;
  const Matrix raw = eval_at(stack, q.points);
  const int m = raw.rows;
  double wtot = 0;
  for (double w : q.weights) wtot += w;

  for (int k = 0; k < raw.cols; ++k) {
    double mean = 0;
    for (int r = 0; r < m; ++r) mean += q.weights[r] * raw(r, k);
    mean /= wtot;
    double var = 0;
    for (int r = 0; r < m; ++r) {
      const double d = raw(r, k) - mean;
      var += q.weights[r] * d * d;
    }
    var /= wtot;
    const double sd = std::sqrt(var);
    // relative floor: the weighted mean of a constant column is not exact,
    // so sd == 0 alone would miss numerically constant columns
    const double floor = 1e-12 * std::max(1.0, std::abs(mean));
    if (!(sd > floor) || !std::isfinite(sd)) {
      warn("covariate '" + stack.raw_names()[k] + "' is constant over the scheme; dropped");
      continue;
    }
    out.kept.push_back(k);
    out.mean.push_back(mean);
    out.sd.push_back(sd);
  }
  if (out.kept.empty()) throw numeric_error("all covariate columns are constant");
  out.standardized = true;
  return out;
}

void back_transform(const CovariateStack& stack, double beta0_std,
                    const std::vector<double>& beta_std, double* beta0_orig,
                    std::vector<double>* beta_orig) {
  if (!stack.standardized) throw config_error("back_transform needs a standardized stack");
  if (beta_std.size() != stack.kept.size()) {
    throw config_error("coefficient length does not match kept columns");
  }
  beta_orig->assign(stack.raw_count(), 0.0);
  double b0 = beta0_std;
  for (std::size_t c = 0; c < stack.kept.size(); ++c) {
    const double b = beta_std[c] / stack.sd[c];
    (*beta_orig)[stack.kept[c]] = b;
    b0 -= b * stack.mean[c];
  }
  *beta0_orig = b0;
}

Raster zone_raster(const std::vector<std::vector<Point>>& zones, const std::vector<double>& values,
                   const Raster& grid) {
  if (zones.size() != values.size() || zones.empty()) {
    throw input_error("zone polygons and values must pair up");
  }
  std::vector<Window> polys;
  polys.reserve(zones.size());
  for (const auto& z : zones) polys.emplace_back(z);
  Raster out = grid.like(0.0);
  for (int iy = 0; iy < grid.nrows; ++iy) {
    for (int ix = 0; ix < grid.ncols; ++ix) {
      if (grid.is_nodata(ix, iy)) continue;
      const Point c{grid.center_x(ix), grid.center_y(iy)};
      double v = out.nodata;
      for (std::size_t z = 0; z < polys.size(); ++z) {
        if (contains(polys[z], c)) {
          v = values[z];
          break;
        }
      }
      out.at(ix, iy) = v;
    }
  }
  return out;
}

BenchmarkResult benchmark_covariate(const PointPattern& x, const Window& w, const Raster& grid,
                                    std::uint64_t seed) {
  if (x.size() < 3) throw input_error("benchmark covariate needs at least 3 events");
  const int kmax = std::min(30, x.size() - 1);  // selector needs K_max < n
  const BandwidthReport rep = select_bandwidth(coords_matrix(x), kmax, seed);
  BenchmarkResult res;
  res.h = rep.h;
  res.P0 = rep.P0;
  res.raster = kernel_intensity(x, w, KernelSpec{rep.h}, grid);
  return res;
}

}  // namespace ppfit
