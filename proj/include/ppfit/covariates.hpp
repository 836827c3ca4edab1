#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppfit/geometry.hpp"
#include "ppfit/matrix.hpp"
#include "ppfit/quadrature.hpp"

namespace ppfit {

// One named covariate column source. Zone covariates evaluate polygon
// membership exactly and fall back to their rasterized form off-zone.
struct Covariate {
  enum class Kind { raster, coord_x, coord_y, zone };

  std::string name;
  Kind kind = Kind::raster;
  Raster raster;              // raster kind; zone fallback grid
  std::vector<Window> zones;  // zone kind only
  std::vector<double> zone_values;
};

// Base columns plus interaction expansion and (optional) standardization.
// Expanded raw design: base columns in order, then one product column per
// interaction_map entry (i,j) named "zi:zj" (i=j gives the square).
// After standardize(), eval_at() emits only the kept columns, centered and
// scaled; mean/sd/kept describe that transform on the raw expanded design.
struct CovariateStack {
  std::vector<Covariate> base;
  std::vector<std::pair<int, int>> interaction_map;

  std::vector<double> mean, sd;  // per kept column
  std::vector<int> kept;         // indices into the raw expanded design
  bool standardized = false;

  int base_count() const { return static_cast<int>(base.size()); }
  int raw_count() const { return base_count() + static_cast<int>(interaction_map.size()); }
  int design_count() const { return standardized ? static_cast<int>(kept.size()) : raw_count(); }

  std::vector<std::string> raw_names() const;
  std::vector<std::string> design_names() const;
};

// Raw value of expanded column k at p. Raster nodata resolves to the nearest
// defined cell within max_ring Chebyshev rings; none found → input error.
double eval_column(const CovariateStack& stack, int k, Point p, int max_ring = 3);

// Same without the ring search or the error: undefined → nullopt
// (prediction rasters propagate nodata instead of failing).
std::optional<double> try_eval_column(const CovariateStack& stack, int k, Point p);

// Design matrix at the given points: raw columns, or standardized kept
// columns once standardize() has run.
Matrix eval_at(const CovariateStack& stack, const std::vector<Point>& points);

CovariateStack expand_interactions(const CovariateStack& stack, bool include_squares);

// Weighted standardization under weights w_j/Σw_j at the scheme's points.
// Constant columns are dropped with a warning; all-constant → error.
CovariateStack standardize(const CovariateStack& stack, const QuadratureScheme& q);

// Coefficients on the standardized scale → original scale over the raw
// expanded design (dropped columns get exactly 0).
void back_transform(const CovariateStack& stack, double beta0_std,
                    const std::vector<double>& beta_std, double* beta0_orig,
                    std::vector<double>* beta_orig);

// Piecewise-constant raster from zone polygons; cells in no zone get nodata.
Raster zone_raster(const std::vector<std::vector<Point>>& zones,
                   const std::vector<double>& values, const Raster& grid);

// Edge-corrected kernel intensity at the heuristic bandwidth.
struct BenchmarkResult {
  Raster raster;
  double h = 0;
  int P0 = 0;
};
BenchmarkResult benchmark_covariate(const PointPattern& x, const Window& w, const Raster& grid,
                                    std::uint64_t seed);

}  // namespace ppfit
