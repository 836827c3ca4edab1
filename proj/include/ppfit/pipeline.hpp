#pragma once

#include <cstdint>
#include <string>

#include "ppfit/covariates.hpp"
#include "ppfit/penfit.hpp"
#include "ppfit/quadrature.hpp"

namespace ppfit {

// Everything cmd-fit needs, resolved. Defaults match the documented CLI
// defaults; outputs embed the resolved values.
struct FitConfig {
  int tiles_per_side = 32;
  DummyMode dummy_mode = DummyMode::systematic;
  double alpha = 0.95;
  int path_length = 100;
  double lambda_ratio = 0;  // 0 = auto (1e-4, or 1e-2 when K ≥ m)
  int folds = 10;
  std::uint64_t seed = 1;
  bool squares = false;
  bool interactions = false;
  bool include_benchmark = false;
  bool normalize_output = false;  // min-max scale predicted rasters to [0,1]
  int bandwidth_kmax = 30;
  double tol = 1e-7;
  int max_outer = 100;
};

struct FitResult {
  QuadratureScheme scheme;
  CovariateStack stack;  // expanded and standardized
  FitPath path;
  bool has_benchmark = false;
  double benchmark_h = 0;
  int benchmark_p0 = 0;
  Raster intensity_opt;  // predicted at λ_opt
  Raster intensity_1se;  // predicted at λ_1se
};

// End-to-end: quadrature → (benchmark) → interactions → standardize →
// λ path → CV → predictions on grid. base holds the unexpanded columns.
FitResult run_fit(const PointPattern& x, const Window& w, const CovariateStack& base,
                  const Raster& grid, const FitConfig& config);

}  // namespace ppfit
