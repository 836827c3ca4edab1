#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "ppfit/geometry.hpp"
#include "ppfit/pipeline.hpp"

namespace ppfit {

// Inhomogeneous Poisson sampler by thinning: Poisson(rho_max·|bbox|) proposals
// on the bbox, kept with probability rho(p)/rho_max and window membership.
PointPattern simulate_poisson(const std::function<double(Point)>& rho, double rho_max,
                              const Window& w, std::uint64_t seed);

// rho read off the raster (nodata → 0); rho_max = max over defined cells.
PointPattern simulate_poisson(const Raster& intensity, const Window& w, std::uint64_t seed);

// Simple random sample of round(fraction·n) points without replacement,
// original order and marks preserved. fraction = 1 returns the input as is.
PointPattern undersample(const PointPattern& x, double fraction, std::uint64_t seed);

// Disjoint partition with sizes round(fraction·n) and the remainder.
std::pair<PointPattern, PointPattern> split_train_test(const PointPattern& x, double fraction,
                                                       std::uint64_t seed);

struct StabilityReport {
  int replicates = 0;  // requested
  int used = 0;        // successful fits
  int failures = 0;
  double fraction = 0;
  Raster mae;   // per-pixel mean |ref − est_r|
  Raster q05;   // per-pixel 5% quantile of |ref − est_r| (type-7)
  Raster q95;
  double overall_mean = 0;  // mean of pixel MAE over defined cells
  double overall_sd = 0;
  Raster reference;  // the full-data intensity the replicates are compared to
};

// Fits the full data once (reference), then R undersampled refits with full
// λ re-selection. Rasters are the λ_opt predictions unless use_1se; min-max
// normalized unless raw_scale. Replicate r draws its subsample from
// (seed, r); the fit internals reuse config.seed, so fraction = 1 gives
// MAE ≡ 0.
StabilityReport stability_eval(const PointPattern& x, const Window& w,
                               const CovariateStack& base, const Raster& grid,
                               const FitConfig& config, int R, double fraction,
                               std::uint64_t seed, bool use_1se = false, bool raw_scale = false);

// Type-7 empirical quantile (linear interpolation) of a sorted sample.
double quantile_type7(const std::vector<double>& sorted, double p);

}  // namespace ppfit
