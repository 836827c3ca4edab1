#pragma once

#include <vector>

#include "ppfit/geometry.hpp"

namespace ppfit {

// Isotropic Gaussian kernel, κ_h(r) = (2πh²)^{-1} exp(−r²/(2h²)).
struct KernelSpec {
  double h = 0;
};

// Edge-corrected kernel intensity on the grid (the benchmark estimator).
// Each event contributes κ_h(c − y) / w_h(y), where the local corrector
// w_h(y) = Σ_{in-window cells} κ_h(cell − y)·cell² is a Riemann sum over
// the same grid, so Σ_cells ρ̃·cell² = n up to rounding.
Raster kernel_intensity(const PointPattern& x, const Window& w, KernelSpec spec,
                        const Raster& grid);

// Raw smoothed counts per m², no edge correction.
Raster pixel_count_density(const PointPattern& p, const Raster& grid, KernelSpec spec);

// Meters of line per m²: segments discretized at step cell/2, each sample
// carrying mass length/#samples, then kernel-smoothed without correction.
Raster segment_density(const SegmentPattern& L, const Window& w, KernelSpec spec,
                       const Raster& grid);

// Per-cell min distance from cell center to the target geometry.
Raster distance_raster(const SegmentPattern& target, const Raster& grid);
Raster distance_raster(const PointPattern& target, const Raster& grid);

// Nadaraya–Watson smoother of real values observed at points:
// ρ̂(c) = Σ v_i κ_h(c−x_i) / Σ κ_h(c−x_i); denominator < 1e-300 → nodata.
Raster interpolate_intensity(const std::vector<Point>& at, const std::vector<double>& values,
                             const Window& w, KernelSpec spec, const Raster& grid);

// Σ over defined cells of value·cell² (mass of a density raster).
double raster_integral(const Raster& r);

}  // namespace ppfit
