#include "ppfit/sim_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ppfit/errors.hpp"
#include "ppfit/rng.hpp"

namespace ppfit {

PointPattern simulate_poisson(const std::function<double(Point)>& rho, double rho_max,
                              const Window& w, std::uint64_t seed) {
  if (rho_max < 0 || !std::isfinite(rho_max)) {
    throw input_error("simulate_poisson: intensity bound must be finite and nonnegative");
  }
  PointPattern out;
  if (rho_max == 0) return out;
  const BBox& bb = w.bbox();
  Rng rng(Rng::mix(seed, 0x51f0));
  const std::uint64_t n = rng.poisson(rho_max * bb.width() * bb.height());
  for (std::uint64_t i = 0; i < n; ++i) {
    const Point p{rng.uniform(bb.x0, bb.x1), rng.uniform(bb.y0, bb.y1)};
    const double u = rng.uniform();  // drawn unconditionally: stream layout is fixed
    if (!contains(w, p)) continue;
    if (u * rho_max < rho(p)) out.points.push_back(p);
  }
  return out;
}

PointPattern simulate_poisson(const Raster& intensity, const Window& w, std::uint64_t seed) {
  double rho_max = 0;
  for (int iy = 0; iy < intensity.nrows; ++iy) {
    for (int ix = 0; ix < intensity.ncols; ++ix) {
      if (!intensity.is_nodata(ix, iy)) rho_max = std::max(rho_max, intensity.at(ix, iy));
    }
  }
  auto rho = [&intensity](Point p) {
    const auto v = intensity.value_at(p.x, p.y, 0);
    return v ? *v : 0.0;
  };
  return simulate_poisson(rho, rho_max, w, seed);
}

namespace {

// First round(fraction·n) positions of a seeded Fisher–Yates pass, emitted
// in ascending index order so that fraction = 1 returns the input verbatim.
std::vector<int> sample_indices(int n, double fraction, std::uint64_t seed) {
  const int k = static_cast<int>(std::lround(fraction * n));
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(Rng::mix(seed, 0x5a3e));
  for (int i = 0; i < k && i < n - 1; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

PointPattern take(const PointPattern& x, const std::vector<int>& idx) {
  PointPattern out;
  out.points.reserve(idx.size());
  for (int i : idx) {
    out.points.push_back(x.points[i]);
    if (x.marked()) out.marks.push_back(x.marks[i]);
  }
  return out;
}

}  // namespace

PointPattern undersample(const PointPattern& x, double fraction, std::uint64_t seed) {
  if (!(fraction > 0) || fraction > 1) throw input_error("undersample: fraction must be in (0,1]");
  return take(x, sample_indices(x.size(), fraction, seed));
}

std::pair<PointPattern, PointPattern> split_train_test(const PointPattern& x, double fraction,
                                                       std::uint64_t seed) {
  if (!(fraction > 0) || !(fraction < 1)) {
    throw input_error("split_train_test: fraction must be in (0,1)");
  }
  const std::vector<int> train = sample_indices(x.size(), fraction, seed);
  std::vector<char> in_train(x.size(), 0);
  for (int i : train) in_train[i] = 1;
  std::vector<int> test;
  for (int i = 0; i < x.size(); ++i) {
    if (!in_train[i]) test.push_back(i);
  }
  return {take(x, train), take(x, test)};
}

double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw input_error("quantile of an empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double pos = p * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::clamp(
      std::floor(pos), 0.0, static_cast<double>(sorted.size() - 2)));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

StabilityReport stability_eval(const PointPattern& x, const Window& w,
                               const CovariateStack& base, const Raster& grid,
                               const FitConfig& config, int R, double fraction,
                               std::uint64_t seed, bool use_1se, bool raw_scale) {
  if (R < 1) throw input_error("stability_eval: need at least one replicate");
  FitConfig cfg = config;
  cfg.normalize_output = !raw_scale;

  auto chosen = [&](const FitResult& fr) -> const Raster& {
    return use_1se ? fr.intensity_1se : fr.intensity_opt;
  };

  const FitResult ref_fit = run_fit(x, w, base, grid, cfg);
  const Raster reference = chosen(ref_fit);

  StabilityReport rep;
  rep.replicates = R;
  rep.fraction = fraction;
  rep.reference = reference;

  std::vector<Raster> abs_err;
  abs_err.reserve(R);
  for (int r = 1; r <= R; ++r) {
    const PointPattern sub = undersample(x, fraction, Rng::mix(seed, 1000 + r));
    try {
      const FitResult fit = run_fit(sub, w, base, grid, cfg);
      Raster err = reference.like(0.0);
      const Raster& est = chosen(fit);
      for (int iy = 0; iy < err.nrows; ++iy) {
        for (int ix = 0; ix < err.ncols; ++ix) {
          if (err.is_nodata(ix, iy)) continue;
          if (est.is_nodata(ix, iy) || reference.is_nodata(ix, iy)) {
            err.at(ix, iy) = err.nodata;
          } else {
            err.at(ix, iy) = std::abs(reference.at(ix, iy) - est.at(ix, iy));
          }
        }
      }
      abs_err.push_back(std::move(err));
    } catch (const error& e) {
      warn("stability replicate " + std::to_string(r) + " failed: " + e.what());
      ++rep.failures;
    }
  }
  rep.used = static_cast<int>(abs_err.size());
  if (rep.used == 0) throw numeric_error("every stability replicate failed");

  rep.mae = grid.like(0.0);
  rep.q05 = grid.like(0.0);
  rep.q95 = grid.like(0.0);
  double sum = 0, sum2 = 0;
  int defined = 0;
  std::vector<double> errs;
  for (int iy = 0; iy < grid.nrows; ++iy) {
    for (int ix = 0; ix < grid.ncols; ++ix) {
      if (grid.is_nodata(ix, iy)) continue;
      errs.clear();
      for (const Raster& e : abs_err) {
        if (e.at(ix, iy) != e.nodata) errs.push_back(e.at(ix, iy));
      }
      if (errs.empty()) {
        rep.mae.at(ix, iy) = rep.mae.nodata;
        rep.q05.at(ix, iy) = rep.q05.nodata;
        rep.q95.at(ix, iy) = rep.q95.nodata;
        continue;
      }
      double acc = 0;
      for (double v : errs) acc += v;
      const double mae = acc / errs.size();
      std::sort(errs.begin(), errs.end());
      rep.mae.at(ix, iy) = mae;
      rep.q05.at(ix, iy) = quantile_type7(errs, 0.05);
      rep.q95.at(ix, iy) = quantile_type7(errs, 0.95);
      sum += mae;
      sum2 += mae * mae;
      ++defined;
    }
  }
  if (defined == 0) throw numeric_error("stability grid has no defined cells");
  rep.overall_mean = sum / defined;
  rep.overall_sd =
      defined > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / defined) / (defined - 1))) : 0.0;
  return rep;
}

}  // namespace ppfit
