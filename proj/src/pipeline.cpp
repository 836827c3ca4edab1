#include "ppfit/pipeline.hpp"

#include "ppfit/errors.hpp"

namespace ppfit {

FitResult run_fit(const PointPattern& x, const Window& w, const CovariateStack& base,
                  const Raster& grid, const FitConfig& config) {
  if (config.alpha < 0 || config.alpha > 1) throw config_error("alpha must lie in [0,1]");
  if (config.folds < 2) throw config_error("folds must be at least 2");
  if (config.path_length < 2) throw config_error("path length must be at least 2");
  if (config.tiles_per_side < 1) throw config_error("tiles_per_side must be at least 1");
  if (base.standardized) throw config_error("pass the unstandardized covariate stack");
  if (base.base_count() < 1 && !config.include_benchmark)
    throw config_error("need at least one covariate");
  if (x.size() < 1) throw input_error("cannot fit an empty pattern");

  FitResult res;
  res.scheme = build_grid_scheme(x, w, config.tiles_per_side, config.dummy_mode, config.seed);

  CovariateStack stack = base;
  if (config.include_benchmark) {
    BenchmarkResult bench = benchmark_covariate(x, w, grid, config.seed);
    Covariate c;
    c.name = "benchmark";
    c.kind = Covariate::Kind::raster;
    c.raster = std::move(bench.raster);
    stack.base.push_back(std::move(c));
    res.has_benchmark = true;
    res.benchmark_h = bench.h;
    res.benchmark_p0 = bench.P0;
  }
  if (config.interactions) stack = expand_interactions(stack, config.squares);
  res.stack = standardize(stack, res.scheme);

  const Matrix Z = eval_at(res.stack, res.scheme.points);
  const std::vector<double> lambdas =
      lambda_path(res.scheme, Z, config.alpha, config.path_length, config.lambda_ratio);
  res.path = fit_path(res.scheme, Z, res.stack, config.alpha, lambdas, config.tol,
                      config.max_outer);
  res.path.cv = cv_select(res.scheme, Z, config.alpha, lambdas, config.folds, config.seed,
                          config.tol, config.max_outer);

  auto beta_row = [&](int t) {
    std::vector<double> beta(res.path.coefs.cols);
    for (int k = 0; k < res.path.coefs.cols; ++k) beta[k] = res.path.coefs(t, k);
    return beta;
  };
  const int t_opt = res.path.cv.index_opt;
  const int t_1se = res.path.cv.index_1se;
  res.intensity_opt = predict_intensity(res.path.beta0[t_opt], beta_row(t_opt), res.stack, grid,
                                        config.normalize_output);
  res.intensity_1se = predict_intensity(res.path.beta0[t_1se], beta_row(t_1se), res.stack, grid,
                                        config.normalize_output);
  return res;
}

}  // namespace ppfit
