// Acceptance gate: twelve end-to-end criteria, one PASS/FAIL line each.
// Exit code 0 only when every criterion passes. Runtime budgets are checked
// where the criterion carries one; measured times print either way.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "ppfit/bandwidth.hpp"
#include "ppfit/covariates.hpp"
#include "ppfit/errors.hpp"
#include "ppfit/penfit.hpp"
#include "ppfit/pipeline.hpp"
#include "ppfit/quadrature.hpp"
#include "ppfit/sim_eval.hpp"
#include "ppfit/smoothing.hpp"
#include "support/oracles.hpp"

using namespace ppfit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Smooth deterministic field with roughly unit scale; distinct (fx, fy,
// phase) triples give near-orthogonal columns.
Raster wave_raster(const Raster& grid, double fx, double fy, double phase) {
  Raster r = grid.like(0.0);
  for (int iy = 0; iy < r.nrows; ++iy) {
    for (int ix = 0; ix < r.ncols; ++ix) {
      if (r.is_nodata(ix, iy)) continue;
      r.at(ix, iy) = std::sin(fx * r.center_x(ix) + fy * r.center_y(iy) + phase) +
                     0.25 * std::cos(2.0 * fy * r.center_x(ix) - fx * r.center_y(iy));
    }
  }
  return r;
}

Covariate raster_cov(const std::string& name, Raster r) {
  Covariate c;
  c.name = name;
  c.kind = Covariate::Kind::raster;
  c.raster = std::move(r);
  return c;
}

CovariateStack wave_stack(const Raster& grid, int K) {
  CovariateStack s;
  for (int k = 0; k < K; ++k) {
    s.base.push_back(raster_cov("z" + std::to_string(k + 1),
                                wave_raster(grid, 1.5 + 1.1 * k, 4.8 - 0.7 * k, 0.37 * k)));
  }
  return s;
}

// Plane wave at a golden-angle direction: distinct frequencies and scattered
// directions keep a family of these only weakly correlated.
Raster plane_wave(const Raster& grid, int k, double freq) {
  const double th = 2.39996322972865332 * (k + 1);
  Raster r = grid.like(0.0);
  for (int iy = 0; iy < r.nrows; ++iy) {
    for (int ix = 0; ix < r.ncols; ++ix) {
      r.at(ix, iy) = std::sin(
          freq * (std::cos(th) * r.center_x(ix) + std::sin(th) * r.center_y(iy)) + 0.7 * k);
    }
  }
  return r;
}

int active_count(const FitState& s) {
  int nnz = 0;
  for (double b : s.beta)
    if (b != 0.0) ++nnz;
  return nnz;
}

// The planted scenario shared by criteria 4 and 5: ten wave covariates on
// the unit square, truth exp(b0 + z1 - z2) calibrated to about 2000 events.
struct Planted {
  Window w = Window::rectangle(0, 0, 1, 1);
  Raster grid;
  CovariateStack base;
  double b0 = 0;
  double rho_max = 0;

  Planted() {
    grid = rasterize(w, 1.0 / 64);
    base = wave_stack(grid, 2);
    // Decoys only weakly correlated with the two active fields and with each
    // other, so their entry into the path is noise-driven.
    for (int k = 2; k < 10; ++k) {
      base.base.push_back(
          raster_cov("z" + std::to_string(k + 1), plane_wave(grid, k, 6.0 + 2.1 * k)));
    }
    const Raster& z1 = base.base[0].raster;
    const Raster& z2 = base.base[1].raster;
    double mass = 0, peak = 0;
    for (int iy = 0; iy < grid.nrows; ++iy) {
      for (int ix = 0; ix < grid.ncols; ++ix) {
        const double f = std::exp(z1.at(ix, iy) - z2.at(ix, iy));
        mass += f * grid.cell * grid.cell;
        peak = std::max(peak, f);
      }
    }
    b0 = std::log(2000.0 / mass);
    rho_max = std::exp(b0) * peak;  // fields are piecewise constant, so exact
  }

  PointPattern simulate(std::uint64_t seed) const {
    const Raster& z1 = base.base[0].raster;
    const Raster& z2 = base.base[1].raster;
    const double b = b0;
    return simulate_poisson(
        [&z1, &z2, b](Point p) {
          const auto v1 = z1.value_at(p.x, p.y);
          const auto v2 = z2.value_at(p.x, p.y);
          return v1 && v2 ? std::exp(b + *v1 - *v2) : 0.0;
        },
        rho_max, w, seed);
  }
};

Planted& planted() {
  static Planted p;
  return p;
}

// ---- criterion 1: quadrature weights sum to the window area ----------------

Outcome quadrature_normalization() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (int s = 1; s <= 50; ++s) {
    const Window w = oracle::random_convex_window(s, 1.0 + 0.2 * (s % 5));
    const PointPattern x = oracle::random_pattern(w, 40 + (7 * s) % 140, 100 + s);
    const auto mode = s % 2 ? DummyMode::systematic : DummyMode::random;
    const QuadratureScheme q = build_grid_scheme(x, w, 4 + (s % 17), mode, s);
    double sw = 0;
    for (double wj : q.weights) sw += wj;
    worst = std::max(worst, std::abs(sw - q.window_area) / q.window_area);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 5.0,
          "max rel err " + num(worst) + " over 50 schemes (" + num(secs) + "s, budget 5s)"};
}

// ---- criterion 2: unpenalized solve matches a dense Newton oracle ----------

Outcome glm_oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Window w = Window::rectangle(0, 0, 1, 1);
  const Raster grid = rasterize(w, 1.0 / 32);
  double worst = 0;
  for (int i = 1; i <= 20; ++i) {
    const int K = 1 + (i % 8);
    const PointPattern x = oracle::random_pattern(w, 40 + 17 * i, 500 + i);
    const QuadratureScheme q = build_grid_scheme(x, w, 7 + (i % 5), DummyMode::systematic, i);
    const CovariateStack stack = standardize(wave_stack(grid, K), q);
    const Matrix Z = eval_at(stack, q.points);

    FitState cold;
    cold.beta.assign(Z.cols, 0.0);
    const FitState s = cd_solve(q, Z, {0.95, 0.0}, cold);
    const oracle::GlmFit ref = oracle::newton_poisson(q.weights, q.responses, Z);
    worst = std::max(worst, std::abs(s.beta0 - ref.beta0));
    for (int k = 0; k < Z.cols; ++k) worst = std::max(worst, std::abs(s.beta[k] - ref.beta[k]));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0,
          "max |cd - newton| " + num(worst) + " over 20 instances (" + num(secs) +
              "s, budget 30s)"};
}

// ---- criterion 3: KKT conditions along a long path --------------------------

Outcome kkt_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const Window w = Window::rectangle(0, 0, 1, 1);
  const PointPattern x = oracle::random_pattern(w, 2500, 31);
  const QuadratureScheme q = build_grid_scheme(x, w, 50, DummyMode::systematic, 31);
  const Raster grid = rasterize(w, 1.0 / 64);
  const CovariateStack stack = standardize(wave_stack(grid, 50), q);
  const Matrix Z = eval_at(stack, q.points);

  const std::vector<double> path = lambda_path(q, Z, 0.95, 100);
  FitState state;
  state.beta.assign(Z.cols, 0.0);
  double worst = 0;
  for (double lam : path) {
    state = cd_solve(q, Z, {0.95, lam}, state);
    worst = std::max(worst, oracle::kkt_violation(q, Z, state.beta0, state.beta, 0.95, lam));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 20.0,
          "m=" + std::to_string(q.size()) + " K=50, max violation " + num(worst) + " (" +
              num(secs) + "s, budget 20s)"};
}

// ---- criterion 4: the path really starts at lambda_max ----------------------

Outcome lambda_max_boundary() {
  const auto t0 = std::chrono::steady_clock::now();
  const Planted& pl = planted();
  const PointPattern x = pl.simulate(404);
  const QuadratureScheme q = build_grid_scheme(x, pl.w, 16, DummyMode::systematic, 404);
  const CovariateStack stack = standardize(pl.base, q);
  const Matrix Z = eval_at(stack, q.points);
  const std::vector<double> path = lambda_path(q, Z, 0.95, 100);

  FitState cold;
  cold.beta.assign(Z.cols, 0.0);
  const int at_max = active_count(cd_solve(q, Z, {0.95, path[0]}, cold));
  const int above = active_count(cd_solve(q, Z, {0.95, path[0] * 1.01}, cold));
  const int below = active_count(cd_solve(q, Z, {0.95, path[0] * 0.5}, cold));
  const double secs = seconds_since(t0);
  return {at_max == 0 && above == 0 && below >= 1,
          "active at lambda_1 " + std::to_string(at_max) + ", at 1.01x " + std::to_string(above) +
              ", at 0.5x " + std::to_string(below) + " (" + num(secs) + "s)"};
}

// ---- criterion 5: planted two-signal recovery over 100 seeds ----------------

Outcome planted_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const Planted& pl = planted();
  FitConfig cfg;
  cfg.tiles_per_side = 16;
  cfg.path_length = 40;
  cfg.folds = 5;

  int recovered = 0;
  bool sparse_never_denser = true;
  long long events = 0;
  for (int s = 1; s <= 100; ++s) {
    const PointPattern x = pl.simulate(9000 + s);
    events += x.size();
    cfg.seed = s;
    const FitResult fit = run_fit(x, pl.w, pl.base, pl.grid, cfg);
    const int opt = fit.path.cv.index_opt;
    const int one = fit.path.cv.index_1se;
    if (fit.path.coefs(opt, 0) > 0 && fit.path.coefs(opt, 1) < 0) ++recovered;
    if (fit.path.nnz[one] > fit.path.nnz[opt]) sparse_never_denser = false;
  }
  const double secs = seconds_since(t0);
  return {recovered >= 90 && sparse_never_denser && secs < 300.0,
          std::to_string(recovered) + "/100 recovered, mean n " + num(events / 100.0) +
              (sparse_never_denser ? ", 1se never denser" : ", 1se DENSER somewhere") + " (" +
              num(secs) + "s, budget 300s)"};
}

// ---- criterion 6: interaction expansion count --------------------------------

Outcome interaction_count() {
  CovariateStack s;
  for (int k = 0; k < 43; ++k) {
    Covariate c;
    c.name = "c" + std::to_string(k + 1);
    c.kind = Covariate::Kind::coord_x;
    s.base.push_back(std::move(c));
  }
  const CovariateStack ex = expand_interactions(s, true);
  const int total = ex.raw_count();
  const bool names_match = static_cast<int>(ex.raw_names().size()) == total;
  return {total == 989 && names_match,
          "43 inputs with squares expand to " + std::to_string(total) + " columns"};
}

// ---- criterion 7: edge-corrected kernel mass ---------------------------------

Outcome kernel_mass() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const Window w = oracle::random_convex_window(700 + i, 1.0 + 0.3 * (i % 4));
    const PointPattern x = oracle::random_pattern(w, 50 + 23 * i, 800 + i);
    const BBox& b = w.bbox();
    const double cell = std::max(b.x1 - b.x0, b.y1 - b.y0) / 128;
    const Raster grid = rasterize(w, cell);
    // h sweeps 0.02..2 x the bbox diagonal: two orders of magnitude
    const double h = 0.02 * std::pow(100.0, i / 19.0) * b.diagonal();
    const Raster den = kernel_intensity(x, w, {h}, grid);
    double mass = 0;
    for (std::size_t c = 0; c < den.values.size(); ++c)
      if (!den.is_nodata_index(c)) mass += den.values[c];
    mass *= den.cell * den.cell;
    worst = std::max(worst, std::abs(mass - x.size()) / x.size());
  }
  const double secs = seconds_since(t0);
  return {worst < 0.01 && secs < 30.0,
          "max mass error " + num(100 * worst) + "% over 20 patterns (" + num(secs) +
              "s, budget 30s)"};
}

// ---- criterion 8: analytic bandwidth facts -----------------------------------

Outcome bandwidth_analytic() {
  // three identical cross-shaped clusters: every sigma_q^2 is exactly 1/8
  const double cx[3] = {0, 10, 0};
  const double cy[3] = {0, 0, 10};
  Matrix data(12, 2);
  int r = 0;
  for (int c = 0; c < 3; ++c) {
    const double off[4][2] = {{0.5, 0}, {-0.5, 0}, {0, 0.5}, {0, -0.5}};
    for (auto& o : off) {
      data(r, 0) = cx[c] + o[0];
      data(r, 1) = cy[c] + o[1];
      ++r;
    }
  }
  const BandwidthReport rep = select_bandwidth(data, 5, 1);
  const double sigma = std::sqrt(0.125);
  const bool h_exact = rep.P0 == 3 && std::abs(rep.h - sigma) < 1e-12;

  const double kl = kl_index(10.0, 2.0, 1.9, 2, 2);
  const bool kl_ok = std::abs(kl - 6.0 / 1.7) < 1e-6;
  return {h_exact && kl_ok, "P0=" + std::to_string(rep.P0) + ", |h - sigma| " +
                                num(std::abs(rep.h - sigma)) + ", KL(10,2,1.9) = " + num(kl)};
}

// ---- criterion 9: cluster-count recovery --------------------------------------

Outcome cluster_count_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int three_ok = 0;
  for (int s = 1; s <= 100; ++s) {
    const Matrix data = oracle::gaussian_blobs({{0, 0}, {8, 0}, {0, 8}}, 0.5, 30, 1000 + s);
    if (select_bandwidth(data, 8, s).P0 == 3) ++three_ok;
  }
  int sixteen_ok = 0;
  std::vector<Point> centers;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) centers.push_back({6.0 * i, 6.0 * j});
  for (int s = 1; s <= 100; ++s) {
    const Matrix data = oracle::gaussian_blobs(centers, 0.5, 20, 2000 + s);
    const int p0 = select_bandwidth(data, 20, s).P0;
    if (p0 >= 14 && p0 <= 18) ++sixteen_ok;
  }
  const double secs = seconds_since(t0);
  return {three_ok >= 95 && sixteen_ok >= 90 && secs < 120.0,
          "3-blob " + std::to_string(three_ok) + "/100, 16-blob " + std::to_string(sixteen_ok) +
              "/100 (" + num(secs) + "s, budget 120s)"};
}

// ---- criterion 10: undersampling stability protocol ---------------------------

Outcome stability_protocol() {
  const auto t0 = std::chrono::steady_clock::now();
  const Window w = Window::rectangle(0, 0, 1, 1);
  const Raster field_grid = rasterize(w, 1.0 / 64);
  CovariateStack base = wave_stack(field_grid, 2);
  const Raster& z1 = base.base[0].raster;

  double mass = 0, peak = 0;
  for (int iy = 0; iy < field_grid.nrows; ++iy) {
    for (int ix = 0; ix < field_grid.ncols; ++ix) {
      const double f = std::exp(z1.at(ix, iy));
      mass += f * field_grid.cell * field_grid.cell;
      peak = std::max(peak, f);
    }
  }
  const double b0 = std::log(500.0 / mass);
  const PointPattern x = simulate_poisson(
      [&z1, b0](Point p) {
        const auto v = z1.value_at(p.x, p.y);
        return v ? std::exp(b0 + *v) : 0.0;
      },
      std::exp(b0) * peak, w, 77);

  const Raster grid = rasterize(w, 1.0 / 12);
  FitConfig cfg;
  cfg.tiles_per_side = 8;
  cfg.path_length = 15;
  cfg.folds = 3;
  cfg.seed = 3;

  double mean_05 = 0, mean_07 = 0, mean_09 = 0;
  mean_05 = stability_eval(x, w, base, grid, cfg, 20, 0.5, 11).overall_mean;
  mean_07 = stability_eval(x, w, base, grid, cfg, 20, 0.7, 11).overall_mean;
  mean_09 = stability_eval(x, w, base, grid, cfg, 20, 0.9, 11).overall_mean;

  const StabilityReport full = stability_eval(x, w, base, grid, cfg, 3, 1.0, 11);
  bool all_zero = full.overall_mean == 0.0;
  for (std::size_t c = 0; c < full.mae.values.size() && all_zero; ++c) {
    if (!full.mae.is_nodata_index(c) && full.mae.values[c] != 0.0) all_zero = false;
  }

  const double secs = seconds_since(t0);
  const bool monotone = mean_05 > mean_07 && mean_07 > mean_09;
  return {monotone && all_zero && secs < 600.0,
          "mean MAE " + num(mean_05) + " > " + num(mean_07) + " > " + num(mean_09) +
              (monotone ? "" : " NOT MONOTONE") + (all_zero ? ", full fraction exact" : "") + " (" +
              num(secs) + "s, budget 600s)"};
}

// ---- criterion 11: byte-identical CLI output across thread counts -------------

Outcome cli_determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = oracle::make_temp_dir("accept_cli");
  {
    std::ofstream win(dir + "/win.csv");
    win << "x,y\n0,0\n1,0\n1,1\n0,1\n";
    std::ofstream man(dir + "/cov.conf");
    man << "ew coordinate axis=x\nns coordinate axis=y\n";
  }
  const std::string cli = PPFIT_CLI_PATH;
  std::string out;
  if (oracle::run_command("cd " + dir + " && " + cli +
                              " simulate --window win.csv --rho-const 400 --seed 6 --out sim",
                          &out) != 0)
    return {false, "simulate failed: " + out};

  const std::string fit_cmd = "cd " + dir + " && " + cli +
                              " fit --pattern sim/pattern.csv --window win.csv"
                              " --covariates cov.conf --tiles 8 --path-length 15 --folds 3"
                              " --seed 7 --grid 16 --out fit";
  if (oracle::run_command(fit_cmd + " --threads 1", &out) != 0)
    return {false, "fit failed: " + out};
  const std::string json1 = oracle::slurp(dir + "/fit/fit.json");
  const std::string asc1 = oracle::slurp(dir + "/fit/intensity_opt.asc");
  if (oracle::run_command(fit_cmd + " --threads 3", &out) != 0)
    return {false, "refit failed: " + out};
  const bool same_json = oracle::slurp(dir + "/fit/fit.json") == json1;
  const bool same_asc = oracle::slurp(dir + "/fit/intensity_opt.asc") == asc1;
  const double secs = seconds_since(t0);
  return {same_json && same_asc && !json1.empty(),
          std::string(same_json ? "report identical" : "report DIFFERS") +
              (same_asc ? ", raster identical" : ", raster DIFFERS") + " across --threads 1/3 (" +
              num(secs) + "s)"};
}

// ---- criterion 12: long-path CV wall time --------------------------------------

Outcome path_performance() {
  const Window w = Window::rectangle(0, 0, 1, 1);
  const PointPattern x = oracle::random_pattern(w, 5100, 90);
  const QuadratureScheme q = build_grid_scheme(x, w, 70, DummyMode::systematic, 90);
  const Raster grid = rasterize(w, 1.0 / 64);
  CovariateStack raw;
  for (int k = 0; k < 100; ++k) {
    raw.base.push_back(raster_cov("z" + std::to_string(k + 1), plane_wave(grid, k, 4.0 + 0.9 * k)));
  }

  const auto t0 = std::chrono::steady_clock::now();
  const CovariateStack stack = standardize(raw, q);
  const Matrix Z = eval_at(stack, q.points);
  const std::vector<double> path = lambda_path(q, Z, 0.95, 100);
  const FitPath fp = fit_path(q, Z, stack, 0.95, path);
  const CvStats cv = cv_select(q, Z, 0.95, path, 10, 90);
  const double secs = seconds_since(t0);

  const bool sane = fp.lambdas.size() == 100 && cv.index_opt >= 0 && cv.index_opt < 100;
  return {sane && secs < 60.0, "m=" + std::to_string(q.size()) + " K=100, 100-lambda 10-fold CV in " +
                                   num(secs) + "s (budget 60s)"};
}

struct Criterion {
  const char* label;
  std::function<Outcome()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"quadrature normalization", quadrature_normalization},
      {"unpenalized solve matches Newton oracle", glm_oracle_equivalence},
      {"KKT conditions along a 100-lambda path", kkt_suite},
      {"path starts exactly at lambda_max", lambda_max_boundary},
      {"planted two-signal recovery", planted_recovery},
      {"interaction expansion count", interaction_count},
      {"edge-corrected kernel mass", kernel_mass},
      {"bandwidth analytic cases", bandwidth_analytic},
      {"cluster-count recovery", cluster_count_recovery},
      {"undersampling stability protocol", stability_protocol},
      {"CLI determinism across thread counts", cli_determinism},
      {"long-path CV wall time", path_performance},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%2zu] %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].label,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
