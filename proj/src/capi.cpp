#include "ppfit.h"

#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "ppfit/bandwidth.hpp"
#include "ppfit/covariates.hpp"
#include "ppfit/errors.hpp"
#include "ppfit/geometry.hpp"
#include "ppfit/io.hpp"
#include "ppfit/parallel.hpp"
#include "ppfit/pipeline.hpp"
#include "ppfit/sim_eval.hpp"
#include "ppfit/smoothing.hpp"

struct ppf_pattern {
  ppfit::PointPattern v;
};
struct ppf_segments {
  ppfit::SegmentPattern v;
};
struct ppf_window {
  ppfit::Window v;
};
struct ppf_raster {
  ppfit::Raster v;
};
struct ppf_stack {
  ppfit::CovariateStack v;
};
struct ppf_bandwidth {
  ppfit::BandwidthReport v;
};
struct ppf_fit {
  ppfit::FitResult v;
  std::vector<std::string> names;  // expanded-design names, stable for accessors
};
struct ppf_stability {
  ppfit::StabilityReport v;
};

namespace {

thread_local std::string t_error;

// Runs f inside the exception-to-status mapping the whole API shares.
template <typename F>
ppf_status guarded(F&& f) noexcept {
  try {
    f();
    return PPF_OK;
  } catch (const ppfit::input_error& e) {
    t_error = e.what();
    return PPF_ERR_INPUT;
  } catch (const ppfit::numeric_error& e) {
    t_error = e.what();
    return PPF_ERR_NUMERIC;
  } catch (const ppfit::config_error& e) {
    t_error = e.what();
    return PPF_ERR_CONFIG;
  } catch (const std::exception& e) {
    t_error = e.what();
    return PPF_ERR_OTHER;
  } catch (...) {
    t_error = "unknown failure";
    return PPF_ERR_OTHER;
  }
}

ppf_status null_arg(const char* what) {
  t_error = std::string("null argument: ") + what;
  return PPF_ERR_INPUT;
}

// Required-pointer check for status-returning entry points.
#define PPF_NEED(p) \
  if (!(p)) return null_arg(#p)

ppfit::FitConfig to_config(const ppf_fit_options* o) {
  ppfit::FitConfig c;
  c.tiles_per_side = o->tiles_per_side;
  c.dummy_mode = o->random_dummies ? ppfit::DummyMode::random : ppfit::DummyMode::systematic;
  c.alpha = o->alpha;
  c.path_length = o->path_length;
  c.lambda_ratio = o->lambda_ratio;
  c.folds = o->folds;
  c.seed = o->seed;
  c.squares = o->squares != 0;
  c.interactions = o->interactions != 0;
  c.include_benchmark = o->include_benchmark != 0;
  c.normalize_output = o->normalize_output != 0;
  c.bandwidth_kmax = o->bandwidth_kmax;
  c.tol = o->tol;
  c.max_outer = o->max_outer;
  return c;
}

void require_unique_name(const ppfit::CovariateStack& s, const std::string& name) {
  for (const auto& c : s.base)
    if (c.name == name) throw ppfit::config_error("duplicate covariate name '" + name + "'");
}

}  // namespace

extern "C" {

const char* ppf_version(void) { return ppfit::version(); }

const char* ppf_last_error(void) { return t_error.c_str(); }

void ppf_set_threads(int n) { ppfit::set_thread_count(n); }

int ppf_threads(void) { return ppfit::thread_count(); }

void ppf_set_warning_handler(ppf_warning_fn fn, void* user) {
  if (!fn) {
    ppfit::set_warning_handler(nullptr);
    return;
  }
  ppfit::set_warning_handler([fn, user](const std::string& m) { fn(m.c_str(), user); });
}

int ppf_format_double(double v, char* buf, int buflen) {
  if (!buf || buflen < 1) return -1;
  const std::string s = ppfit::format_double(v);
  if (static_cast<int>(s.size()) + 1 > buflen) return -1;
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return static_cast<int>(s.size());
}

/* ---- point patterns ---------------------------------------------------- */

ppf_status ppf_pattern_new(int n, const double* x, const double* y, const char* const* marks,
                           ppf_pattern** out) {
  PPF_NEED(out);
  if (n > 0) {
    PPF_NEED(x);
    PPF_NEED(y);
  }
  return guarded([&] {
    if (n < 0) throw ppfit::input_error("negative point count");
    ppfit::PointPattern p;
    p.points.reserve(n);
    for (int i = 0; i < n; ++i) p.points.push_back({x[i], y[i]});
    if (marks) {
      p.marks.reserve(n);
      for (int i = 0; i < n; ++i) {
        if (!marks[i]) throw ppfit::input_error("null mark label");
        p.marks.emplace_back(marks[i]);
      }
    }
    *out = new ppf_pattern{std::move(p)};
  });
}

ppf_status ppf_pattern_read_csv(const char* path, ppf_pattern** out) {
  PPF_NEED(path);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_pattern{ppfit::read_pattern_csv(path)}; });
}

ppf_status ppf_pattern_write_csv(const ppf_pattern* p, const char* path) {
  PPF_NEED(p);
  PPF_NEED(path);
  return guarded([&] { ppfit::write_pattern_csv(path, p->v); });
}

int ppf_pattern_size(const ppf_pattern* p) { return p ? p->v.size() : 0; }

double ppf_pattern_x(const ppf_pattern* p, int i) { return p ? p->v.points[i].x : 0; }

double ppf_pattern_y(const ppf_pattern* p, int i) { return p ? p->v.points[i].y : 0; }

const char* ppf_pattern_mark(const ppf_pattern* p, int i) {
  if (!p || !p->v.marked()) return nullptr;
  return p->v.marks[i].c_str();
}

ppf_status ppf_pattern_filter_mark(const ppf_pattern* p, const char* mark, ppf_pattern** out) {
  PPF_NEED(p);
  PPF_NEED(mark);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_pattern{p->v.filter_mark(mark)}; });
}

void ppf_pattern_free(ppf_pattern* p) { delete p; }

/* ---- segment patterns -------------------------------------------------- */

ppf_status ppf_segments_new(int n, const double* x1, const double* y1, const double* x2,
                            const double* y2, ppf_segments** out) {
  PPF_NEED(out);
  if (n > 0) {
    PPF_NEED(x1);
    PPF_NEED(y1);
    PPF_NEED(x2);
    PPF_NEED(y2);
  }
  return guarded([&] {
    if (n < 0) throw ppfit::input_error("negative segment count");
    ppfit::SegmentPattern s;
    s.segments.reserve(n);
    for (int i = 0; i < n; ++i) s.segments.push_back({{x1[i], y1[i]}, {x2[i], y2[i]}});
    *out = new ppf_segments{std::move(s)};
  });
}

ppf_status ppf_segments_read_csv(const char* path, ppf_segments** out) {
  PPF_NEED(path);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_segments{ppfit::read_segments_csv(path)}; });
}

int ppf_segments_size(const ppf_segments* s) { return s ? s->v.size() : 0; }

void ppf_segments_free(ppf_segments* s) { delete s; }

/* ---- observation windows ----------------------------------------------- */

ppf_status ppf_window_new(int n, const double* x, const double* y, ppf_window** out) {
  PPF_NEED(x);
  PPF_NEED(y);
  PPF_NEED(out);
  return guarded([&] {
    std::vector<ppfit::Point> b;
    b.reserve(n > 0 ? n : 0);
    for (int i = 0; i < n; ++i) b.push_back({x[i], y[i]});
    *out = new ppf_window{ppfit::Window(std::move(b))};
  });
}

ppf_status ppf_window_rectangle(double x0, double y0, double x1, double y1, ppf_window** out) {
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_window{ppfit::Window::rectangle(x0, y0, x1, y1)}; });
}

ppf_status ppf_window_read_csv(const char* path, ppf_window** out) {
  PPF_NEED(path);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_window{ppfit::read_window_csv(path)}; });
}

double ppf_window_area(const ppf_window* w) { return w ? w->v.area() : 0; }

int ppf_window_contains(const ppf_window* w, double x, double y) {
  return w && ppfit::contains(w->v, {x, y}) ? 1 : 0;
}

void ppf_window_bbox(const ppf_window* w, double* x0, double* y0, double* x1, double* y1) {
  if (!w) return;
  const ppfit::BBox& b = w->v.bbox();
  if (x0) *x0 = b.x0;
  if (y0) *y0 = b.y0;
  if (x1) *x1 = b.x1;
  if (y1) *y1 = b.y1;
}

void ppf_window_free(ppf_window* w) { delete w; }

/* ---- rasters ------------------------------------------------------------ */

ppf_status ppf_raster_new(double x0, double y0, double cell, int ncols, int nrows, double nodata,
                          double fill, ppf_raster** out) {
  PPF_NEED(out);
  return guarded([&] {
    if (!(cell > 0)) throw ppfit::input_error("cell size must be positive");
    if (ncols < 1 || nrows < 1) throw ppfit::input_error("raster needs at least one cell");
    ppfit::Raster r;
    r.x0 = x0;
    r.y0 = y0;
    r.cell = cell;
    r.ncols = ncols;
    r.nrows = nrows;
    r.nodata = nodata;
    r.values.assign(static_cast<std::size_t>(ncols) * nrows, fill);
    *out = new ppf_raster{std::move(r)};
  });
}

ppf_status ppf_rasterize(const ppf_window* w, double cell, ppf_raster** out) {
  PPF_NEED(w);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_raster{ppfit::rasterize(w->v, cell)}; });
}

ppf_status ppf_raster_read_asc(const char* path, ppf_raster** out) {
  PPF_NEED(path);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_raster{ppfit::read_raster_asc(path)}; });
}

ppf_status ppf_raster_write_asc(const ppf_raster* r, const char* path) {
  PPF_NEED(r);
  PPF_NEED(path);
  return guarded([&] { ppfit::write_raster_asc(path, r->v); });
}

int ppf_raster_ncols(const ppf_raster* r) { return r ? r->v.ncols : 0; }
int ppf_raster_nrows(const ppf_raster* r) { return r ? r->v.nrows : 0; }
double ppf_raster_cell(const ppf_raster* r) { return r ? r->v.cell : 0; }
double ppf_raster_x0(const ppf_raster* r) { return r ? r->v.x0 : 0; }
double ppf_raster_y0(const ppf_raster* r) { return r ? r->v.y0 : 0; }
double ppf_raster_nodata(const ppf_raster* r) { return r ? r->v.nodata : 0; }

double ppf_raster_value(const ppf_raster* r, int ix, int iy) { return r ? r->v.at(ix, iy) : 0; }

void ppf_raster_set(ppf_raster* r, int ix, int iy, double v) {
  if (r) r->v.at(ix, iy) = v;
}

int ppf_raster_count_defined(const ppf_raster* r) { return r ? r->v.count_defined() : 0; }

double ppf_raster_integral(const ppf_raster* r) { return r ? ppfit::raster_integral(r->v) : 0; }

void ppf_raster_free(ppf_raster* r) { delete r; }

/* ---- kernel smoothing --------------------------------------------------- */

ppf_status ppf_kernel_intensity(const ppf_pattern* p, const ppf_window* w, double h,
                                const ppf_raster* grid, ppf_raster** out) {
  PPF_NEED(p);
  PPF_NEED(w);
  PPF_NEED(grid);
  PPF_NEED(out);
  return guarded(
      [&] { *out = new ppf_raster{ppfit::kernel_intensity(p->v, w->v, {h}, grid->v)}; });
}

ppf_status ppf_pixel_density(const ppf_pattern* p, double h, const ppf_raster* grid,
                             ppf_raster** out) {
  PPF_NEED(p);
  PPF_NEED(grid);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_raster{ppfit::pixel_count_density(p->v, grid->v, {h})}; });
}

ppf_status ppf_segment_density(const ppf_segments* s, const ppf_window* w, double h,
                               const ppf_raster* grid, ppf_raster** out) {
  PPF_NEED(s);
  PPF_NEED(w);
  PPF_NEED(grid);
  PPF_NEED(out);
  return guarded(
      [&] { *out = new ppf_raster{ppfit::segment_density(s->v, w->v, {h}, grid->v)}; });
}

ppf_status ppf_distance_to_segments(const ppf_segments* s, const ppf_raster* grid,
                                    ppf_raster** out) {
  PPF_NEED(s);
  PPF_NEED(grid);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_raster{ppfit::distance_raster(s->v, grid->v)}; });
}

ppf_status ppf_distance_to_points(const ppf_pattern* p, const ppf_raster* grid,
                                  ppf_raster** out) {
  PPF_NEED(p);
  PPF_NEED(grid);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_raster{ppfit::distance_raster(p->v, grid->v)}; });
}

/* ---- bandwidth selection ------------------------------------------------ */

ppf_status ppf_bandwidth_points(const ppf_pattern* p, int k_max, uint64_t seed,
                                ppf_bandwidth** out) {
  PPF_NEED(p);
  PPF_NEED(out);
  return guarded([&] {
    *out = new ppf_bandwidth{ppfit::select_bandwidth(ppfit::coords_matrix(p->v), k_max, seed)};
  });
}

ppf_status ppf_bandwidth_lengths(const ppf_segments* s, int k_max, uint64_t seed,
                                 ppf_bandwidth** out) {
  PPF_NEED(s);
  PPF_NEED(out);
  return guarded([&] {
    *out = new ppf_bandwidth{ppfit::select_bandwidth(ppfit::lengths_matrix(s->v), k_max, seed)};
  });
}

double ppf_bandwidth_h(const ppf_bandwidth* b) { return b ? b->v.h : 0; }
int ppf_bandwidth_p0(const ppf_bandwidth* b) { return b ? b->v.P0 : 0; }
int ppf_bandwidth_kmax(const ppf_bandwidth* b) { return b ? b->v.K_max : 0; }
int ppf_bandwidth_singletons(const ppf_bandwidth* b) { return b ? b->v.singletons_excluded : 0; }

int ppf_bandwidth_kl_count(const ppf_bandwidth* b) {
  return b ? static_cast<int>(b->v.kl_values.size()) : 0;
}
double ppf_bandwidth_kl(const ppf_bandwidth* b, int i) { return b ? b->v.kl_values[i] : 0; }

int ppf_bandwidth_cluster_size(const ppf_bandwidth* b, int q) {
  return b ? b->v.cluster_sizes[q] : 0;
}
double ppf_bandwidth_sigma_sq(const ppf_bandwidth* b, int q) { return b ? b->v.sigma_sq[q] : 0; }
double ppf_bandwidth_weight(const ppf_bandwidth* b, int q) { return b ? b->v.weights[q] : 0; }

void ppf_bandwidth_free(ppf_bandwidth* b) { delete b; }

double ppf_default_segment_bandwidth(const ppf_window* w) {
  return w ? ppfit::default_segment_bandwidth(w->v) : 0;
}

/* ---- covariate stacks --------------------------------------------------- */

ppf_status ppf_stack_new(ppf_stack** out) {
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_stack{}; });
}

ppf_status ppf_stack_add_raster(ppf_stack* s, const char* name, const ppf_raster* r) {
  PPF_NEED(s);
  PPF_NEED(name);
  PPF_NEED(r);
  return guarded([&] {
    require_unique_name(s->v, name);
    ppfit::Covariate c;
    c.name = name;
    c.kind = ppfit::Covariate::Kind::raster;
    c.raster = r->v;
    s->v.base.push_back(std::move(c));
  });
}

ppf_status ppf_stack_add_raster_file(ppf_stack* s, const char* name, const char* path) {
  PPF_NEED(s);
  PPF_NEED(name);
  PPF_NEED(path);
  return guarded([&] {
    require_unique_name(s->v, name);
    ppfit::Covariate c;
    c.name = name;
    c.kind = ppfit::Covariate::Kind::raster;
    c.raster = ppfit::read_raster_asc(path);
    s->v.base.push_back(std::move(c));
  });
}

ppf_status ppf_stack_add_coordinate(ppf_stack* s, const char* name, int axis) {
  PPF_NEED(s);
  PPF_NEED(name);
  return guarded([&] {
    if (axis != 0 && axis != 1) throw ppfit::config_error("coordinate axis must be 0 or 1");
    require_unique_name(s->v, name);
    ppfit::Covariate c;
    c.name = name;
    c.kind = axis == 0 ? ppfit::Covariate::Kind::coord_x : ppfit::Covariate::Kind::coord_y;
    s->v.base.push_back(std::move(c));
  });
}

ppf_status ppf_stack_add_zones_files(ppf_stack* s, const char* name, const char* zones_path,
                                     const char* values_path, const ppf_raster* grid) {
  PPF_NEED(s);
  PPF_NEED(name);
  PPF_NEED(zones_path);
  PPF_NEED(values_path);
  PPF_NEED(grid);
  return guarded([&] {
    require_unique_name(s->v, name);
    const auto zones = ppfit::read_zones_csv(zones_path);
    auto values = ppfit::read_zone_values_csv(values_path);
    ppfit::Covariate c;
    c.name = name;
    c.kind = ppfit::Covariate::Kind::zone;
    std::vector<std::vector<ppfit::Point>> polys;
    for (const auto& [label, boundary] : zones) {
      const auto it = values.find(label);
      if (it == values.end())
        throw ppfit::input_error(std::string(values_path) + ": no value for zone '" + label +
                                 "'");
      c.zones.emplace_back(boundary);
      c.zone_values.push_back(it->second);
      polys.push_back(boundary);
      values.erase(it);
    }
    if (!values.empty())
      throw ppfit::input_error(std::string(values_path) + ": value for unknown zone '" +
                               values.begin()->first + "'");
    c.raster = ppfit::zone_raster(polys, c.zone_values, grid->v);
    s->v.base.push_back(std::move(c));
  });
}

int ppf_stack_size(const ppf_stack* s) { return s ? s->v.base_count() : 0; }

const char* ppf_stack_name(const ppf_stack* s, int i) {
  return s ? s->v.base[i].name.c_str() : nullptr;
}

ppf_status ppf_stack_rasterize(const ppf_stack* s, int i, const ppf_raster* grid,
                               ppf_raster** out) {
  PPF_NEED(s);
  PPF_NEED(grid);
  PPF_NEED(out);
  return guarded([&] {
    if (i < 0 || i >= s->v.base_count()) throw ppfit::input_error("covariate index out of range");
    ppfit::Raster r = grid->v.like(0.0);
    for (int iy = 0; iy < r.nrows; ++iy)
      for (int ix = 0; ix < r.ncols; ++ix) {
        if (r.is_nodata(ix, iy)) continue;
        const auto v =
            ppfit::try_eval_column(s->v, i, {r.center_x(ix), r.center_y(iy)});
        r.at(ix, iy) = v ? *v : r.nodata;
      }
    *out = new ppf_raster{std::move(r)};
  });
}

void ppf_stack_free(ppf_stack* s) { delete s; }

ppf_status ppf_benchmark(const ppf_pattern* p, const ppf_window* w, const ppf_raster* grid,
                         uint64_t seed, ppf_raster** out, double* h_out, int* p0_out) {
  PPF_NEED(p);
  PPF_NEED(w);
  PPF_NEED(grid);
  PPF_NEED(out);
  return guarded([&] {
    ppfit::BenchmarkResult r = ppfit::benchmark_covariate(p->v, w->v, grid->v, seed);
    if (h_out) *h_out = r.h;
    if (p0_out) *p0_out = r.P0;
    *out = new ppf_raster{std::move(r.raster)};
  });
}

/* ---- model fitting ------------------------------------------------------ */

void ppf_fit_options_init(ppf_fit_options* opts) {
  if (!opts) return;
  const ppfit::FitConfig d;
  opts->tiles_per_side = d.tiles_per_side;
  opts->random_dummies = d.dummy_mode == ppfit::DummyMode::random ? 1 : 0;
  opts->alpha = d.alpha;
  opts->path_length = d.path_length;
  opts->lambda_ratio = d.lambda_ratio;
  opts->folds = d.folds;
  opts->seed = d.seed;
  opts->squares = d.squares ? 1 : 0;
  opts->interactions = d.interactions ? 1 : 0;
  opts->include_benchmark = d.include_benchmark ? 1 : 0;
  opts->normalize_output = d.normalize_output ? 1 : 0;
  opts->bandwidth_kmax = d.bandwidth_kmax;
  opts->tol = d.tol;
  opts->max_outer = d.max_outer;
}

ppf_status ppf_fit_run(const ppf_pattern* p, const ppf_window* w, const ppf_stack* stack,
                       const ppf_raster* grid, const ppf_fit_options* opts, ppf_fit** out) {
  PPF_NEED(p);
  PPF_NEED(w);
  PPF_NEED(stack);
  PPF_NEED(grid);
  PPF_NEED(opts);
  PPF_NEED(out);
  return guarded([&] {
    auto* f = new ppf_fit{ppfit::run_fit(p->v, w->v, stack->v, grid->v, to_config(opts)), {}};
    f->names = f->v.stack.raw_names();
    *out = f;
  });
}

int ppf_fit_path_length(const ppf_fit* f) {
  return f ? static_cast<int>(f->v.path.lambdas.size()) : 0;
}
double ppf_fit_lambda(const ppf_fit* f, int t) { return f ? f->v.path.lambdas[t] : 0; }
int ppf_fit_nnz(const ppf_fit* f, int t) { return f ? f->v.path.nnz[t] : 0; }
double ppf_fit_train_deviance(const ppf_fit* f, int t) {
  return f ? f->v.path.train_deviance[t] : 0;
}
int ppf_fit_converged(const ppf_fit* f, int t) { return f ? f->v.path.converged[t] : 0; }
double ppf_fit_cv_mean(const ppf_fit* f, int t) { return f ? f->v.path.cv.mean[t] : 0; }
double ppf_fit_cv_se(const ppf_fit* f, int t) { return f ? f->v.path.cv.se[t] : 0; }
int ppf_fit_index_opt(const ppf_fit* f) { return f ? f->v.path.cv.index_opt : -1; }
int ppf_fit_index_1se(const ppf_fit* f) { return f ? f->v.path.cv.index_1se : -1; }
double ppf_fit_lambda_opt(const ppf_fit* f) { return f ? f->v.path.cv.lambda_opt : 0; }
double ppf_fit_lambda_1se(const ppf_fit* f) { return f ? f->v.path.cv.lambda_1se : 0; }

int ppf_fit_coef_count(const ppf_fit* f) { return f ? f->v.path.coefs.cols : 0; }
const char* ppf_fit_coef_name(const ppf_fit* f, int k) { return f ? f->names[k].c_str() : nullptr; }
double ppf_fit_intercept(const ppf_fit* f, int t) { return f ? f->v.path.beta0[t] : 0; }
double ppf_fit_coef(const ppf_fit* f, int t, int k) { return f ? f->v.path.coefs(t, k) : 0; }
int ppf_fit_design_count(const ppf_fit* f) { return f ? f->v.stack.design_count() : 0; }

int ppf_fit_n_events(const ppf_fit* f) { return f ? f->v.scheme.n_events : 0; }
int ppf_fit_n_dummies(const ppf_fit* f) { return f ? f->v.scheme.n_dummies : 0; }
double ppf_fit_tile_area(const ppf_fit* f) { return f ? f->v.scheme.tile_area : 0; }
int ppf_fit_has_benchmark(const ppf_fit* f) { return f && f->v.has_benchmark ? 1 : 0; }
double ppf_fit_benchmark_h(const ppf_fit* f) { return f ? f->v.benchmark_h : 0; }
int ppf_fit_benchmark_p0(const ppf_fit* f) { return f ? f->v.benchmark_p0 : 0; }

ppf_status ppf_fit_intensity(const ppf_fit* f, int use_1se, ppf_raster** out) {
  PPF_NEED(f);
  PPF_NEED(out);
  return guarded(
      [&] { *out = new ppf_raster{use_1se ? f->v.intensity_1se : f->v.intensity_opt}; });
}

void ppf_fit_free(ppf_fit* f) { delete f; }

/* ---- simulation and evaluation ------------------------------------------ */

ppf_status ppf_simulate_raster(const ppf_raster* intensity, const ppf_window* w, uint64_t seed,
                               ppf_pattern** out) {
  PPF_NEED(intensity);
  PPF_NEED(w);
  PPF_NEED(out);
  return guarded(
      [&] { *out = new ppf_pattern{ppfit::simulate_poisson(intensity->v, w->v, seed)}; });
}

ppf_status ppf_simulate_const(double rho, const ppf_window* w, uint64_t seed, ppf_pattern** out) {
  PPF_NEED(w);
  PPF_NEED(out);
  return guarded([&] {
    *out = new ppf_pattern{
        ppfit::simulate_poisson([rho](ppfit::Point) { return rho; }, rho, w->v, seed)};
  });
}

ppf_status ppf_undersample(const ppf_pattern* p, double fraction, uint64_t seed,
                           ppf_pattern** out) {
  PPF_NEED(p);
  PPF_NEED(out);
  return guarded([&] { *out = new ppf_pattern{ppfit::undersample(p->v, fraction, seed)}; });
}

ppf_status ppf_split(const ppf_pattern* p, double fraction, uint64_t seed, ppf_pattern** train,
                     ppf_pattern** test) {
  PPF_NEED(p);
  PPF_NEED(train);
  PPF_NEED(test);
  return guarded([&] {
    auto [a, b] = ppfit::split_train_test(p->v, fraction, seed);
    *train = new ppf_pattern{std::move(a)};
    *test = new ppf_pattern{std::move(b)};
  });
}

ppf_status ppf_stability_run(const ppf_pattern* p, const ppf_window* w, const ppf_stack* stack,
                             const ppf_raster* grid, const ppf_fit_options* opts, int replicates,
                             double fraction, uint64_t seed, int use_1se, int raw_scale,
                             ppf_stability** out) {
  PPF_NEED(p);
  PPF_NEED(w);
  PPF_NEED(stack);
  PPF_NEED(grid);
  PPF_NEED(opts);
  PPF_NEED(out);
  return guarded([&] {
    *out = new ppf_stability{ppfit::stability_eval(p->v, w->v, stack->v, grid->v,
                                                   to_config(opts), replicates, fraction, seed,
                                                   use_1se != 0, raw_scale != 0)};
  });
}

int ppf_stability_replicates(const ppf_stability* s) { return s ? s->v.replicates : 0; }
int ppf_stability_used(const ppf_stability* s) { return s ? s->v.used : 0; }
int ppf_stability_failures(const ppf_stability* s) { return s ? s->v.failures : 0; }
double ppf_stability_fraction(const ppf_stability* s) { return s ? s->v.fraction : 0; }
double ppf_stability_overall_mean(const ppf_stability* s) { return s ? s->v.overall_mean : 0; }
double ppf_stability_overall_sd(const ppf_stability* s) { return s ? s->v.overall_sd : 0; }

ppf_status ppf_stability_raster(const ppf_stability* s, int which, ppf_raster** out) {
  PPF_NEED(s);
  PPF_NEED(out);
  return guarded([&] {
    switch (which) {
      case PPF_STABILITY_MAE: *out = new ppf_raster{s->v.mae}; return;
      case PPF_STABILITY_Q05: *out = new ppf_raster{s->v.q05}; return;
      case PPF_STABILITY_Q95: *out = new ppf_raster{s->v.q95}; return;
      case PPF_STABILITY_REFERENCE: *out = new ppf_raster{s->v.reference}; return;
      default: throw ppfit::config_error("unknown stability raster selector");
    }
  });
}

void ppf_stability_free(ppf_stability* s) { delete s; }

} /* extern "C" */
