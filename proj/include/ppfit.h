#ifndef PPFIT_H
#define PPFIT_H

/* C API for the ppfit intensity-fitting library.
 *
 * Conventions:
 *   - Functions that can fail return ppf_status and write results through
 *     out-pointers. PPF_OK means every out-pointer was filled; on failure
 *     nothing is written and ppf_last_error() describes what went wrong.
 *   - Objects are opaque handles created by the library and released with
 *     the matching *_free(). Freeing NULL is a no-op. Handles returned
 *     through out-pointers are owned by the caller.
 *   - Plain-value accessors (sizes, doubles) do not report errors; indices
 *     must be in range. Passing NULL returns 0.
 *   - Strings returned as const char* are borrowed: valid until the handle
 *     they came from is modified or freed. Copy if you need them longer.
 *   - All computations are deterministic functions of their arguments,
 *     including the seed, and independent of the thread count.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ppf_status {
  PPF_OK = 0,
  PPF_ERR_OTHER = 1,   /* unexpected failure */
  PPF_ERR_INPUT = 2,   /* unreadable or invalid data */
  PPF_ERR_NUMERIC = 3, /* computation cannot proceed */
  PPF_ERR_CONFIG = 4   /* conflicting or out-of-range settings */
} ppf_status;

const char* ppf_version(void);

/* Message for the most recent failing call on this thread. */
const char* ppf_last_error(void);

/* Worker threads for the parallel sections; 0 means hardware concurrency.
 * Results never depend on this. */
void ppf_set_threads(int n);
int ppf_threads(void);

/* Non-fatal diagnostics (dropped columns, clamped exponents, ...).
 * NULL restores the default, which prints to stderr. */
typedef void (*ppf_warning_fn)(const char* message, void* user);
void ppf_set_warning_handler(ppf_warning_fn fn, void* user);

/* Shortest decimal text that parses back to exactly v. Returns the length
 * written (excluding the terminator), or -1 if the buffer is too small;
 * 32 bytes always suffice. */
int ppf_format_double(double v, char* buf, int buflen);

typedef struct ppf_pattern ppf_pattern;     /* planar points, optional marks */
typedef struct ppf_segments ppf_segments;   /* line segments */
typedef struct ppf_window ppf_window;       /* simple-polygon observation window */
typedef struct ppf_raster ppf_raster;       /* square-cell pixel grid */
typedef struct ppf_stack ppf_stack;         /* named covariate columns */
typedef struct ppf_bandwidth ppf_bandwidth; /* bandwidth selector report */
typedef struct ppf_fit ppf_fit;             /* fitted regularization path */
typedef struct ppf_stability ppf_stability; /* undersampling stability report */

/* ---- point patterns ---------------------------------------------------- */

/* marks may be NULL for an unmarked pattern; otherwise one label per point. */
ppf_status ppf_pattern_new(int n, const double* x, const double* y,
                           const char* const* marks, ppf_pattern** out);
ppf_status ppf_pattern_read_csv(const char* path, ppf_pattern** out);
ppf_status ppf_pattern_write_csv(const ppf_pattern* p, const char* path);
int ppf_pattern_size(const ppf_pattern* p);
double ppf_pattern_x(const ppf_pattern* p, int i);
double ppf_pattern_y(const ppf_pattern* p, int i);
/* NULL when the pattern is unmarked. */
const char* ppf_pattern_mark(const ppf_pattern* p, int i);
/* Points whose mark equals mark, order preserved. */
ppf_status ppf_pattern_filter_mark(const ppf_pattern* p, const char* mark, ppf_pattern** out);
void ppf_pattern_free(ppf_pattern* p);

/* ---- segment patterns -------------------------------------------------- */

ppf_status ppf_segments_new(int n, const double* x1, const double* y1, const double* x2,
                            const double* y2, ppf_segments** out);
ppf_status ppf_segments_read_csv(const char* path, ppf_segments** out);
int ppf_segments_size(const ppf_segments* s);
void ppf_segments_free(ppf_segments* s);

/* ---- observation windows ----------------------------------------------- */

/* Vertices in boundary order; the polygon must be simple with positive
 * area. Boundary points count as inside. */
ppf_status ppf_window_new(int n, const double* x, const double* y, ppf_window** out);
ppf_status ppf_window_rectangle(double x0, double y0, double x1, double y1, ppf_window** out);
ppf_status ppf_window_read_csv(const char* path, ppf_window** out);
double ppf_window_area(const ppf_window* w);
int ppf_window_contains(const ppf_window* w, double x, double y);
void ppf_window_bbox(const ppf_window* w, double* x0, double* y0, double* x1, double* y1);
void ppf_window_free(ppf_window* w);

/* ---- rasters ------------------------------------------------------------ */

ppf_status ppf_raster_new(double x0, double y0, double cell, int ncols, int nrows, double nodata,
                          double fill, ppf_raster** out);
/* Grid over the window's bounding box; cells whose center falls outside
 * the window carry the nodata sentinel. */
ppf_status ppf_rasterize(const ppf_window* w, double cell, ppf_raster** out);
ppf_status ppf_raster_read_asc(const char* path, ppf_raster** out);
ppf_status ppf_raster_write_asc(const ppf_raster* r, const char* path);
int ppf_raster_ncols(const ppf_raster* r);
int ppf_raster_nrows(const ppf_raster* r);
double ppf_raster_cell(const ppf_raster* r);
double ppf_raster_x0(const ppf_raster* r);
double ppf_raster_y0(const ppf_raster* r);
double ppf_raster_nodata(const ppf_raster* r);
/* Row 0 is the bottom row. */
double ppf_raster_value(const ppf_raster* r, int ix, int iy);
void ppf_raster_set(ppf_raster* r, int ix, int iy, double v);
int ppf_raster_count_defined(const ppf_raster* r);
/* Sum of value x cell area over defined cells. */
double ppf_raster_integral(const ppf_raster* r);
void ppf_raster_free(ppf_raster* r);

/* ---- kernel smoothing --------------------------------------------------- */

/* Edge-corrected Gaussian kernel intensity: integrates to the point count
 * over the window up to pixel rounding. */
ppf_status ppf_kernel_intensity(const ppf_pattern* p, const ppf_window* w, double h,
                                const ppf_raster* grid, ppf_raster** out);

/* Raw smoothed counts per unit area, no edge correction. */
ppf_status ppf_pixel_density(const ppf_pattern* p, double h, const ppf_raster* grid,
                             ppf_raster** out);

/* Length of line per unit area, kernel-smoothed. */
ppf_status ppf_segment_density(const ppf_segments* s, const ppf_window* w, double h,
                               const ppf_raster* grid, ppf_raster** out);

/* Per-cell distance from the cell center to the nearest segment / point. */
ppf_status ppf_distance_to_segments(const ppf_segments* s, const ppf_raster* grid,
                                    ppf_raster** out);
ppf_status ppf_distance_to_points(const ppf_pattern* p, const ppf_raster* grid, ppf_raster** out);

/* ---- bandwidth selection ------------------------------------------------ */

/* K-means/KL-index heuristic. Points mode clusters event coordinates;
 * lengths mode clusters segment lengths (the 1-d input mode). k_max is the
 * largest cluster count scanned and must be at least 2. */
ppf_status ppf_bandwidth_points(const ppf_pattern* p, int k_max, uint64_t seed,
                                ppf_bandwidth** out);
ppf_status ppf_bandwidth_lengths(const ppf_segments* s, int k_max, uint64_t seed,
                                 ppf_bandwidth** out);
double ppf_bandwidth_h(const ppf_bandwidth* b);
int ppf_bandwidth_p0(const ppf_bandwidth* b); /* selected cluster count */
int ppf_bandwidth_kmax(const ppf_bandwidth* b);
int ppf_bandwidth_singletons(const ppf_bandwidth* b);
/* KL index values for P = 2 .. k_max, in that order. */
int ppf_bandwidth_kl_count(const ppf_bandwidth* b);
double ppf_bandwidth_kl(const ppf_bandwidth* b, int i);
/* Per-cluster facts at P = P0; q in [0, p0). */
int ppf_bandwidth_cluster_size(const ppf_bandwidth* b, int q);
double ppf_bandwidth_sigma_sq(const ppf_bandwidth* b, int q);
double ppf_bandwidth_weight(const ppf_bandwidth* b, int q);
void ppf_bandwidth_free(ppf_bandwidth* b);

/* 0.1 x bounding-box diagonal: the fallback segment-density bandwidth. */
double ppf_default_segment_bandwidth(const ppf_window* w);

/* ---- covariate stacks --------------------------------------------------- */

ppf_status ppf_stack_new(ppf_stack** out);
/* All add_* calls copy their inputs; names must be unique within the stack. */
ppf_status ppf_stack_add_raster(ppf_stack* s, const char* name, const ppf_raster* r);
ppf_status ppf_stack_add_raster_file(ppf_stack* s, const char* name, const char* path);
/* axis 0 = x coordinate, 1 = y coordinate. */
ppf_status ppf_stack_add_coordinate(ppf_stack* s, const char* name, int axis);
/* Zone polygons (CSV zone,x,y) with one value per zone (CSV zone,value).
 * Inside a polygon the covariate is that zone's value exactly; elsewhere it
 * falls back to the rasterized form on grid. */
ppf_status ppf_stack_add_zones_files(ppf_stack* s, const char* name, const char* zones_path,
                                     const char* values_path, const ppf_raster* grid);
int ppf_stack_size(const ppf_stack* s);
const char* ppf_stack_name(const ppf_stack* s, int i);
/* Column i evaluated at every cell center of grid; undefined cells get
 * grid's nodata value. */
ppf_status ppf_stack_rasterize(const ppf_stack* s, int i, const ppf_raster* grid,
                               ppf_raster** out);
void ppf_stack_free(ppf_stack* s);

/* Edge-corrected kernel intensity of the pattern itself at the heuristic
 * bandwidth (the semi-parametric benchmark covariate). h_out and p0_out
 * may be NULL. */
ppf_status ppf_benchmark(const ppf_pattern* p, const ppf_window* w, const ppf_raster* grid,
                         uint64_t seed, ppf_raster** out, double* h_out, int* p0_out);

/* ---- model fitting ------------------------------------------------------ */

typedef struct ppf_fit_options {
  int tiles_per_side;    /* quadrature tiles per bbox side */
  int random_dummies;    /* 0 = tile centers, 1 = uniform draw per tile */
  double alpha;          /* elastic-net mix: 1 = lasso, 0 = ridge */
  int path_length;       /* number of lambda values */
  double lambda_ratio;   /* smallest/largest lambda; <= 0 picks the default */
  int folds;             /* cross-validation folds */
  uint64_t seed;
  int squares;           /* with interactions: include squared terms */
  int interactions;      /* expand pairwise products */
  int include_benchmark; /* add the kernel benchmark covariate */
  int normalize_output;  /* min-max scale predicted rasters to [0,1] */
  int bandwidth_kmax;    /* k-means scan limit for the benchmark bandwidth */
  double tol;            /* relative objective tolerance */
  int max_outer;         /* IRLS re-linearization cap */
} ppf_fit_options;

/* Fills opts with the defaults: 32 tiles, systematic dummies, alpha 0.95,
 * 100 lambdas, auto ratio, 10 folds, seed 1, no expansion, kmax 30,
 * tol 1e-7, max_outer 100. */
void ppf_fit_options_init(ppf_fit_options* opts);

/* End-to-end fit: quadrature, optional benchmark and interaction expansion,
 * standardization, lambda path with warm starts, K-fold CV, and predicted
 * intensity rasters at the two selected models. stack holds the unexpanded
 * base columns; grid carries the prediction geometry. */
ppf_status ppf_fit_run(const ppf_pattern* p, const ppf_window* w, const ppf_stack* stack,
                       const ppf_raster* grid, const ppf_fit_options* opts, ppf_fit** out);

int ppf_fit_path_length(const ppf_fit* f);
double ppf_fit_lambda(const ppf_fit* f, int t);
int ppf_fit_nnz(const ppf_fit* f, int t); /* non-intercept nonzeros */
double ppf_fit_train_deviance(const ppf_fit* f, int t);
int ppf_fit_converged(const ppf_fit* f, int t);
double ppf_fit_cv_mean(const ppf_fit* f, int t);
double ppf_fit_cv_se(const ppf_fit* f, int t);
int ppf_fit_index_opt(const ppf_fit* f);  /* minimum CV deviance */
int ppf_fit_index_1se(const ppf_fit* f);  /* sparsest within one SE */
double ppf_fit_lambda_opt(const ppf_fit* f);
double ppf_fit_lambda_1se(const ppf_fit* f);

/* Coefficients on the original covariate scale, one per expanded column. */
int ppf_fit_coef_count(const ppf_fit* f);
const char* ppf_fit_coef_name(const ppf_fit* f, int k);
double ppf_fit_intercept(const ppf_fit* f, int t);
double ppf_fit_coef(const ppf_fit* f, int t, int k);
int ppf_fit_design_count(const ppf_fit* f); /* columns kept after dropping constants */

int ppf_fit_n_events(const ppf_fit* f);
int ppf_fit_n_dummies(const ppf_fit* f);
double ppf_fit_tile_area(const ppf_fit* f);
int ppf_fit_has_benchmark(const ppf_fit* f);
double ppf_fit_benchmark_h(const ppf_fit* f);
int ppf_fit_benchmark_p0(const ppf_fit* f);

/* Predicted intensity at lambda_opt, or at lambda_1se when use_1se. */
ppf_status ppf_fit_intensity(const ppf_fit* f, int use_1se, ppf_raster** out);
void ppf_fit_free(ppf_fit* f);

/* ---- simulation and evaluation ------------------------------------------ */

/* Inhomogeneous Poisson samples by thinning. The raster form reads the
 * intensity off the grid with nodata as zero. */
ppf_status ppf_simulate_raster(const ppf_raster* intensity, const ppf_window* w, uint64_t seed,
                               ppf_pattern** out);
ppf_status ppf_simulate_const(double rho, const ppf_window* w, uint64_t seed, ppf_pattern** out);

/* Simple random sample of round(fraction x n) points, order preserved;
 * fraction 1 returns the input unchanged. */
ppf_status ppf_undersample(const ppf_pattern* p, double fraction, uint64_t seed,
                           ppf_pattern** out);
/* Disjoint train/test partition with train size round(fraction x n). */
ppf_status ppf_split(const ppf_pattern* p, double fraction, uint64_t seed, ppf_pattern** train,
                     ppf_pattern** test);

/* Reference fit on the full pattern, then `replicates` refits on independent
 * undersamples, each with full lambda re-selection; per-pixel absolute
 * deviation summaries against the reference. Predictions are min-max
 * normalized unless raw_scale; use_1se switches both sides to the sparse
 * model. */
ppf_status ppf_stability_run(const ppf_pattern* p, const ppf_window* w, const ppf_stack* stack,
                             const ppf_raster* grid, const ppf_fit_options* opts, int replicates,
                             double fraction, uint64_t seed, int use_1se, int raw_scale,
                             ppf_stability** out);

int ppf_stability_replicates(const ppf_stability* s); /* requested */
int ppf_stability_used(const ppf_stability* s);       /* successful refits */
int ppf_stability_failures(const ppf_stability* s);
double ppf_stability_fraction(const ppf_stability* s);
double ppf_stability_overall_mean(const ppf_stability* s);
double ppf_stability_overall_sd(const ppf_stability* s);

enum {
  PPF_STABILITY_MAE = 0,
  PPF_STABILITY_Q05 = 1,
  PPF_STABILITY_Q95 = 2,
  PPF_STABILITY_REFERENCE = 3
};
ppf_status ppf_stability_raster(const ppf_stability* s, int which, ppf_raster** out);
void ppf_stability_free(ppf_stability* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PPFIT_H */
