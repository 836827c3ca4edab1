// Command-line front end. Talks to the core exclusively through the C API in
// ppfit.h; JSON/CSV report writing lives here, raster and pattern files go
// through the library writers. Exit codes: 0 ok, 2 bad input data,
// 3 numerical failure, 4 configuration conflict, 1 anything else.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppfit.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct cli_error {
  int code;
  std::string message;
};

int exit_code(ppf_status st) {
  switch (st) {
    case PPF_OK: return 0;
    case PPF_ERR_INPUT: return 2;
    case PPF_ERR_NUMERIC: return 3;
    case PPF_ERR_CONFIG: return 4;
    default: return 1;
  }
}

void check(ppf_status st) {
  if (st != PPF_OK) throw cli_error{exit_code(st), ppf_last_error()};
}

[[noreturn]] void fail_config(const std::string& m) { throw cli_error{4, m}; }
[[noreturn]] void fail_input(const std::string& m) { throw cli_error{2, m}; }

// Owning wrapper for C API handles. out() releases any current handle first,
// so a guard can be reused as the target of consecutive calls.
template <typename T, void (*Free)(T*)>
class handle {
 public:
  handle() = default;
  ~handle() { Free(p_); }
  handle(const handle&) = delete;
  handle& operator=(const handle&) = delete;
  handle(handle&& o) noexcept : p_(std::exchange(o.p_, nullptr)) {}
  handle& operator=(handle&& o) noexcept {
    if (this != &o) {
      Free(p_);
      p_ = std::exchange(o.p_, nullptr);
    }
    return *this;
  }
  T** out() {
    Free(p_);
    p_ = nullptr;
    return &p_;
  }
  operator T*() const { return p_; }

 private:
  T* p_ = nullptr;
};

using pattern_h = handle<ppf_pattern, ppf_pattern_free>;
using segments_h = handle<ppf_segments, ppf_segments_free>;
using window_h = handle<ppf_window, ppf_window_free>;
using raster_h = handle<ppf_raster, ppf_raster_free>;
using stack_h = handle<ppf_stack, ppf_stack_free>;
using bandwidth_h = handle<ppf_bandwidth, ppf_bandwidth_free>;
using fit_h = handle<ppf_fit, ppf_fit_free>;
using stability_h = handle<ppf_stability, ppf_stability_free>;

std::string fmt(double v) {
  char buf[40];
  if (ppf_format_double(v, buf, sizeof buf) < 0) return "nan";
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw cli_error{1, "cannot write " + p.string()};
  f << s;
  f.flush();
  if (!f.good()) throw cli_error{1, "failed writing " + p.string()};
}

void write_json(const fs::path& p, const ordered_json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path ensure_dir(const std::string& out) {
  const fs::path d = out.empty() ? fs::path(".") : fs::path(out);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (!fs::is_directory(d)) throw cli_error{2, "cannot create output directory " + d.string()};
  return d;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

// key = value settings, # comments. Each line becomes a synthetic
// --key=value argument placed ahead of the real command line, so explicit
// flags override the file (every option takes the last value given).
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail_input("cannot open config file " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_config(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail_config(where + ": empty key");
    if (key == "config") fail_config(where + ": config files cannot include other config files");
    if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') && val.back() == val.front())
      val = val.substr(1, val.size() - 2);
    args.push_back("--" + key + "=" + val);
  }
  return args;
}

// Splices the contents of any --config file into the argument list, right
// after the subcommand name.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0].empty() || args[0][0] == '-') return args;
  std::vector<std::string> from_files;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    const auto expanded = config_args(path);
    from_files.insert(from_files.end(), expanded.begin(), expanded.end());
  }
  std::vector<std::string> out{args[0]};
  out.insert(out.end(), from_files.begin(), from_files.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

int parse_int(const std::string& s, const std::string& where) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail_config(where + ": expected an integer, got '" + s + "'");
  return v;
}

double parse_positive(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty() || !(v > 0))
    fail_config(where + ": expected a positive number, got '" + s + "'");
  return v;
}

/* ---- covariate manifests -------------------------------------------------
 * One covariate per line: `name kind [key=value ...]`. Blank lines and
 * everything after # are ignored. Paths are relative to the manifest. */

struct ManifestEntry {
  std::string name, kind;
  std::map<std::string, std::string> args;
  std::string where;
};

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
      return false;
  return true;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail_input("cannot open covariate manifest " + path);
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    ManifestEntry e;
    e.where = path + ":" + std::to_string(lineno);
    if (toks.size() < 2) fail_config(e.where + ": expected `name kind [key=value ...]`");
    e.name = toks[0];
    e.kind = toks[1];
    if (!valid_name(e.name))
      fail_config(e.where + ": covariate names use letters, digits, _ - . only");
    if (!seen.insert(e.name).second) fail_config(e.where + ": duplicate covariate '" + e.name + "'");
    for (std::size_t i = 2; i < toks.size(); ++i) {
      const auto eq = toks[i].find('=');
      if (eq == std::string::npos || eq == 0)
        fail_config(e.where + ": expected key=value, got '" + toks[i] + "'");
      if (!e.args.emplace(toks[i].substr(0, eq), toks[i].substr(eq + 1)).second)
        fail_config(e.where + ": duplicate key '" + toks[i].substr(0, eq) + "'");
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) fail_config(path + ": empty covariate manifest");
  return entries;
}

std::string need_arg(const ManifestEntry& e, const char* key) {
  const auto it = e.args.find(key);
  if (it == e.args.end()) fail_config(e.where + ": kind " + e.kind + " needs " + key + "=");
  return it->second;
}

void allow_args(const ManifestEntry& e, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : e.args) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) fail_config(e.where + ": unknown key '" + k + "' for kind " + e.kind);
  }
}

std::string resolve_path(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q.string() : (base / q).string();
}

// bandwidth= for the density kinds: absent or `auto` runs the k-means
// heuristic on the entry's own data, `default` takes 0.1 x window diagonal,
// a number fixes h directly.
struct BwChoice {
  double h = 0;
  std::string mode;
  int p0 = 0;
};

BwChoice choose_bandwidth(const ManifestEntry& e, ppf_window* win, int n,
                          const std::function<ppf_status(int, ppf_bandwidth**)>& heuristic) {
  std::string bw = "auto";
  if (const auto it = e.args.find("bandwidth"); it != e.args.end()) bw = it->second;
  BwChoice c;
  if (bw == "auto") {
    int kmax = std::min(30, n - 1);
    if (const auto it = e.args.find("kmax"); it != e.args.end())
      kmax = parse_int(it->second, e.where);
    bandwidth_h rep;
    check(heuristic(kmax, rep.out()));
    c.h = ppf_bandwidth_h(rep);
    c.mode = "auto";
    c.p0 = ppf_bandwidth_p0(rep);
  } else if (bw == "default") {
    c.h = ppf_default_segment_bandwidth(win);
    c.mode = "default";
  } else {
    c.h = parse_positive(bw, e.where + ": bandwidth");
    c.mode = "fixed";
  }
  return c;
}

struct StackBuild {
  stack_h stack;
  ordered_json entries = ordered_json::array();
  bool wants_benchmark = false;
};

// Turns manifest entries into base covariate columns. For a fit the
// benchmark entry only raises a flag (the fit computes it on its own grid
// and seed); the covariates command materializes it like everything else.
StackBuild build_stack(const std::vector<ManifestEntry>& entries, const fs::path& dir,
                       ppf_window* win, ppf_raster* grid, ppf_pattern* events,
                       std::uint64_t seed, bool for_fit) {
  StackBuild b;
  check(ppf_stack_new(b.stack.out()));
  for (const auto& e : entries) {
    ordered_json rep{{"name", e.name}, {"kind", e.kind}};
    if (e.kind == "raster") {
      allow_args(e, {"path"});
      const std::string p = need_arg(e, "path");
      check(ppf_stack_add_raster_file(b.stack, e.name.c_str(), resolve_path(dir, p).c_str()));
      rep["path"] = p;
      rep["columns"] = {e.name};
    } else if (e.kind == "zones") {
      allow_args(e, {"path", "values"});
      const std::string p = need_arg(e, "path");
      const std::string v = need_arg(e, "values");
      check(ppf_stack_add_zones_files(b.stack, e.name.c_str(), resolve_path(dir, p).c_str(),
                                      resolve_path(dir, v).c_str(), grid));
      rep["path"] = p;
      rep["values"] = v;
      rep["columns"] = {e.name};
    } else if (e.kind == "segments-density") {
      allow_args(e, {"path", "bandwidth", "kmax"});
      const std::string p = need_arg(e, "path");
      segments_h seg;
      check(ppf_segments_read_csv(resolve_path(dir, p).c_str(), seg.out()));
      const BwChoice c =
          choose_bandwidth(e, win, ppf_segments_size(seg), [&](int kmax, ppf_bandwidth** out) {
            return ppf_bandwidth_lengths(seg, kmax, seed, out);
          });
      raster_h r;
      check(ppf_segment_density(seg, win, c.h, grid, r.out()));
      check(ppf_stack_add_raster(b.stack, e.name.c_str(), r));
      rep["path"] = p;
      rep["bandwidth"] = c.h;
      rep["bandwidth_mode"] = c.mode;
      if (c.mode == "auto") rep["p0"] = c.p0;
      rep["columns"] = {e.name};
    } else if (e.kind == "segments-distance") {
      allow_args(e, {"path"});
      const std::string p = need_arg(e, "path");
      segments_h seg;
      check(ppf_segments_read_csv(resolve_path(dir, p).c_str(), seg.out()));
      raster_h r;
      check(ppf_distance_to_segments(seg, grid, r.out()));
      check(ppf_stack_add_raster(b.stack, e.name.c_str(), r));
      rep["path"] = p;
      rep["columns"] = {e.name};
    } else if (e.kind == "points-density") {
      allow_args(e, {"path", "bandwidth", "kmax"});
      const std::string p = need_arg(e, "path");
      pattern_h aux;
      check(ppf_pattern_read_csv(resolve_path(dir, p).c_str(), aux.out()));
      const BwChoice c =
          choose_bandwidth(e, win, ppf_pattern_size(aux), [&](int kmax, ppf_bandwidth** out) {
            return ppf_bandwidth_points(aux, kmax, seed, out);
          });
      raster_h r;
      check(ppf_pixel_density(aux, c.h, grid, r.out()));
      check(ppf_stack_add_raster(b.stack, e.name.c_str(), r));
      rep["path"] = p;
      rep["bandwidth"] = c.h;
      rep["bandwidth_mode"] = c.mode;
      if (c.mode == "auto") rep["p0"] = c.p0;
      rep["columns"] = {e.name};
    } else if (e.kind == "points-distance") {
      allow_args(e, {"path"});
      const std::string p = need_arg(e, "path");
      pattern_h aux;
      check(ppf_pattern_read_csv(resolve_path(dir, p).c_str(), aux.out()));
      raster_h r;
      check(ppf_distance_to_points(aux, grid, r.out()));
      check(ppf_stack_add_raster(b.stack, e.name.c_str(), r));
      rep["path"] = p;
      rep["columns"] = {e.name};
    } else if (e.kind == "coordinate") {
      allow_args(e, {"axis"});
      const auto it = e.args.find("axis");
      if (it == e.args.end()) {
        check(ppf_stack_add_coordinate(b.stack, (e.name + "_x").c_str(), 0));
        check(ppf_stack_add_coordinate(b.stack, (e.name + "_y").c_str(), 1));
        rep["columns"] = {e.name + "_x", e.name + "_y"};
      } else if (it->second == "x" || it->second == "y") {
        check(ppf_stack_add_coordinate(b.stack, e.name.c_str(), it->second == "x" ? 0 : 1));
        rep["axis"] = it->second;
        rep["columns"] = {e.name};
      } else {
        fail_config(e.where + ": axis must be x or y");
      }
    } else if (e.kind == "benchmark") {
      allow_args(e, {});
      b.wants_benchmark = true;
      if (for_fit) {
        rep["note"] = "computed by the fit";
      } else {
        if (!events) fail_config(e.where + ": benchmark needs --pattern");
        double h = 0;
        int p0 = 0;
        raster_h r;
        check(ppf_benchmark(events, win, grid, seed, r.out(), &h, &p0));
        check(ppf_stack_add_raster(b.stack, e.name.c_str(), r));
        rep["bandwidth"] = h;
        rep["p0"] = p0;
        rep["columns"] = {e.name};
      }
    } else {
      fail_config(e.where + ": unknown covariate kind '" + e.kind + "'");
    }
    b.entries.push_back(std::move(rep));
  }
  return b;
}

// Prediction grid: square cells sized so the longer bbox side spans `pixels`.
raster_h make_grid(ppf_window* win, int pixels) {
  if (pixels < 1) fail_config("grid must be at least 1 pixel");
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  ppf_window_bbox(win, &x0, &y0, &x1, &y1);
  raster_h g;
  check(ppf_rasterize(win, std::max(x1 - x0, y1 - y0) / pixels, g.out()));
  return g;
}

ordered_json tool_header(const char* command) {
  return ordered_json{{"tool", "ppfit"}, {"version", ppf_version()}, {"command", command}};
}

std::vector<double> sorted_defined(ppf_raster* r) {
  std::vector<double> v;
  const double nd = ppf_raster_nodata(r);
  for (int iy = 0; iy < ppf_raster_nrows(r); ++iy)
    for (int ix = 0; ix < ppf_raster_ncols(r); ++ix) {
      const double x = ppf_raster_value(r, ix, iy);
      if (x != nd) v.push_back(x);
    }
  std::sort(v.begin(), v.end());
  return v;
}

/* ---- fit and eval -------------------------------------------------------- */

struct FitCli {
  std::string pattern, window, manifest, out = ".", mark;
  std::string dummies = "systematic";
  int tiles = 32;
  double alpha = 0.95;
  int path_length = 100;
  double ratio = 0;
  int folds = 10;
  std::uint64_t seed = 1;
  int grid = 128;
  bool interactions = false, squares = false, benchmark = false, normalize = false;
  int kmax = 30;
  double tol = 1e-7;
  int max_outer = 100;
};

void add_fit_options(CLI::App* sub, FitCli& o, std::string& config, int& threads) {
  sub->add_option("--config", config, "key=value settings; command-line flags win");
  sub->add_option("--pattern", o.pattern, "event CSV with header x,y[,mark]")->required();
  sub->add_option("--window", o.window, "window polygon CSV")->required();
  sub->add_option("--covariates", o.manifest, "covariate manifest")->required();
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--mark", o.mark, "fit only events carrying this mark");
  sub->add_option("--tiles", o.tiles, "quadrature tiles per bounding-box side");
  sub->add_option("--dummies", o.dummies, "dummy placement")
      ->check(CLI::IsMember({"systematic", "random"}));
  sub->add_option("--alpha", o.alpha, "elastic-net mix, 1 = lasso");
  sub->add_option("--path-length", o.path_length, "number of lambda values");
  sub->add_option("--ratio", o.ratio, "lambda_min/lambda_max, 0 = auto");
  sub->add_option("--folds", o.folds, "cross-validation folds");
  sub->add_option("--seed", o.seed, "RNG seed")->envname("PPFIT_SEED");
  sub->add_option("--grid", o.grid, "prediction pixels along the longer bbox side");
  sub->add_flag("--interactions", o.interactions, "expand pairwise products");
  sub->add_flag("--squares", o.squares, "with --interactions, add squared terms");
  sub->add_flag("--benchmark", o.benchmark, "add the kernel benchmark covariate");
  sub->add_flag("--normalize", o.normalize, "min-max scale predicted rasters");
  sub->add_option("--kmax", o.kmax, "benchmark bandwidth scan limit");
  sub->add_option("--tol", o.tol, "solver tolerance");
  sub->add_option("--max-outer", o.max_outer, "solver iteration cap");
  sub->add_option("--threads", threads, "worker threads, 0 = auto");
}

ordered_json fit_config_json(const FitCli& o, bool benchmark) {
  return ordered_json{{"pattern", o.pattern},
                      {"window", o.window},
                      {"covariates", o.manifest},
                      {"out", o.out},
                      {"mark", o.mark},
                      {"tiles", o.tiles},
                      {"dummies", o.dummies},
                      {"alpha", o.alpha},
                      {"path_length", o.path_length},
                      {"ratio", o.ratio},
                      {"folds", o.folds},
                      {"seed", o.seed},
                      {"grid", o.grid},
                      {"interactions", o.interactions},
                      {"squares", o.squares},
                      {"benchmark", benchmark},
                      {"normalize", o.normalize},
                      {"kmax", o.kmax},
                      {"tol", o.tol},
                      {"max_outer", o.max_outer}};
}

struct FitInputs {
  pattern_h pattern;
  window_h window;
  raster_h grid;
  StackBuild stack;
  ppf_fit_options opts = {};
  bool benchmark = false;
};

FitInputs prepare_fit(const FitCli& o) {
  FitInputs in;
  check(ppf_pattern_read_csv(o.pattern.c_str(), in.pattern.out()));
  if (!o.mark.empty()) {
    pattern_h sub;
    check(ppf_pattern_filter_mark(in.pattern, o.mark.c_str(), sub.out()));
    in.pattern = std::move(sub);
  }
  check(ppf_window_read_csv(o.window.c_str(), in.window.out()));
  in.grid = make_grid(in.window, o.grid);
  in.stack = build_stack(read_manifest(o.manifest), fs::path(o.manifest).parent_path(), in.window,
                         in.grid, in.pattern, o.seed, /*for_fit=*/true);
  in.benchmark = o.benchmark || in.stack.wants_benchmark;

  ppf_fit_options_init(&in.opts);
  in.opts.tiles_per_side = o.tiles;
  in.opts.random_dummies = o.dummies == "random" ? 1 : 0;
  in.opts.alpha = o.alpha;
  in.opts.path_length = o.path_length;
  in.opts.lambda_ratio = o.ratio;
  in.opts.folds = o.folds;
  in.opts.seed = o.seed;
  in.opts.squares = o.squares ? 1 : 0;
  in.opts.interactions = o.interactions ? 1 : 0;
  in.opts.include_benchmark = in.benchmark ? 1 : 0;
  in.opts.normalize_output = o.normalize ? 1 : 0;
  in.opts.bandwidth_kmax = o.kmax;
  in.opts.tol = o.tol;
  in.opts.max_outer = o.max_outer;
  return in;
}

int cmd_fit(const FitCli& o) {
  FitInputs in = prepare_fit(o);
  fit_h fit;
  check(ppf_fit_run(in.pattern, in.window, in.stack.stack, in.grid, &in.opts, fit.out()));

  const fs::path dir = ensure_dir(o.out);
  raster_h r;
  check(ppf_fit_intensity(fit, 0, r.out()));
  check(ppf_raster_write_asc(r, (dir / "intensity_opt.asc").string().c_str()));
  check(ppf_fit_intensity(fit, 1, r.out()));
  check(ppf_raster_write_asc(r, (dir / "intensity_1se.asc").string().c_str()));

  const int T = ppf_fit_path_length(fit);
  const int K = ppf_fit_coef_count(fit);
  const int t_opt = ppf_fit_index_opt(fit);
  const int t_1se = ppf_fit_index_1se(fit);

  std::string csv = "term,opt,1se\n(intercept)," + fmt(ppf_fit_intercept(fit, t_opt)) + "," +
                    fmt(ppf_fit_intercept(fit, t_1se)) + "\n";
  for (int k = 0; k < K; ++k)
    csv += std::string(ppf_fit_coef_name(fit, k)) + "," + fmt(ppf_fit_coef(fit, t_opt, k)) + "," +
           fmt(ppf_fit_coef(fit, t_1se, k)) + "\n";
  write_text(dir / "coefficients.csv", csv);

  ordered_json j = tool_header("fit");
  j["config"] = fit_config_json(o, in.benchmark);
  j["covariates"] = in.stack.entries;
  j["data"] = ordered_json{{"n_events", ppf_fit_n_events(fit)},
                           {"n_dummies", ppf_fit_n_dummies(fit)},
                           {"tile_area", ppf_fit_tile_area(fit)},
                           {"window_area", ppf_window_area(in.window)},
                           {"columns_raw", K},
                           {"columns_kept", ppf_fit_design_count(fit)}};
  if (ppf_fit_has_benchmark(fit))
    j["benchmark"] =
        ordered_json{{"h", ppf_fit_benchmark_h(fit)}, {"p0", ppf_fit_benchmark_p0(fit)}};
  ordered_json path = ordered_json::array();
  for (int t = 0; t < T; ++t)
    path.push_back(ordered_json{{"lambda", ppf_fit_lambda(fit, t)},
                                {"nnz", ppf_fit_nnz(fit, t)},
                                {"deviance", ppf_fit_train_deviance(fit, t)},
                                {"converged", ppf_fit_converged(fit, t) != 0},
                                {"cv_mean", ppf_fit_cv_mean(fit, t)},
                                {"cv_se", ppf_fit_cv_se(fit, t)}});
  j["path"] = std::move(path);
  j["selection"] = ordered_json{{"index_opt", t_opt},
                                {"lambda_opt", ppf_fit_lambda_opt(fit)},
                                {"nnz_opt", ppf_fit_nnz(fit, t_opt)},
                                {"index_1se", t_1se},
                                {"lambda_1se", ppf_fit_lambda_1se(fit)},
                                {"nnz_1se", ppf_fit_nnz(fit, t_1se)}};
  j["files"] = ordered_json{{"coefficients", "coefficients.csv"},
                            {"intensity_opt", "intensity_opt.asc"},
                            {"intensity_1se", "intensity_1se.asc"}};
  write_json(dir / "fit.json", j);
  std::printf("fit: %d events, lambda_opt=%s (%d terms), lambda_1se=%s (%d terms)\n",
              ppf_fit_n_events(fit), fmt(ppf_fit_lambda_opt(fit)).c_str(),
              ppf_fit_nnz(fit, t_opt), fmt(ppf_fit_lambda_1se(fit)).c_str(),
              ppf_fit_nnz(fit, t_1se));
  std::printf("wrote %s\n", (dir / "fit.json").string().c_str());
  return 0;
}

struct EvalCli {
  int replicates = 20;
  double fraction = 0.7;
  bool use_1se = false, raw_scale = false;
};

int cmd_eval(const FitCli& o, const EvalCli& e) {
  FitInputs in = prepare_fit(o);
  stability_h st;
  check(ppf_stability_run(in.pattern, in.window, in.stack.stack, in.grid, &in.opts, e.replicates,
                          e.fraction, o.seed, e.use_1se ? 1 : 0, e.raw_scale ? 1 : 0, st.out()));

  const fs::path dir = ensure_dir(o.out);
  const std::pair<int, const char*> rasters[] = {{PPF_STABILITY_MAE, "mae.asc"},
                                                 {PPF_STABILITY_Q05, "q05.asc"},
                                                 {PPF_STABILITY_Q95, "q95.asc"},
                                                 {PPF_STABILITY_REFERENCE, "reference.asc"}};
  for (const auto& [which, name] : rasters) {
    raster_h r;
    check(ppf_stability_raster(st, which, r.out()));
    check(ppf_raster_write_asc(r, (dir / name).string().c_str()));
  }

  // Per-pixel deviation profiles: each column independently sorted ascending,
  // the form the stability curves are plotted in.
  raster_h mae, q05, q95;
  check(ppf_stability_raster(st, PPF_STABILITY_MAE, mae.out()));
  check(ppf_stability_raster(st, PPF_STABILITY_Q05, q05.out()));
  check(ppf_stability_raster(st, PPF_STABILITY_Q95, q95.out()));
  const auto vm = sorted_defined(mae), v5 = sorted_defined(q05), v9 = sorted_defined(q95);
  if (vm.size() != v5.size() || vm.size() != v9.size())
    throw cli_error{1, "stability rasters disagree on defined cells"};
  std::string csv = "rank,mae,q05,q95\n";
  for (std::size_t i = 0; i < vm.size(); ++i)
    csv += std::to_string(i + 1) + "," + fmt(vm[i]) + "," + fmt(v5[i]) + "," + fmt(v9[i]) + "\n";
  write_text(dir / "profile.csv", csv);

  ordered_json j = tool_header("eval");
  j["config"] = fit_config_json(o, in.benchmark);
  j["config"]["replicates"] = e.replicates;
  j["config"]["fraction"] = e.fraction;
  j["config"]["use_1se"] = e.use_1se;
  j["config"]["raw_scale"] = e.raw_scale;
  j["covariates"] = in.stack.entries;
  j["results"] = ordered_json{{"replicates", ppf_stability_replicates(st)},
                              {"used", ppf_stability_used(st)},
                              {"failures", ppf_stability_failures(st)},
                              {"fraction", ppf_stability_fraction(st)},
                              {"overall_mean", ppf_stability_overall_mean(st)},
                              {"overall_sd", ppf_stability_overall_sd(st)}};
  j["files"] = ordered_json{{"mae", "mae.asc"},
                            {"q05", "q05.asc"},
                            {"q95", "q95.asc"},
                            {"reference", "reference.asc"},
                            {"profile", "profile.csv"}};
  write_json(dir / "stability.json", j);
  std::printf("eval: %d/%d replicates, overall mean deviation %s\n", ppf_stability_used(st),
              ppf_stability_replicates(st), fmt(ppf_stability_overall_mean(st)).c_str());
  std::printf("wrote %s\n", (dir / "stability.json").string().c_str());
  return 0;
}

/* ---- the small commands -------------------------------------------------- */

struct BandwidthCli {
  std::string pattern, segments, out = ".";
  int kmax = 30;
  std::uint64_t seed = 1;
};

int cmd_bandwidth(const BandwidthCli& o) {
  if (o.pattern.empty() == o.segments.empty())
    fail_config("give exactly one of --pattern or --segments");
  bandwidth_h rep;
  std::string mode;
  int kmax_used = 0;
  if (!o.pattern.empty()) {
    pattern_h pat;
    check(ppf_pattern_read_csv(o.pattern.c_str(), pat.out()));
    kmax_used = std::min(o.kmax, ppf_pattern_size(pat) - 1);
    mode = "points";
    check(ppf_bandwidth_points(pat, kmax_used, o.seed, rep.out()));
  } else {
    segments_h seg;
    check(ppf_segments_read_csv(o.segments.c_str(), seg.out()));
    kmax_used = std::min(o.kmax, ppf_segments_size(seg) - 1);
    mode = "lengths";
    check(ppf_bandwidth_lengths(seg, kmax_used, o.seed, rep.out()));
  }

  ordered_json j = tool_header("bandwidth");
  j["config"] = ordered_json{{"pattern", o.pattern}, {"segments", o.segments}, {"mode", mode},
                             {"kmax", o.kmax},       {"kmax_used", kmax_used}, {"seed", o.seed},
                             {"out", o.out}};
  j["h"] = ppf_bandwidth_h(rep);
  j["p0"] = ppf_bandwidth_p0(rep);
  j["singletons_excluded"] = ppf_bandwidth_singletons(rep);
  ordered_json kl = ordered_json::array();
  for (int i = 0; i < ppf_bandwidth_kl_count(rep); ++i)
    kl.push_back(ordered_json{{"p", i + 2}, {"value", ppf_bandwidth_kl(rep, i)}});
  j["kl"] = std::move(kl);
  ordered_json clusters = ordered_json::array();
  for (int q = 0; q < ppf_bandwidth_p0(rep); ++q)
    clusters.push_back(ordered_json{{"size", ppf_bandwidth_cluster_size(rep, q)},
                                    {"sigma_sq", ppf_bandwidth_sigma_sq(rep, q)},
                                    {"weight", ppf_bandwidth_weight(rep, q)}});
  j["clusters"] = std::move(clusters);

  const fs::path dir = ensure_dir(o.out);
  write_json(dir / "bandwidth.json", j);
  std::printf("bandwidth: h=%s at P0=%d\n", fmt(ppf_bandwidth_h(rep)).c_str(),
              ppf_bandwidth_p0(rep));
  std::printf("wrote %s\n", (dir / "bandwidth.json").string().c_str());
  return 0;
}

struct CovariatesCli {
  std::string manifest, window, pattern, out = ".";
  int grid = 128;
  std::uint64_t seed = 1;
};

int cmd_covariates(const CovariatesCli& o) {
  window_h win;
  check(ppf_window_read_csv(o.window.c_str(), win.out()));
  raster_h grid = make_grid(win, o.grid);
  pattern_h pat;
  if (!o.pattern.empty()) check(ppf_pattern_read_csv(o.pattern.c_str(), pat.out()));
  StackBuild sb = build_stack(read_manifest(o.manifest), fs::path(o.manifest).parent_path(), win,
                              grid, pat, o.seed, /*for_fit=*/false);

  const fs::path dir = ensure_dir(o.out);
  for (int i = 0; i < ppf_stack_size(sb.stack); ++i) {
    const std::string name = ppf_stack_name(sb.stack, i);
    raster_h r;
    check(ppf_stack_rasterize(sb.stack, i, grid, r.out()));
    check(ppf_raster_write_asc(r, (dir / (name + ".asc")).string().c_str()));
  }
  for (auto& e : sb.entries)
    if (e.contains("columns")) {
      ordered_json files = ordered_json::array();
      for (const auto& c : e["columns"]) files.push_back(c.get<std::string>() + ".asc");
      e["files"] = std::move(files);
    }

  ordered_json j = tool_header("covariates");
  j["config"] = ordered_json{{"manifest", o.manifest}, {"window", o.window},
                             {"pattern", o.pattern},   {"grid", o.grid},
                             {"seed", o.seed},         {"out", o.out}};
  j["covariates"] = sb.entries;
  write_json(dir / "covariates.json", j);
  std::printf("covariates: wrote %d rasters to %s\n", ppf_stack_size(sb.stack),
              dir.string().c_str());
  return 0;
}

struct SimulateCli {
  std::string window, intensity, out = ".";
  double rho = -1;
  bool rho_given = false;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateCli& o) {
  if (o.rho_given == !o.intensity.empty())
    fail_config("give exactly one of --rho-const or --intensity");
  window_h win;
  check(ppf_window_read_csv(o.window.c_str(), win.out()));
  pattern_h pat;
  if (o.rho_given) {
    check(ppf_simulate_const(o.rho, win, o.seed, pat.out()));
  } else {
    raster_h rho;
    check(ppf_raster_read_asc(o.intensity.c_str(), rho.out()));
    check(ppf_simulate_raster(rho, win, o.seed, pat.out()));
  }

  const fs::path dir = ensure_dir(o.out);
  check(ppf_pattern_write_csv(pat, (dir / "pattern.csv").string().c_str()));
  ordered_json j = tool_header("simulate");
  j["config"] = ordered_json{{"window", o.window},
                             {"mode", o.rho_given ? "const" : "raster"},
                             {"seed", o.seed},
                             {"out", o.out}};
  if (o.rho_given)
    j["config"]["rho"] = o.rho;
  else
    j["config"]["intensity"] = o.intensity;
  j["n_points"] = ppf_pattern_size(pat);
  j["files"] = ordered_json{{"pattern", "pattern.csv"}};
  write_json(dir / "simulate.json", j);
  std::printf("simulate: %d points\n", ppf_pattern_size(pat));
  std::printf("wrote %s\n", (dir / "pattern.csv").string().c_str());
  return 0;
}

struct SplitCli {
  std::string pattern, out = ".";
  double fraction = 0.7;
  std::uint64_t seed = 1;
};

int cmd_split(const SplitCli& o) {
  pattern_h pat;
  check(ppf_pattern_read_csv(o.pattern.c_str(), pat.out()));
  pattern_h train, test;
  check(ppf_split(pat, o.fraction, o.seed, train.out(), test.out()));
  const fs::path dir = ensure_dir(o.out);
  check(ppf_pattern_write_csv(train, (dir / "train.csv").string().c_str()));
  check(ppf_pattern_write_csv(test, (dir / "test.csv").string().c_str()));
  ordered_json j = tool_header("split");
  j["config"] = ordered_json{
      {"pattern", o.pattern}, {"fraction", o.fraction}, {"seed", o.seed}, {"out", o.out}};
  j["n_train"] = ppf_pattern_size(train);
  j["n_test"] = ppf_pattern_size(test);
  j["files"] = ordered_json{{"train", "train.csv"}, {"test", "test.csv"}};
  write_json(dir / "split.json", j);
  std::printf("split: %d train, %d test\n", ppf_pattern_size(train), ppf_pattern_size(test));
  return 0;
}

void add_common(CLI::App* sub, std::string& config, std::uint64_t& seed, std::string& out,
                int& threads) {
  sub->add_option("--config", config, "key=value settings; command-line flags win");
  sub->add_option("--seed", seed, "RNG seed")->envname("PPFIT_SEED");
  sub->add_option("--out", out, "output directory");
  sub->add_option("--threads", threads, "worker threads, 0 = auto");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intensity fitting for planar point patterns"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ppf_version());

  int threads = 0;
  std::string config;

  FitCli fit_o;
  CLI::App* fit = app.add_subcommand("fit", "fit a penalized intensity model");
  add_fit_options(fit, fit_o, config, threads);

  FitCli eval_fit_o;
  EvalCli eval_o;
  CLI::App* eval = app.add_subcommand("eval", "undersampling stability evaluation");
  add_fit_options(eval, eval_fit_o, config, threads);
  eval->add_option("--replicates", eval_o.replicates, "undersampled refits");
  eval->add_option("--fraction", eval_o.fraction, "events kept per replicate");
  eval->add_flag("--use-1se", eval_o.use_1se, "compare the sparse models");
  eval->add_flag("--raw-scale", eval_o.raw_scale, "skip min-max normalization");

  BandwidthCli bw_o;
  CLI::App* bw = app.add_subcommand("bandwidth", "k-means/KL heuristic bandwidth");
  bw->add_option("--pattern", bw_o.pattern, "point CSV (clusters coordinates)");
  bw->add_option("--segments", bw_o.segments, "segment CSV (clusters lengths)");
  bw->add_option("--kmax", bw_o.kmax, "largest cluster count scanned");
  add_common(bw, config, bw_o.seed, bw_o.out, threads);

  CovariatesCli cov_o;
  CLI::App* cov = app.add_subcommand("covariates", "materialize covariate rasters");
  cov->add_option("--manifest", cov_o.manifest, "covariate manifest")->required();
  cov->add_option("--window", cov_o.window, "window polygon CSV")->required();
  cov->add_option("--pattern", cov_o.pattern, "event CSV, needed for benchmark entries");
  cov->add_option("--grid", cov_o.grid, "pixels along the longer bbox side");
  add_common(cov, config, cov_o.seed, cov_o.out, threads);

  SimulateCli sim_o;
  CLI::App* sim = app.add_subcommand("simulate", "sample an inhomogeneous Poisson pattern");
  sim->add_option("--window", sim_o.window, "window polygon CSV")->required();
  CLI::Option* rho_opt = sim->add_option("--rho-const", sim_o.rho, "constant intensity");
  sim->add_option("--intensity", sim_o.intensity, "intensity raster (.asc)");
  add_common(sim, config, sim_o.seed, sim_o.out, threads);

  SplitCli split_o;
  CLI::App* split = app.add_subcommand("split", "train/test partition of a pattern");
  split->add_option("--pattern", split_o.pattern, "point CSV")->required();
  split->add_option("--fraction", split_o.fraction, "train share");
  add_common(split, config, split_o.seed, split_o.out, threads);

  // Config-file values arrive as earlier synthetic arguments; the last value
  // of an option wins, which is exactly "flags beat the file".
  for (CLI::App* s : {fit, eval, bw, cov, sim, split})
    for (CLI::Option* opt : s->get_options())
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    std::vector<std::string> args;
    try {
      args = expand_config(argc, argv);
      std::reverse(args.begin(), args.end());
      app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : 4;
    }

    ppf_set_threads(threads);
    sim_o.rho_given = rho_opt->count() > 0;
    if (app.got_subcommand(fit)) return cmd_fit(fit_o);
    if (app.got_subcommand(eval)) return cmd_eval(eval_fit_o, eval_o);
    if (app.got_subcommand(bw)) return cmd_bandwidth(bw_o);
    if (app.got_subcommand(cov)) return cmd_covariates(cov_o);
    if (app.got_subcommand(sim)) return cmd_simulate(sim_o);
    if (app.got_subcommand(split)) return cmd_split(split_o);
  } catch (const cli_error& e) {
    std::fprintf(stderr, "ppfit: error: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ppfit: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
