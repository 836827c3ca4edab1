#include "ppfit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ppfit/errors.hpp"
#include "ppfit/io.hpp"
#include "ppfit/rng.hpp"

namespace ppfit {

namespace {

double clamp_eta(double eta) { return std::clamp(eta, -700.0, 700.0); }

// One deviance term, 2 w [ y log(y/μ) − (y − μ) ] with 0·log0 = 0.
double dev_term(double w, double y, double mu) {
  if (!(mu > 0)) throw numeric_error("deviance: fitted intensity must be positive");
  const double ylog = y > 0 ? y * std::log(y / mu) : 0.0;
  return 2.0 * w * (ylog - (y - mu));
}

}  // namespace

QuadratureScheme build_grid_scheme(const PointPattern& x, const Window& w, int tiles_per_side,
                                   DummyMode mode, std::uint64_t seed) {
  if (tiles_per_side < 1) throw input_error("tiles_per_side must be at least 1");
  const BBox& bb = w.bbox();
  const int T = tiles_per_side;
  const double tx = bb.width() / T;
  const double ty = bb.height() / T;

  // A tile is in-window iff its center is; Δ = |W| / #in-window tiles keeps
  // the weights summing to the area exactly.
  std::vector<char> in_window(static_cast<std::size_t>(T) * T, 0);
  std::vector<int> tile_index(static_cast<std::size_t>(T) * T, -1);
  int n_tiles = 0;
  for (int iy = 0; iy < T; ++iy) {
    for (int ix = 0; ix < T; ++ix) {
      const Point c{bb.x0 + (ix + 0.5) * tx, bb.y0 + (iy + 0.5) * ty};
      if (contains(w, c)) {
        in_window[static_cast<std::size_t>(iy) * T + ix] = 1;
        tile_index[static_cast<std::size_t>(iy) * T + ix] = n_tiles++;
      }
    }
  }
  if (n_tiles == 0) throw input_error("no tile center falls inside the window");

  auto tile_of = [&](Point p) -> int {
    int ix = std::clamp(static_cast<int>((p.x - bb.x0) / tx), 0, T - 1);
    int iy = std::clamp(static_cast<int>((p.y - bb.y0) / ty), 0, T - 1);
    if (in_window[static_cast<std::size_t>(iy) * T + ix]) {
      return tile_index[static_cast<std::size_t>(iy) * T + ix];
    }
    // Edge digitization: attach to the nearest in-window tile center.
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int jy = 0; jy < T; ++jy) {
      for (int jx = 0; jx < T; ++jx) {
        if (!in_window[static_cast<std::size_t>(jy) * T + jx]) continue;
        const Point c{bb.x0 + (jx + 0.5) * tx, bb.y0 + (jy + 0.5) * ty};
        const double d = squared_dist(p, c);
        if (d < best_d) {
          best_d = d;
          best = tile_index[static_cast<std::size_t>(jy) * T + jx];
        }
      }
    }
    return best;
  };

  QuadratureScheme q;
  q.tiles_per_side = T;
  q.window_area = w.area();
  q.tile_area = q.window_area / n_tiles;
  q.n_events = x.size();
  q.n_dummies = n_tiles;

  std::vector<int> tile_of_row;
  tile_of_row.reserve(x.size() + n_tiles);
  for (const Point& p : x.points) {
    if (!contains(w, p)) throw input_error("pattern point outside the window");
    q.points.push_back(p);
    q.is_event.push_back(1);
    tile_of_row.push_back(tile_of(p));
  }

  Rng rng(Rng::mix(seed, 0x71a0));
  for (int iy = 0; iy < T; ++iy) {
    for (int ix = 0; ix < T; ++ix) {
      if (!in_window[static_cast<std::size_t>(iy) * T + ix]) continue;
      const double lx = bb.x0 + ix * tx;
      const double ly = bb.y0 + iy * ty;
      Point d{lx + 0.5 * tx, ly + 0.5 * ty};
      if (mode == DummyMode::random) {
        bool placed = false;
        for (int attempt = 0; attempt < 100; ++attempt) {
          Point c{lx + rng.uniform() * tx, ly + rng.uniform() * ty};
          if (contains(w, c)) {
            d = c;
            placed = true;
            break;
          }
        }
        if (!placed) {
          // Deepest in-window point of a subgrid over the tile.
          double best_depth = -1;
          for (int sy = 0; sy < 8; ++sy) {
            for (int sx = 0; sx < 8; ++sx) {
              const Point c{lx + (sx + 0.5) * tx / 8, ly + (sy + 0.5) * ty / 8};
              if (!contains(w, c)) continue;
              const double depth = dist_point_boundary(w, c);
              if (depth > best_depth) {
                best_depth = depth;
                d = c;
              }
            }
          }
        }
      }
      q.points.push_back(d);
      q.is_event.push_back(0);
      tile_of_row.push_back(tile_index[static_cast<std::size_t>(iy) * T + ix]);
    }
  }

  std::vector<int> per_tile(n_tiles, 0);
  for (int t : tile_of_row) ++per_tile[t];
  const int m = static_cast<int>(q.points.size());
  q.counts.resize(m);
  q.weights.resize(m);
  q.responses.resize(m);
  for (int j = 0; j < m; ++j) {
    q.counts[j] = per_tile[tile_of_row[j]];
    q.weights[j] = q.tile_area / q.counts[j];
    q.responses[j] = q.is_event[j] ? q.is_event[j] / q.weights[j] : 0.0;
  }
  return q;
}

std::vector<double> linear_predictor(const Matrix& Z, double beta0,
                                     const std::vector<double>& beta) {
  if (static_cast<int>(beta.size()) != Z.cols) {
    throw config_error("coefficient length does not match design columns");
  }
  std::vector<double> eta(Z.rows);
  bool clamped = false;
  for (int j = 0; j < Z.rows; ++j) {
    const double* z = Z.row(j);
    double acc = beta0;
    for (int k = 0; k < Z.cols; ++k) acc += z[k] * beta[k];
    eta[j] = clamp_eta(acc);
    clamped = clamped || eta[j] != acc;
  }
  if (clamped) warn("linear predictor clamped to ±700 to avoid overflow");
  return eta;
}

double loglik(const QuadratureScheme& q, const Matrix& Z, double beta0,
              const std::vector<double>& beta) {
  if (Z.rows != q.size()) throw config_error("design rows do not match quadrature size");
  const std::vector<double> eta = linear_predictor(Z, beta0, beta);
  double acc = 0;
  for (int j = 0; j < q.size(); ++j) {
    acc += q.weights[j] * (q.responses[j] * eta[j] - std::exp(eta[j]));
  }
  return acc;
}

double deviance(const QuadratureScheme& q, const std::vector<double>& mu) {
  if (static_cast<int>(mu.size()) != q.size()) {
    throw config_error("mu length does not match quadrature size");
  }
  double acc = 0;
  for (int j = 0; j < q.size(); ++j) acc += dev_term(q.weights[j], q.responses[j], mu[j]);
  return acc;
}

double deviance_rows(const QuadratureScheme& q, const std::vector<double>& mu,
                     const std::vector<int>& rows) {
  if (mu.size() != rows.size()) throw config_error("mu length does not match row subset");
  double acc = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int j = rows[i];
    acc += dev_term(q.weights[j], q.responses[j], mu[i]);
  }
  return acc;
}

void write_scheme_csv(const std::string& path, const QuadratureScheme& q) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << "x,y,a,w,y_resp\n";
  for (int j = 0; j < q.size(); ++j) {
    out << format_double(q.points[j].x) << ',' << format_double(q.points[j].y) << ','
        << q.is_event[j] << ',' << format_double(q.weights[j]) << ','
        << format_double(q.responses[j]) << '\n';
  }
}

}  // namespace ppfit
