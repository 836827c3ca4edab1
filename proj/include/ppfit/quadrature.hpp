#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppfit/geometry.hpp"
#include "ppfit/matrix.hpp"

namespace ppfit {

enum class DummyMode { systematic, random };

// Grid-based quadrature scheme: events plus one dummy per in-window tile.
// Row j carries the point s_j, the event indicator a_j, the weight
// w_j = tile_area / counts_j, and the response y_j = a_j / w_j.
// Events come first (input order), then dummies (row-major tile order).
struct QuadratureScheme {
  std::vector<Point> points;
  std::vector<int> is_event;
  std::vector<double> weights;
  std::vector<double> responses;
  std::vector<int> counts;  // events + dummies sharing the point's tile
  double tile_area = 0;     // |W| / #in-window tiles
  double window_area = 0;
  int tiles_per_side = 0;
  int n_events = 0;
  int n_dummies = 0;

  int size() const { return static_cast<int>(points.size()); }
};

QuadratureScheme build_grid_scheme(const PointPattern& x, const Window& w, int tiles_per_side,
                                   DummyMode mode, std::uint64_t seed);

// eta_j = beta0 + Z.row(j)·beta, clamped to ±700 before exponentiation.
std::vector<double> linear_predictor(const Matrix& Z, double beta0,
                                     const std::vector<double>& beta);

// Σ_j w_j ( y_j η_j − exp(η_j) ), the weighted-Poisson form of the
// quadrature-approximated log-likelihood.
double loglik(const QuadratureScheme& q, const Matrix& Z, double beta0,
              const std::vector<double>& beta);

// 2 Σ_j w_j [ y_j log(y_j/μ_j) − (y_j − μ_j) ] with 0·log 0 = 0.
double deviance(const QuadratureScheme& q, const std::vector<double>& mu);

// Same deviance over a row subset (CV held-out folds); mu[i] pairs with rows[i].
double deviance_rows(const QuadratureScheme& q, const std::vector<double>& mu,
                     const std::vector<int>& rows);

// Debug dump: CSV `x,y,a,w,y_resp`.
void write_scheme_csv(const std::string& path, const QuadratureScheme& q);

}  // namespace ppfit
