#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ppfit/covariates.hpp"
#include "ppfit/matrix.hpp"
#include "ppfit/quadrature.hpp"

namespace ppfit {

struct PenaltySpec {
  double alpha = 0.95;  // 1 = lasso, 0 = ridge
  double lambda = 0;
};

struct FitState {
  double beta0 = 0;
  std::vector<double> beta;
  std::vector<double> eta;  // per quadrature row, clamped to ±700
  std::vector<double> mu;   // exp(eta)
  double objective = 0;     // penalized (1/m)-scaled objective
  int outer_iters = 0;
  bool converged = false;
};

// sign(z)·max(|z|−t, 0).
double soft_threshold(double z, double t);

// Working response y*_j = η_j + y_j/exp(η_j) − 1 and weight u_j = w_j·exp(η_j)
// of the quadratic approximation at eta.
std::pair<std::vector<double>, std::vector<double>> irls_working(const QuadratureScheme& q,
                                                                 const std::vector<double>& eta);

// Proximal-Newton elastic net: outer IRLS re-linearization, inner cyclic
// coordinate descent with soft-thresholding and an unpenalized intercept.
// Z must be standardized. Stops when the relative objective change < tol.
FitState cd_solve(const QuadratureScheme& q, const Matrix& Z, PenaltySpec spec,
                  const FitState& warm, double tol = 1e-7, int max_outer = 100);

// Geometric path of T values from λ_max down to ratio·λ_max.
// ratio ≤ 0 selects the default: 1e-4, or 1e-2 when K ≥ m.
std::vector<double> lambda_path(const QuadratureScheme& q, const Matrix& Z, double alpha,
                                int T = 100, double ratio = 0);

struct CvStats {
  std::vector<double> mean, se;  // out-of-fold deviance per λ
  int index_opt = -1;            // argmin mean (tie → smaller index = larger λ)
  int index_1se = -1;            // smallest index with mean ≤ mean_opt + se_opt
  double lambda_opt = 0;
  double lambda_1se = 0;
};

struct FitPath {
  std::vector<double> lambdas;
  std::vector<double> beta0;          // per λ, original scale
  Matrix coefs;                       // T × K_raw, original scale, dropped → 0
  std::vector<double> beta0_std;      // per λ, standardized scale
  Matrix coefs_std;                   // T × K_design
  std::vector<double> train_deviance;
  std::vector<int> nnz;
  std::vector<int> converged;
  CvStats cv;  // filled by cv_select
};

// Warm-started solve down the path. The stack provides names/back-transform;
// Z is its design at the scheme's points.
FitPath fit_path(const QuadratureScheme& q, const Matrix& Z, const CovariateStack& stack,
                 double alpha, const std::vector<double>& lambdas, double tol = 1e-7,
                 int max_outer = 100);

// K-fold CV stratified by the event indicator; per-fold path refits with
// 1/m_train scaling; held-out weighted deviance aggregated per λ.
CvStats cv_select(const QuadratureScheme& q, const Matrix& Z, double alpha,
                  const std::vector<double>& lambdas, int folds, std::uint64_t seed,
                  double tol = 1e-7, int max_outer = 100);

// exp(β0 + z(cell)·β) per defined cell; beta on the original (raw) scale.
// normalize rescales the defined cells to [0,1] (min-max).
Raster predict_intensity(double beta0, const std::vector<double>& beta,
                         const CovariateStack& stack, const Raster& grid, bool normalize);

}  // namespace ppfit
