#include "ppfit/penfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppfit/errors.hpp"
#include "ppfit/parallel.hpp"
#include "ppfit/rng.hpp"

namespace ppfit {

namespace {

double clamp_eta(double v) { return std::clamp(v, -700.0, 700.0); }

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// 4-lane dot products: the fixed reassociation breaks the FP-add latency
// chain that otherwise bounds these loops.
double dot2(const double* a, const double* b, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; j < n; ++j) s += a[j] * b[j];
  return s;
}

double dot3(const double* a, const double* b, const double* c, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j] * c[j];
    s1 += a[j + 1] * b[j + 1] * c[j + 1];
    s2 += a[j + 2] * b[j + 2] * c[j + 2];
    s3 += a[j + 3] * b[j + 3] * c[j + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; j < n; ++j) s += a[j] * b[j] * c[j];
  return s;
}

// Rows of the weighted-GLM view used by the solver; a fold fit works on a
// subset copy with its own 1/m scaling. zc mirrors Z column-major so the
// solver's per-column scans stream contiguous memory.
struct Rows {
  const Matrix* Z = nullptr;
  std::vector<double> w, y, zc;
  int m = 0;
  int K = 0;

  const double* col(int k) const { return zc.data() + static_cast<std::size_t>(k) * m; }

  void build_columns() {
    zc.resize(static_cast<std::size_t>(m) * K);
    for (int j = 0; j < m; ++j) {
      const double* z = Z->row(j);
      for (int k = 0; k < K; ++k) zc[static_cast<std::size_t>(k) * m + j] = z[k];
    }
  }

  static Rows full(const QuadratureScheme& q, const Matrix& Z) {
    Rows r;
    r.Z = &Z;
    r.w = q.weights;
    r.y = q.responses;
    r.m = q.size();
    r.K = Z.cols;
    r.build_columns();
    return r;
  }
};

// Penalty Pα(β) = Σ_k [ (1−α)β_k²/2 + α|β_k| ].
double penalty(const std::vector<double>& beta, double alpha) {
  double acc = 0;
  for (double b : beta) acc += 0.5 * (1 - alpha) * b * b + alpha * std::abs(b);
  return acc;
}

// −(1/m)·Σ w_j(y_j η_j − e^{η_j}) + λ Pα(β), the objective cd_solve descends.
double objective(const Rows& r, const std::vector<double>& eta, const std::vector<double>& beta,
                 double alpha, double lambda) {
  double ll = 0;
  for (int j = 0; j < r.m; ++j) ll += r.w[j] * (r.y[j] * eta[j] - std::exp(eta[j]));
  return -ll / r.m + lambda * penalty(beta, alpha);
}

std::vector<double> compute_eta(const Rows& r, double beta0, const std::vector<double>& beta) {
  std::vector<double> eta(r.m);
  for (int j = 0; j < r.m; ++j) {
    const double* z = r.Z->row(j);
    double acc = beta0;
    for (int k = 0; k < r.K; ++k) acc += z[k] * beta[k];
    eta[j] = clamp_eta(acc);
  }
  return eta;
}

// Max violation of the stationarity conditions of the penalized objective:
// grad_k = -(1/m) Σ w_j (y_j − μ_j) z_jk; zero coefficients need
// |grad_k| ≤ λα, active ones grad_k + λ(1−α)β_k + λα·sign(β_k) = 0, and the
// intercept Σ w_j (y_j − μ_j) = 0.
double kkt_violation(const Rows& r, const std::vector<double>& eta,
                     const std::vector<double>& beta, double alpha, double lambda) {
  std::vector<double> res(r.m);
  for (int j = 0; j < r.m; ++j) res[j] = r.w[j] * (r.y[j] - std::exp(eta[j]));
  double worst = 0;
  for (int k = 0; k < r.K; ++k) {
    const double g = dot2(res.data(), r.col(k), r.m) / r.m;
    if (beta[k] == 0) {
      worst = std::max(worst, std::abs(g) - lambda * alpha);
    } else {
      const double s = beta[k] > 0 ? 1.0 : -1.0;
      worst = std::max(worst, std::abs(g - lambda * (1 - alpha) * beta[k] - lambda * alpha * s));
    }
  }
  double g0 = 0;
  for (int j = 0; j < r.m; ++j) g0 += res[j];
  worst = std::max(worst, std::abs(g0) / r.m);
  return worst;
}

FitState solve_rows(const Rows& r, PenaltySpec spec, const FitState& warm, double tol,
                    int max_outer) {
  const int m = r.m;
  const int K = r.K;
  const double la = spec.lambda * spec.alpha;
  const double lr = spec.lambda * (1 - spec.alpha);

  FitState st = warm;
  if (static_cast<int>(st.beta.size()) != K) st.beta.assign(K, 0.0);
  st.eta = compute_eta(r, st.beta0, st.beta);
  st.objective = objective(r, st.eta, st.beta, spec.alpha, spec.lambda);
  if (!std::isfinite(st.objective)) throw numeric_error("nonfinite objective at warm start");

  // KKT gate below the test tolerances; objective stalls alone do not stop
  // the outer loop.
  const double kkt_eps = 2e-7;

  std::vector<double> ystar(m), u(m), resid(m), suzz(K), suzk(K), uz(m);
  for (int outer = 1; outer <= max_outer; ++outer) {
    st.outer_iters = outer;
    // Quadratic approximation at the current eta.
    double su = 0;
    for (int j = 0; j < m; ++j) {
      const double mu = std::exp(st.eta[j]);
      u[j] = r.w[j] * mu;
      ystar[j] = st.eta[j] + r.y[j] / mu - 1.0;
      resid[j] = ystar[j] - st.eta[j];  // = y*_j − β0 − zβ at the expansion point
      su += u[j];
    }
    for (int k = 0; k < K; ++k) {
      const double* z = r.col(k);
      suzk[k] = dot2(u.data(), z, m);
      suzz[k] = dot3(u.data(), z, z, m) / m;
    }

    const double beta0_in = st.beta0;
    std::vector<double> beta_in = st.beta;

    // Cyclic coordinate descent on the quadratic: one full pass, then
    // active-set cycles, then a full pass that both confirms convergence and
    // restarts the cycles when a zero coefficient re-activates.
    std::vector<int> active;
    auto update_one = [&](int k) {
      const double* z = r.col(k);
      const double num = dot3(u.data(), z, resid.data(), m) / m + st.beta[k] * suzz[k];
      const double bk = soft_threshold(num, la) / (suzz[k] + lr);
      const double delta = bk - st.beta[k];
      if (delta != 0) {
        for (int j = 0; j < m; ++j) resid[j] -= delta * z[j];
        st.beta[k] = bk;
      }
      return std::abs(delta);
    };
    auto update_intercept = [&]() {
      const double delta = dot2(u.data(), resid.data(), m) / su;
      if (delta != 0) {
        st.beta0 += delta;
        for (int j = 0; j < m; ++j) resid[j] -= delta;
      }
      return std::abs(delta);
    };

    // Gram rows over all columns, built on a coordinate's first move and
    // valid for the whole outer iteration (u is fixed here).
    std::vector<std::vector<double>> gram(K);
    auto gram_row = [&](int k) -> const double* {
      std::vector<double>& row = gram[k];
      if (row.empty()) {
        row.resize(K);
        const double* zk = r.col(k);
        for (int j = 0; j < m; ++j) uz[j] = u[j] * zk[j];
        for (int l = 0; l < K; ++l) row[l] = dot2(uz.data(), r.col(l), m);
      }
      return row.data();
    };

    double change = update_intercept();
    for (int k = 0; k < K; ++k) change = std::max(change, update_one(k));
    for (int guard = 0; guard < 10000; ++guard) {
      active.clear();
      for (int k = 0; k < K; ++k) {
        if (st.beta[k] != 0) active.push_back(k);
      }

      // Active-set cycles on cached cross-moments: a coordinate move updates
      // the cached gradients in O(|A|) instead of touching all m rows, so
      // correlated columns that contract slowly stay cheap. resid is
      // reconciled with the net move afterwards and the confirming pass
      // reads it fresh, so cache rounding cannot stick to the solution.
      const int A = static_cast<int>(active.size());
      if (change >= tol * std::max(1.0, max_abs(st.beta))) {
        std::vector<double> dot(A);
        for (int a = 0; a < A; ++a) {
          dot[a] = dot3(u.data(), r.col(active[a]), resid.data(), m);
        }
        double dot0 = dot2(u.data(), resid.data(), m);

        const double beta0_mark = st.beta0;
        std::vector<double> beta_mark(A);
        for (int a = 0; a < A; ++a) beta_mark[a] = st.beta[active[a]];

        for (int cycle = 0; cycle < 10000 && change >= tol * std::max(1.0, max_abs(st.beta));
             ++cycle) {
          const double d0 = dot0 / su;
          change = std::abs(d0);
          if (d0 != 0) {
            st.beta0 += d0;
            for (int b = 0; b < A; ++b) dot[b] -= d0 * suzk[active[b]];
            dot0 -= d0 * su;
          }
          for (int a = 0; a < A; ++a) {
            const int k = active[a];
            const double num = dot[a] / m + st.beta[k] * suzz[k];
            const double bk = soft_threshold(num, la) / (suzz[k] + lr);
            const double delta = bk - st.beta[k];
            if (delta != 0) {
              const double* row = gram_row(k);
              for (int b = 0; b < A; ++b) dot[b] -= delta * row[active[b]];
              dot0 -= delta * suzk[k];
              st.beta[k] = bk;
            }
            change = std::max(change, std::abs(delta));
          }
        }

        const double moved0 = st.beta0 - beta0_mark;
        std::vector<int> moved;
        for (int a = 0; a < A; ++a) {
          if (st.beta[active[a]] != beta_mark[a]) moved.push_back(a);
        }
        if (moved0 != 0 || !moved.empty()) {
          for (int j = 0; j < m; ++j) {
            double acc = moved0;
            for (int a : moved) acc += (st.beta[active[a]] - beta_mark[a]) * r.col(active[a])[j];
            resid[j] -= acc;
          }
        }
      }

      // Full-pass confirmation; a re-activation restarts the active cycles.
      change = update_intercept();
      bool grew = false;
      for (int k = 0; k < K; ++k) {
        const bool was_zero = st.beta[k] == 0;
        change = std::max(change, update_one(k));
        if (was_zero && st.beta[k] != 0) grew = true;
      }
      if (!grew && change < tol * std::max(1.0, max_abs(st.beta))) break;
    }

    // Proximal-Newton step with objective backtracking.
    std::vector<double> beta_new = st.beta;
    const double beta0_new = st.beta0;
    double step = 1.0;
    double obj_new = 0;
    std::vector<double> eta_new;
    for (int half = 0; half < 40; ++half) {
      st.beta0 = beta0_in + step * (beta0_new - beta0_in);
      for (int k = 0; k < K; ++k) st.beta[k] = beta_in[k] + step * (beta_new[k] - beta_in[k]);
      eta_new = compute_eta(r, st.beta0, st.beta);
      obj_new = objective(r, eta_new, st.beta, spec.alpha, spec.lambda);
      if (std::isfinite(obj_new) && obj_new <= st.objective + 1e-12 * std::abs(st.objective)) {
        break;
      }
      step *= 0.5;
    }
    if (!std::isfinite(obj_new)) throw numeric_error("penalized objective diverged");
    if (obj_new > st.objective + 1e-10 * std::max(1.0, std::abs(st.objective))) {
      // No descent direction left; restore the expansion point and stop.
      st.beta0 = beta0_in;
      st.beta = beta_in;
      st.eta = compute_eta(r, st.beta0, st.beta);
      st.converged = kkt_violation(r, st.eta, st.beta, spec.alpha, spec.lambda) <= kkt_eps;
      break;
    }

    const double rel_change =
        std::abs(st.objective - obj_new) / std::max(1.0, std::abs(st.objective));
    st.eta = std::move(eta_new);
    st.objective = obj_new;
    if (rel_change < tol &&
        kkt_violation(r, st.eta, st.beta, spec.alpha, spec.lambda) <= kkt_eps) {
      st.converged = true;
      break;
    }
  }

  // Snap numerically dead coefficients to exact zero.
  const double snap = 1e-12 * std::max(1.0, max_abs(st.beta));
  bool snapped = false;
  for (double& b : st.beta) {
    if (b != 0 && std::abs(b) <= snap) {
      b = 0.0;
      snapped = true;
    }
  }
  if (snapped) st.eta = compute_eta(r, st.beta0, st.beta);
  st.mu.resize(m);
  for (int j = 0; j < m; ++j) st.mu[j] = std::exp(st.eta[j]);
  return st;
}

double intercept_only_beta0(const Rows& r) {
  double sw = 0, swy = 0;
  for (int j = 0; j < r.m; ++j) {
    sw += r.w[j];
    swy += r.w[j] * r.y[j];
  }
  if (!(swy > 0)) return -700.0;  // empty pattern: essentially zero intensity
  return std::log(swy / sw);
}

std::vector<double> lambda_path_rows(const Rows& r, double alpha, int T, double ratio) {
  if (T < 2) throw config_error("lambda path needs at least 2 values");
  if (alpha < 0 || alpha > 1) throw config_error("alpha must lie in [0,1]");
  const double a = alpha > 0 ? alpha : 1e-3;  // ridge surrogate for the max
  if (ratio <= 0) ratio = r.K >= r.m ? 1e-2 : 1e-4;

  const double mu0 = std::exp(intercept_only_beta0(r));
  std::vector<double> res(r.m);
  for (int j = 0; j < r.m; ++j) res[j] = r.w[j] * (r.y[j] - mu0);
  double gmax = 0;
  for (int k = 0; k < r.K; ++k) {
    gmax = std::max(gmax, std::abs(dot2(res.data(), r.col(k), r.m)) / r.m);
  }
  if (!(gmax > 0)) throw numeric_error("intercept-only fit is already stationary in every column");
  const double lmax = gmax / a;
  std::vector<double> path(T);
  for (int i = 0; i < T; ++i) path[i] = lmax * std::pow(ratio, static_cast<double>(i) / (T - 1));
  return path;
}

struct PathFit {
  std::vector<double> beta0;
  Matrix coefs;  // T × K, solver scale
  std::vector<int> converged;
};

PathFit fit_path_rows(const Rows& r, double alpha, const std::vector<double>& lambdas, double tol,
                      int max_outer, std::vector<std::vector<double>>* etas) {
  const int T = static_cast<int>(lambdas.size());
  PathFit out;
  out.beta0.resize(T);
  out.coefs = Matrix(T, r.K);
  out.converged.resize(T);

  FitState warm;
  warm.beta0 = intercept_only_beta0(r);
  warm.beta.assign(r.K, 0.0);
  for (int t = 0; t < T; ++t) {
    warm = solve_rows(r, PenaltySpec{alpha, lambdas[t]}, warm, tol, max_outer);
    out.beta0[t] = warm.beta0;
    for (int k = 0; k < r.K; ++k) out.coefs(t, k) = warm.beta[k];
    out.converged[t] = warm.converged ? 1 : 0;
    if (etas) (*etas)[t] = warm.eta;
  }
  return out;
}

}  // namespace

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

std::pair<std::vector<double>, std::vector<double>> irls_working(const QuadratureScheme& q,
                                                                 const std::vector<double>& eta) {
  if (static_cast<int>(eta.size()) != q.size()) {
    throw config_error("eta length does not match quadrature size");
  }
  std::vector<double> ystar(q.size()), u(q.size());
  for (int j = 0; j < q.size(); ++j) {
    const double e = clamp_eta(eta[j]);
    const double mu = std::exp(e);
    ystar[j] = e + q.responses[j] / mu - 1.0;
    u[j] = q.weights[j] * mu;
  }
  return {std::move(ystar), std::move(u)};
}

FitState cd_solve(const QuadratureScheme& q, const Matrix& Z, PenaltySpec spec,
                  const FitState& warm, double tol, int max_outer) {
  if (Z.rows != q.size()) throw config_error("design rows do not match quadrature size");
  if (spec.lambda < 0 || spec.alpha < 0 || spec.alpha > 1) {
    throw config_error("penalty requires lambda ≥ 0 and alpha in [0,1]");
  }
  return solve_rows(Rows::full(q, Z), spec, warm, tol, max_outer);
}

std::vector<double> lambda_path(const QuadratureScheme& q, const Matrix& Z, double alpha, int T,
                                double ratio) {
  if (Z.rows != q.size()) throw config_error("design rows do not match quadrature size");
  return lambda_path_rows(Rows::full(q, Z), alpha, T, ratio);
}

FitPath fit_path(const QuadratureScheme& q, const Matrix& Z, const CovariateStack& stack,
                 double alpha, const std::vector<double>& lambdas, double tol, int max_outer) {
  if (Z.rows != q.size()) throw config_error("design rows do not match quadrature size");
  const Rows rows = Rows::full(q, Z);
  const int T = static_cast<int>(lambdas.size());

  std::vector<std::vector<double>> etas(T);
  PathFit pf = fit_path_rows(rows, alpha, lambdas, tol, max_outer, &etas);

  FitPath out;
  out.lambdas = lambdas;
  out.beta0_std = pf.beta0;
  out.coefs_std = pf.coefs;
  out.converged = pf.converged;
  out.beta0.resize(T);
  out.coefs = Matrix(T, stack.standardized ? stack.raw_count() : Z.cols);
  out.train_deviance.resize(T);
  out.nnz.resize(T);
  for (int t = 0; t < T; ++t) {
    std::vector<double> beta_std(Z.cols);
    for (int k = 0; k < Z.cols; ++k) beta_std[k] = pf.coefs(t, k);
    int nnz = 0;
    for (double b : beta_std) nnz += b != 0;
    out.nnz[t] = nnz;
    std::vector<double> mu(q.size());
    for (int j = 0; j < q.size(); ++j) mu[j] = std::exp(etas[t][j]);
    out.train_deviance[t] = deviance(q, mu);
    if (stack.standardized) {
      std::vector<double> beta_orig;
      back_transform(stack, pf.beta0[t], beta_std, &out.beta0[t], &beta_orig);
      for (int k = 0; k < out.coefs.cols; ++k) out.coefs(t, k) = beta_orig[k];
    } else {
      out.beta0[t] = pf.beta0[t];
      for (int k = 0; k < Z.cols; ++k) out.coefs(t, k) = beta_std[k];
    }
  }
  return out;
}

CvStats cv_select(const QuadratureScheme& q, const Matrix& Z, double alpha,
                  const std::vector<double>& lambdas, int folds, std::uint64_t seed, double tol,
                  int max_outer) {
  if (folds < 2) throw config_error("cross-validation needs at least 2 folds");
  if (Z.rows != q.size()) throw config_error("design rows do not match quadrature size");
  const int m = q.size();
  const int T = static_cast<int>(lambdas.size());

  // Events and dummies shuffled separately, dealt round-robin; every fold
  // must see at least one event.
  std::vector<int> fold_of(m, -1);
  bool ok = false;
  for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
    std::vector<int> events, dummies;
    for (int j = 0; j < m; ++j) (q.is_event[j] ? events : dummies).push_back(j);
    Rng re(Rng::mix(seed, 0xCF01 + 2 * attempt));
    Rng rd(Rng::mix(seed, 0xCF02 + 2 * attempt));
    re.shuffle(events);
    rd.shuffle(dummies);
    for (std::size_t i = 0; i < events.size(); ++i) fold_of[events[i]] = static_cast<int>(i) % folds;
    for (std::size_t i = 0; i < dummies.size(); ++i) {
      fold_of[dummies[i]] = static_cast<int>(i) % folds;
    }
    std::vector<int> events_per_fold(folds, 0);
    for (int j = 0; j < m; ++j) {
      if (q.is_event[j]) ++events_per_fold[fold_of[j]];
    }
    ok = *std::min_element(events_per_fold.begin(), events_per_fold.end()) > 0;
  }
  if (!ok) throw numeric_error("a CV fold has no events; use fewer folds");

  // dev(f, t): held-out deviance of fold f at lambda t.
  Matrix dev(folds, T);
  parallel_for(folds, [&](int f) {
    std::vector<int> train, test;
    for (int j = 0; j < m; ++j) (fold_of[j] == f ? test : train).push_back(j);

    Matrix Ztr(static_cast<int>(train.size()), Z.cols);
    Rows rows;
    rows.m = static_cast<int>(train.size());
    rows.K = Z.cols;
    rows.w.resize(train.size());
    rows.y.resize(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      const int j = train[i];
      rows.w[i] = q.weights[j];
      rows.y[i] = q.responses[j];
      for (int k = 0; k < Z.cols; ++k) Ztr(static_cast<int>(i), k) = Z(j, k);
    }
    rows.Z = &Ztr;
    rows.build_columns();

    PathFit pf = fit_path_rows(rows, alpha, lambdas, tol, max_outer, nullptr);
    std::vector<double> mu(test.size());
    for (int t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < test.size(); ++i) {
        const double* z = Z.row(test[i]);
        double eta = pf.beta0[t];
        for (int k = 0; k < Z.cols; ++k) eta += z[k] * pf.coefs(t, k);
        mu[i] = std::exp(clamp_eta(eta));
      }
      dev(f, t) = deviance_rows(q, mu, test);
    }
  });

  CvStats out;
  out.mean.resize(T);
  out.se.resize(T);
  for (int t = 0; t < T; ++t) {
    double mean = 0;
    for (int f = 0; f < folds; ++f) mean += dev(f, t);
    mean /= folds;
    double var = 0;
    for (int f = 0; f < folds; ++f) {
      const double d = dev(f, t) - mean;
      var += d * d;
    }
    var /= folds - 1;
    out.mean[t] = mean;
    out.se[t] = std::sqrt(var / folds);
  }
  out.index_opt = 0;
  for (int t = 1; t < T; ++t) {
    if (out.mean[t] < out.mean[out.index_opt]) out.index_opt = t;  // tie → larger λ
  }
  const double bar = out.mean[out.index_opt] + out.se[out.index_opt];
  out.index_1se = out.index_opt;
  for (int t = 0; t <= out.index_opt; ++t) {
    if (out.mean[t] <= bar) {
      out.index_1se = t;
      break;
    }
  }
  out.lambda_opt = lambdas[out.index_opt];
  out.lambda_1se = lambdas[out.index_1se];
  return out;
}

Raster predict_intensity(double beta0, const std::vector<double>& beta,
                         const CovariateStack& stack, const Raster& grid, bool normalize) {
  if (static_cast<int>(beta.size()) != stack.raw_count()) {
    throw config_error("coefficient length does not match the raw design");
  }
  Raster out = grid.like(0.0);
  const int total = grid.ncols * grid.nrows;
  parallel_for(total, [&](int idx) {
    const int ix = idx % grid.ncols;
    const int iy = idx / grid.ncols;
    if (grid.is_nodata(ix, iy)) return;
    const Point c{grid.center_x(ix), grid.center_y(iy)};
    double eta = beta0;
    for (int k = 0; k < stack.raw_count(); ++k) {
      if (beta[k] == 0) continue;  // skip sources a sparse model never selected
      const auto v = try_eval_column(stack, k, c);
      if (!v) {
        eta = std::numeric_limits<double>::quiet_NaN();
        break;
      }
      eta += beta[k] * *v;
    }
    out.at(ix, iy) = std::isnan(eta) ? grid.nodata : std::exp(clamp_eta(eta));
  });
  if (normalize) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int iy = 0; iy < out.nrows; ++iy) {
      for (int ix = 0; ix < out.ncols; ++ix) {
        if (out.is_nodata(ix, iy)) continue;
        lo = std::min(lo, out.at(ix, iy));
        hi = std::max(hi, out.at(ix, iy));
      }
    }
    const double span = hi - lo;
    for (int iy = 0; iy < out.nrows; ++iy) {
      for (int ix = 0; ix < out.ncols; ++ix) {
        if (out.is_nodata(ix, iy)) continue;
        out.at(ix, iy) = span > 0 ? (out.at(ix, iy) - lo) / span : 0.0;
      }
    }
  }
  return out;
}

}  // namespace ppfit
