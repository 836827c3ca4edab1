#include "ppfit/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ppfit/errors.hpp"
#include "ppfit/parallel.hpp"
#include "ppfit/rng.hpp"

namespace ppfit {

namespace {

double sq_dist_rows(const double* a, const double* b, int d) {
  double acc = 0;
  for (int k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

int nearest_centroid(const Matrix& centroids, const double* x, int d) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int q = 0; q < centroids.rows; ++q) {
    const double dq = sq_dist_rows(centroids.row(q), x, d);
    if (dq < best_d) {
      best_d = dq;
      best = q;
    }
  }
  return best;
}

// k-means++: first centroid uniform, then proportional to squared distance
// from the chosen set.
Matrix seed_centroids(const Matrix& data, int P, Rng& rng) {
  const int n = data.rows;
  const int d = data.cols;
  Matrix c(P, d);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  int first = static_cast<int>(rng.below(n));
  for (int k = 0; k < d; ++k) c(0, k) = data(first, k);
  for (int q = 1; q < P; ++q) {
    double total = 0;
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist_rows(data.row(i), c.row(q - 1), d));
      total += d2[i];
    }
    int pick = 0;
    if (total > 0) {
      double u = rng.uniform() * total;
      for (int i = 0; i < n; ++i) {
        u -= d2[i];
        if (u <= 0) {
          pick = i;
          break;
        }
        pick = i;  // numerical slack: final index wins if u never crosses 0
      }
    } else {
      pick = static_cast<int>(rng.below(n));
    }
    for (int k = 0; k < d; ++k) c(q, k) = data(pick, k);
  }
  return c;
}

KMeansResult lloyd(const Matrix& data, Matrix centroids, double eps, int max_iter) {
  const int n = data.rows;
  const int d = data.cols;
  const int P = centroids.rows;
  KMeansResult res;
  res.assignment.assign(n, 0);
  res.counts.assign(P, 0);

  for (int iter = 0; iter < max_iter; ++iter) {
    for (int i = 0; i < n; ++i) res.assignment[i] = nearest_centroid(centroids, data.row(i), d);

    Matrix next(P, d);
    std::fill(res.counts.begin(), res.counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int q = res.assignment[i];
      ++res.counts[q];
      for (int k = 0; k < d; ++k) next(q, k) += data(i, k);
    }
    // Empty cluster: move its centroid onto the point farthest from its own
    // centroid, and hand that point over.
    for (int q = 0; q < P; ++q) {
      if (res.counts[q] > 0) continue;
      int worst = -1;
      double worst_d = -1;
      for (int i = 0; i < n; ++i) {
        if (res.counts[res.assignment[i]] <= 1) continue;  // keep clusters nonempty
        const double dq = sq_dist_rows(data.row(i), centroids.row(res.assignment[i]), d);
        if (dq > worst_d) {
          worst_d = dq;
          worst = i;
        }
      }
      if (worst < 0) throw numeric_error("kmeans: cannot repair empty cluster");
      const int from = res.assignment[worst];
      --res.counts[from];
      for (int k = 0; k < d; ++k) next(from, k) -= data(worst, k);
      res.assignment[worst] = q;
      res.counts[q] = 1;
      for (int k = 0; k < d; ++k) next(q, k) = data(worst, k);
    }
    for (int q = 0; q < P; ++q) {
      for (int k = 0; k < d; ++k) next(q, k) /= res.counts[q];
    }

    double delta = 0;
    for (int q = 0; q < P; ++q) delta += sq_dist_rows(next.row(q), centroids.row(q), d);
    centroids = std::move(next);
    if (delta <= eps) break;
  }

  // Final assignment against the converged centroids.
  std::fill(res.counts.begin(), res.counts.end(), 0);
  for (int i = 0; i < n; ++i) {
    res.assignment[i] = nearest_centroid(centroids, data.row(i), d);
    ++res.counts[res.assignment[i]];
  }
  for (int q = 0; q < P; ++q) {
    if (res.counts[q] == 0) {
      // Rare post-convergence emptiness: claim the farthest point.
      int worst = -1;
      double worst_d = -1;
      for (int i = 0; i < n; ++i) {
        if (res.counts[res.assignment[i]] <= 1) continue;
        const double dq = sq_dist_rows(data.row(i), centroids.row(res.assignment[i]), d);
        if (dq > worst_d) {
          worst_d = dq;
          worst = i;
        }
      }
      if (worst < 0) throw numeric_error("kmeans: cannot repair empty cluster");
      --res.counts[res.assignment[worst]];
      res.assignment[worst] = q;
      res.counts[q] = 1;
      for (int k = 0; k < d; ++k) centroids(q, k) = data(worst, k);
    }
  }

  res.dispersion = 0;
  for (int i = 0; i < n; ++i) {
    res.dispersion += sq_dist_rows(data.row(i), centroids.row(res.assignment[i]), d);
  }
  res.centroids = std::move(centroids);
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& data, int P, std::uint64_t seed, double eps, int max_iter,
                    int restarts) {
  if (data.rows < 1 || data.cols < 1) throw input_error("kmeans: empty data");
  if (P < 1 || P > data.rows) throw input_error("kmeans: P must be in [1, #data]");
  if (P == 1) {
    Matrix c(1, data.cols);
    for (int i = 0; i < data.rows; ++i) {
      for (int k = 0; k < data.cols; ++k) c(0, k) += data(i, k);
    }
    for (int k = 0; k < data.cols; ++k) c(0, k) /= data.rows;
    return lloyd(data, std::move(c), eps, max_iter);
  }

  KMeansResult best;
  best.dispersion = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng(Rng::mix(seed, 0x6b6d + static_cast<std::uint64_t>(r) * 0x100 + P));
    KMeansResult cur = lloyd(data, seed_centroids(data, P, rng), eps, max_iter);
    if (cur.dispersion < best.dispersion) best = std::move(cur);
  }
  return best;
}

double kl_index(double D_prev, double D_P, double D_next, int P, int d) {
  if (P < 2) throw input_error("kl_index: P must be at least 2");
  const double e = 2.0 / d;
  const double num = std::pow(P - 1.0, e) * D_prev - std::pow(P, e) * D_P;
  const double den = std::pow(P, e) * D_P - std::pow(P + 1.0, e) * D_next;
  if (std::abs(den) < 1e-12) return 0.0;
  return std::abs(num / den);
}

BandwidthReport select_bandwidth(const Matrix& data, int K_max, std::uint64_t seed) {
  if (K_max < 2) throw input_error("select_bandwidth: K_max must be at least 2");
  if (data.rows < 3) throw input_error("select_bandwidth: need at least 3 points");
  if (data.rows < K_max + 1) {
    throw input_error("select_bandwidth: need more than K_max points");
  }
  const int d = data.cols;

  // D_P for P = 1..K_max+1; runs are independent, slots fixed.
  std::vector<double> D(K_max + 2, 0.0);
  parallel_for(K_max + 1, [&](int idx) {
    const int P = idx + 1;
    D[P] = kmeans(data, P, seed).dispersion;
  });

  BandwidthReport rep;
  rep.K_max = K_max;
  rep.kl_values.resize(K_max - 1);
  for (int P = 2; P <= K_max; ++P) {
    rep.kl_values[P - 2] = kl_index(D[P - 1], D[P], D[P + 1], P, d);
  }
  int P0 = 2;
  for (int P = 3; P <= K_max; ++P) {
    if (rep.kl_values[P - 2] > rep.kl_values[P0 - 2]) P0 = P;  // tie → smaller P
  }
  rep.P0 = P0;

  const KMeansResult km = kmeans(data, P0, seed);
  rep.cluster_sizes = km.counts;
  rep.sigma_sq.assign(P0, 0.0);
  rep.weights.assign(P0, 0.0);
  const int n = data.rows;
  for (int i = 0; i < n; ++i) {
    rep.sigma_sq[km.assignment[i]] += sq_dist_rows(data.row(i), km.centroids.row(km.assignment[i]), d);
  }
  for (int q = 0; q < P0; ++q) rep.sigma_sq[q] /= 2.0 * km.counts[q];
  for (int q = 0; q < P0; ++q) {
    double g = 0;
    for (int i = 0; i < n; ++i) g += sq_dist_rows(data.row(i), km.centroids.row(q), d);
    rep.weights[q] = n / g;  // 1 / g_q with g_q averaged over all observations
  }

  double wsum = 0, wsig = 0;
  for (int q = 0; q < P0; ++q) {
    if (km.counts[q] < 2 || rep.sigma_sq[q] <= 0) {
      ++rep.singletons_excluded;
      continue;
    }
    wsum += rep.weights[q];
    wsig += rep.weights[q] / rep.sigma_sq[q];
  }
  if (!(wsum > 0) || !(wsig > 0)) {
    throw numeric_error(
        "select_bandwidth: every cluster is a singleton; lower K_max or supply more points");
  }
  rep.h = std::sqrt(wsum / wsig);
  return rep;
}

double default_segment_bandwidth(const Window& w) { return 0.1 * w.bbox().diagonal(); }

Matrix coords_matrix(const PointPattern& x) {
  Matrix m(x.size(), 2);
  for (int i = 0; i < x.size(); ++i) {
    m(i, 0) = x.points[i].x;
    m(i, 1) = x.points[i].y;
  }
  return m;
}

Matrix lengths_matrix(const SegmentPattern& L) {
  Matrix m(L.size(), 1);
  for (int i = 0; i < L.size(); ++i) {
    m(i, 0) = std::sqrt(squared_dist(L.segments[i].a, L.segments[i].b));
  }
  return m;
}

}  // namespace ppfit
