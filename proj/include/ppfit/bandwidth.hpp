#pragma once

#include <cstdint>
#include <vector>

#include "ppfit/geometry.hpp"
#include "ppfit/matrix.hpp"

namespace ppfit {

// Lloyd K-means output. data rows are d-dim observations.
struct KMeansResult {
  Matrix centroids;             // P × d
  std::vector<int> assignment;  // nearest-centroid index per observation
  std::vector<int> counts;      // per-cluster sizes, all ≥ 1 after repair
  double dispersion = 0;        // D_P = Σ_q Σ_{x∈C_q} ‖x − ϖ_q‖²
};

// k-means++ seeded Lloyd iterations until Δ = Σ_q‖ϖ^{v+1}_q − ϖ^v_q‖² ≤ eps
// or max_iter; `restarts` independent seedings, lowest D_P kept.
KMeansResult kmeans(const Matrix& data, int P, std::uint64_t seed, double eps = 1e-5,
                    int max_iter = 100, int restarts = 10);

// KL_P = |((P−1)^{2/d} D_{P−1} − P^{2/d} D_P) / (P^{2/d} D_P − (P+1)^{2/d} D_{P+1})|.
// |denominator| < 1e-12 → 0 (excluded from the argmax).
double kl_index(double D_prev, double D_P, double D_next, int P, int d);

struct BandwidthReport {
  int K_max = 0;
  int P0 = 0;                     // argmax_P KL_P over P = 2..K_max
  std::vector<double> kl_values;  // KL_P for P = 2..K_max
  std::vector<double> sigma_sq;   // σ²_q = (1/(2n_q)) Σ_{x∈C_q} ‖x − ϖ_q‖²
  std::vector<double> weights;    // w_q = 1 / g_q, g_q = (1/n) Σ_i ‖x_i − ϖ_q‖²
  std::vector<int> cluster_sizes;
  int singletons_excluded = 0;
  double h = 0;  // sqrt( Σ w_q / Σ (w_q/σ²_q) ), singleton clusters excluded
};

BandwidthReport select_bandwidth(const Matrix& data, int K_max, std::uint64_t seed);

// 0.1 × bbox diagonal: the fallback bandwidth for segment densities.
double default_segment_bandwidth(const Window& w);

// Column matrices for the two selector input modes.
Matrix coords_matrix(const PointPattern& x);       // n × 2
Matrix lengths_matrix(const SegmentPattern& L);    // n × 1

}  // namespace ppfit
