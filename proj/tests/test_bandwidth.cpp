#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "ppfit/bandwidth.hpp"
#include "ppfit/errors.hpp"
#include "ppfit/rng.hpp"
#include "support/oracles.hpp"

using namespace ppfit;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows; ++i) {
    for (int k = 0; k < m.cols; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

// Four congruent diamond-shaped clusters with dyadic coordinates: every
// cluster has σ² = 0.03125 bitwise, so the harmonic-mean bandwidth must
// equal σ exactly.
Matrix equal_dispersion_data() {
  std::vector<std::vector<double>> rows;
  const double cx[] = {0, 16, 0, 16};
  const double cy[] = {0, 0, 16, 16};
  for (int c = 0; c < 4; ++c) {
    rows.push_back({cx[c] - 0.25, cy[c]});
    rows.push_back({cx[c] + 0.25, cy[c]});
    rows.push_back({cx[c], cy[c] - 0.25});
    rows.push_back({cx[c], cy[c] + 0.25});
  }
  return from_rows(rows);
}

}  // namespace

TEST_CASE("kmeans: two points, P=2") {
  const Matrix data = from_rows({{0, 0}, {3, 4}});
  const KMeansResult r = kmeans(data, 2, 1);
  CHECK(r.dispersion == 0.0);
  CHECK(r.counts == std::vector<int>{1, 1});
  CHECK(r.assignment[0] != r.assignment[1]);
}

TEST_CASE("kmeans: P=1 gives the mean and total sum of squares") {
  const Matrix data = from_rows({{0, 0}, {2, 0}, {0, 2}, {2, 2}});
  const KMeansResult r = kmeans(data, 1, 1);
  CHECK(r.centroids(0, 0) == doctest::Approx(1.0));
  CHECK(r.centroids(0, 1) == doctest::Approx(1.0));
  CHECK(r.dispersion == doctest::Approx(8.0));  // 4 points at squared distance 2
  CHECK(r.counts == std::vector<int>{4});
}

TEST_CASE("kmeans: three separated blobs recovered across seeds") {
  const std::vector<Point> centers{{0, 0}, {10, 0}, {0, 10}};
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Matrix data = oracle::gaussian_blobs(centers, 0.1, 20, seed);
    const KMeansResult r = kmeans(data, 3, seed);
    // Per-blob majority label must be unanimous and distinct.
    bool ok = true;
    std::vector<int> label(3, -1);
    for (int b = 0; b < 3 && ok; ++b) {
      const int l = r.assignment[b * 20];
      label[b] = l;
      for (int i = 1; i < 20; ++i) ok = ok && r.assignment[b * 20 + i] == l;
    }
    std::sort(label.begin(), label.end());
    ok = ok && label == std::vector<int>{0, 1, 2};
    good += ok;
  }
  CHECK(good >= 99);
}

TEST_CASE("kmeans: determinism and input validation") {
  const Matrix data = oracle::gaussian_blobs({{0, 0}, {5, 5}}, 0.5, 15, 3);
  const KMeansResult a = kmeans(data, 4, 77);
  const KMeansResult b = kmeans(data, 4, 77);
  CHECK(a.assignment == b.assignment);
  CHECK(a.dispersion == b.dispersion);
  for (std::size_t i = 0; i < a.centroids.a.size(); ++i) {
    CHECK(a.centroids.a[i] == b.centroids.a[i]);
  }
  CHECK_THROWS_AS(kmeans(data, 31, 1), input_error);
  CHECK_THROWS_AS(kmeans(data, 0, 1), input_error);
}

TEST_CASE("kmeans: P equal to point count gives zero dispersion") {
  const Matrix data = oracle::gaussian_blobs({{0, 0}}, 2.0, 7, 5);
  const KMeansResult r = kmeans(data, 7, 9);
  CHECK(r.dispersion == doctest::Approx(0.0));
  for (int c : r.counts) CHECK(c == 1);
}

TEST_CASE("kmeans: dispersion non-increasing in P in practice") {
  const Matrix data = oracle::gaussian_blobs({{0, 0}, {8, 1}, {3, 9}}, 1.0, 25, 11);
  double prev = kmeans(data, 1, 4).dispersion;
  for (int P = 2; P <= 8; ++P) {
    const double cur = kmeans(data, P, 4).dispersion;
    CHECK(cur <= prev + 1e-9);
    prev = cur;
  }
}

TEST_CASE("kl_index: hand-evaluated example") {
  const double v = kl_index(10, 2, 1.9, 2, 2);
  CHECK(v == doctest::Approx(6.0 / 1.7).epsilon(1e-12));
  CHECK(v == doctest::Approx(3.529411764705882).epsilon(1e-12));
}

TEST_CASE("kl_index: planted elbow wins the argmax") {
  const std::vector<double> D{0, 100, 40, 5, 4.5, 4.2};  // D[P], elbow at P=3
  int best_p = 2;
  double best = -1;
  for (int P = 2; P <= 4; ++P) {
    const double v = kl_index(D[P - 1], D[P], D[P + 1], P, 2);
    if (v > best) {
      best = v;
      best_p = P;
    }
  }
  CHECK(best_p == 3);
}

TEST_CASE("kl_index: geometric decay has no sharp winner") {
  // D_P = 100 · 0.6^P: ratios of successive index values stay within one
  // order of magnitude, so nothing resembles an elbow spike.
  auto D = [](int P) { return 100.0 * std::pow(0.6, P); };
  std::vector<double> kl;
  for (int P = 2; P <= 8; ++P) kl.push_back(kl_index(D(P - 1), D(P), D(P + 1), P, 2));
  const double hi = *std::max_element(kl.begin(), kl.end());
  const double lo = *std::min_element(kl.begin(), kl.end());
  CHECK(hi / lo < 10.0);
}

TEST_CASE("kl_index: degenerate denominator maps to zero") {
  CHECK(kl_index(10, 2, 2.0 * std::pow(2.0, 1.0) / 3.0, 2, 2) == 0.0);
  CHECK(kl_index(5, 0, 0, 3, 2) == 0.0);
  CHECK_THROWS_AS(kl_index(1, 1, 1, 1, 2), input_error);
}

TEST_CASE("select_bandwidth: equal cluster dispersion gives h = sigma exactly") {
  const Matrix data = equal_dispersion_data();
  const BandwidthReport rep = select_bandwidth(data, 6, 17);
  CHECK(rep.P0 == 4);
  REQUIRE(rep.sigma_sq.size() == 4);
  for (double s2 : rep.sigma_sq) CHECK(s2 == 0.03125);
  CHECK(rep.h == std::sqrt(0.03125));
  CHECK(rep.singletons_excluded == 0);
}

TEST_CASE("select_bandwidth: h lies between extreme cluster sigmas") {
  const Matrix data = oracle::gaussian_blobs({{0, 0}, {12, 0}, {0, 12}, {12, 12}}, 0.4, 30, 8);
  const BandwidthReport rep = select_bandwidth(data, 8, 21);
  double lo = 1e300, hi = 0;
  for (int q = 0; q < static_cast<int>(rep.sigma_sq.size()); ++q) {
    if (rep.cluster_sizes[q] < 2 || rep.sigma_sq[q] <= 0) continue;
    lo = std::min(lo, std::sqrt(rep.sigma_sq[q]));
    hi = std::max(hi, std::sqrt(rep.sigma_sq[q]));
  }
  CHECK(rep.h >= lo - 1e-12);
  CHECK(rep.h <= hi + 1e-12);
}

TEST_CASE("select_bandwidth: deterministic and scale-homogeneous") {
  const Matrix data = oracle::gaussian_blobs({{0, 0}, {7, 2}, {3, 8}}, 0.5, 25, 13);
  const BandwidthReport a = select_bandwidth(data, 6, 5);
  const BandwidthReport b = select_bandwidth(data, 6, 5);
  CHECK(a.h == b.h);
  CHECK(a.P0 == b.P0);
  CHECK(a.kl_values == b.kl_values);

  Matrix scaled = data;
  for (double& v : scaled.a) v *= 3.0;
  const BandwidthReport c = select_bandwidth(scaled, 6, 5);
  CHECK(c.P0 == a.P0);
  CHECK(c.h == doctest::Approx(3.0 * a.h).epsilon(1e-12));
}

TEST_CASE("select_bandwidth: 16-blob grid recovers the planted count") {
  std::vector<Point> centers;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) centers.push_back({i * 10.0, j * 10.0});
  }
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix data = oracle::gaussian_blobs(centers, 0.5, 20, seed);
    const BandwidthReport rep = select_bandwidth(data, 24, seed);
    if (rep.P0 >= 14 && rep.P0 <= 18) ++within;
  }
  CHECK(within >= 9);
}

TEST_CASE("select_bandwidth: singleton clusters are excluded") {
  // Three tight 6-point blobs plus one extreme outlier; the outlier becomes
  // its own cluster and must not zero out the harmonic mean.
  Matrix blobs = oracle::gaussian_blobs({{0, 0}, {10, 0}, {0, 10}}, 0.2, 6, 3);
  Matrix data(blobs.rows + 1, 2);
  std::copy(blobs.a.begin(), blobs.a.end(), data.a.begin());
  data(blobs.rows, 0) = 300.0;
  data(blobs.rows, 1) = 300.0;
  const BandwidthReport rep = select_bandwidth(data, 5, 2);
  if (rep.P0 >= 4) {
    CHECK(rep.singletons_excluded >= 1);
  }
  CHECK(rep.h > 0);
  CHECK(std::isfinite(rep.h));
}

TEST_CASE("select_bandwidth: all-singleton clustering is an error") {
  // Two coincident pairs: at P0 = 2 both clusters have zero dispersion.
  const Matrix data = from_rows({{0, 0}, {0, 0}, {100, 100}, {100, 100}});
  CHECK_THROWS_AS(select_bandwidth(data, 3, 1), numeric_error);
}

TEST_CASE("select_bandwidth: input validation") {
  const Matrix tiny = from_rows({{0, 0}, {1, 1}});
  CHECK_THROWS_AS(select_bandwidth(tiny, 2, 1), input_error);
  const Matrix four = from_rows({{0, 0}, {1, 1}, {2, 0}, {3, 1}});
  CHECK_THROWS_AS(select_bandwidth(four, 4, 1), input_error);  // needs K_max+1 points
  CHECK_THROWS_AS(select_bandwidth(four, 1, 1), input_error);
}

TEST_CASE("select_bandwidth: one-dimensional segment lengths") {
  // Two length populations: short (~0.5) and long (~9); d = 1 exponents.
  SegmentPattern L;
  Rng rng(6);
  for (int i = 0; i < 30; ++i) {
    const double len = (i < 15 ? 0.5 : 9.0) + 0.05 * rng.uniform(-1, 1);
    const double x = rng.uniform(0, 50), y = rng.uniform(0, 50);
    L.segments.push_back({{x, y}, {x + len, y}});
  }
  const Matrix lengths = lengths_matrix(L);
  REQUIRE(lengths.cols == 1);
  const BandwidthReport rep = select_bandwidth(lengths, 6, 4);
  CHECK(rep.P0 == 2);
  CHECK(rep.h > 0);
  CHECK(rep.h < 1.0);  // within-cluster scatter is tiny in both groups
}

TEST_CASE("lengths_matrix and coords_matrix") {
  SegmentPattern L;
  L.segments = {{{0, 0}, {3, 4}}};
  CHECK(lengths_matrix(L)(0, 0) == doctest::Approx(5.0));
  PointPattern p;
  p.points = {{1, 2}};
  const Matrix c = coords_matrix(p);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 1) == 2.0);
}

TEST_CASE("default_segment_bandwidth") {
  CHECK(default_segment_bandwidth(Window::rectangle(0, 0, 1, 1)) ==
        doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(default_segment_bandwidth(Window::rectangle(0, 0, 3, 4)) == doctest::Approx(0.5));
  const double base = default_segment_bandwidth(Window::rectangle(2, 5, 4, 8));
  const double scaled = default_segment_bandwidth(Window::rectangle(4, 10, 8, 16));
  CHECK(scaled == doctest::Approx(2 * base).epsilon(1e-15));
}
