#include <limits>
#include <random>

#include "slackcast/corpus.hpp"
#include "slackcast/error.hpp"

namespace slackcast::corpus {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

KMeansResult kmeans_cluster(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw Error(ErrorCode::DegenerateK, "K = " + std::to_string(k) + " needs 1 <= K <= " + std::to_string(n));
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim) throw Error(ErrorCode::DimensionMismatch, "points differ in dimension");

  std::mt19937_64 rng(seed);
  KMeansResult r;
  // k-means++ seeding; once every point coincides with a chosen centroid
  // the remaining ones are the lowest-index points not yet chosen.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  r.centroids.push_back(points[first]);
  chosen[first] = 1;
  while (r.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], dist2(points[i], r.centroids.back()));
      total += chosen[i] ? 0.0 : d2[i];
    }
    std::size_t next = n;
    if (total > 0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        next = i;
        u -= d2[i];
        if (u < 0) break;
      }
    } else {
      for (std::size_t i = 0; i < n && next == n; ++i)
        if (!chosen[i]) next = i;
    }
    chosen[next] = 1;
    r.centroids.push_back(points[next]);
  }

  r.assignment.assign(n, -1);
  for (r.iterations = 1; r.iterations <= 100; ++r.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = dist2(points[i], r.centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = dist2(points[i], r.centroids[static_cast<std::size_t>(c)]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (r.assignment[i] != best) {
        r.assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sum(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = static_cast<std::size_t>(r.assignment[i]);
      ++count[c];
      for (std::size_t j = 0; j < dim; ++j) sum[c][j] += points[i][j];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (count[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t j = 0; j < dim; ++j) r.centroids[c][j] = sum[c][j] / static_cast<double>(count[c]);
    }
  }
  r.iterations = std::min(r.iterations, 100);
  r.inertia = 0;
  for (std::size_t i = 0; i < n; ++i) r.inertia += dist2(points[i], r.centroids[static_cast<std::size_t>(r.assignment[i])]);
  return r;
}

}  // namespace slackcast::corpus
