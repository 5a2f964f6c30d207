#include "cltrojan/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cltrojan/rng.hpp"

namespace clt {

static std::vector<std::size_t> sampleDistinct(std::size_t n, std::size_t k, Rng& rng) {
  // partial Fisher-Yates over an index array
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; i++) idx[i] = i;
  for (std::size_t i = 0; i < k; i++) {
    std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

KMeansResult kmeansLloyd(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
                         int maxIter, double tol) {
  const auto n = (std::size_t)X.rows();
  if (k < 1 || (std::size_t)k > n)
    throw std::invalid_argument("kmeansLloyd: need 1 <= k <= n");
  Rng rng(seed);
  KMeansResult res;
  res.centroids.resize(k, X.cols());
  auto init = sampleDistinct(n, (std::size_t)k, rng);
  for (int c = 0; c < k; c++) res.centroids.row(c) = X.row((Eigen::Index)init[c]);
  res.assign.assign(n, 0);

  std::vector<double> bestDist(n);
  for (int it = 0; it < maxIter; it++) {
    res.iterations = it + 1;
    // assignment
    for (std::size_t i = 0; i < n; i++) {
      double best = std::numeric_limits<double>::infinity();
      int bc = 0;
      for (int c = 0; c < k; c++) {
        double d = (X.row((Eigen::Index)i) - res.centroids.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          bc = c;
        }
      }
      res.assign[i] = bc;
      bestDist[i] = best;
    }
    // update
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, X.cols());
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; i++) {
      next.row(res.assign[i]) += X.row((Eigen::Index)i);
      count[res.assign[i]]++;
    }
    for (int c = 0; c < k; c++) {
      if (count[c] > 0) {
        next.row(c) /= (double)count[c];
      } else {
        // revive with the worst-fit point
        std::size_t far = 0;
        double fd = -1;
        for (std::size_t i = 0; i < n; i++)
          if (bestDist[i] > fd) {
            fd = bestDist[i];
            far = i;
          }
        next.row(c) = X.row((Eigen::Index)far);
        bestDist[far] = 0;
      }
    }
    double shift = (next - res.centroids).rowwise().norm().maxCoeff();
    res.centroids = next;
    if (shift < tol) {
      res.converged = true;
      break;
    }
  }
  // final assignment against the last centroids
  for (std::size_t i = 0; i < n; i++) {
    double best = std::numeric_limits<double>::infinity();
    int bc = 0;
    for (int c = 0; c < k; c++) {
      double d = (X.row((Eigen::Index)i) - res.centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        bc = c;
      }
    }
    res.assign[i] = bc;
  }
  return res;
}

double meanSilhouette2(const Eigen::MatrixXd& X, const std::vector<int>& assign) {
  const auto n = (std::size_t)X.rows();
  if (assign.size() != n)
    throw std::invalid_argument("meanSilhouette2: assignment size mismatch");
  std::size_t n0 = 0, n1 = 0;
  for (int a : assign) {
    if (a == 0) n0++;
    else if (a == 1) n1++;
    else throw std::invalid_argument("meanSilhouette2: labels must be 0/1");
  }
  if (n0 == 0 || n1 == 0) return 0.0;  // degenerate single-cluster split
  double total = 0;
  for (std::size_t i = 0; i < n; i++) {
    std::size_t own = assign[i] == 0 ? n0 : n1;
    if (own == 1) continue;  // silhouette of a singleton is 0
    double sumOwn = 0, sumOther = 0;
    for (std::size_t j = 0; j < n; j++) {
      if (j == i) continue;
      double d = (X.row((Eigen::Index)i) - X.row((Eigen::Index)j)).norm();
      if (assign[j] == assign[i]) sumOwn += d;
      else sumOther += d;
    }
    double a = sumOwn / (double)(own - 1);
    double b = sumOther / (double)(assign[i] == 0 ? n1 : n0);
    double s = (b - a) / std::max(a, b);
    if (a == 0 && b == 0) s = 0;
    total += s;
  }
  return total / (double)n;
}

}  // namespace clt
