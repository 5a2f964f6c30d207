#pragma once
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace clt {

struct KMeansResult {
  Eigen::MatrixXd centroids;  // k x d
  std::vector<int> assign;    // per row of X
  int iterations = 0;
  bool converged = false;
};

// Lloyd iterations, centers seeded by sampling k distinct input rows;
// ties in the assignment step go to the lowest cluster id, empty clusters
// are re-seeded with the point farthest from its current center
KMeansResult kmeansLloyd(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
                         int maxIter = 100, double tol = 1e-6);

// mean silhouette over all rows for a 2-cluster assignment;
// singleton clusters contribute 0 for their lone member
double meanSilhouette2(const Eigen::MatrixXd& X, const std::vector<int>& assign);

}  // namespace clt
