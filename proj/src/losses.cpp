#include "cltrojan/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace clt {

namespace {

void requireNormalizedCols(const Mat& z, const char* who) {
  for (Eigen::Index c = 0; c < z.cols(); c++) {
    // loose enough that finite-difference probes (h=1e-5) stay legal
    if (std::abs(z.col(c).norm() - 1.0) > 1e-4)
      throw std::invalid_argument(std::string(who) + ": features must be L2-normalized");
  }
}

}  // namespace

LossValue infoNceLoss(const Mat& z, double tau) {
  const Eigen::Index m = z.cols();
  if (tau <= 0.0) throw std::invalid_argument("infoNCE: temperature must be positive");
  if (m < 4 || m % 2 != 0) throw std::invalid_argument("infoNCE: need an even batch of at least 2 samples");
  requireNormalizedCols(z, "infoNCE");

  Mat s = (z.transpose() * z) / tau;

  // row-stable softmax with the self column masked out
  Mat p = Mat::Zero(m, m);
  LossValue out;
  out.perAnchor = Vec::Zero(m);
  for (Eigen::Index i = 0; i < m; i++) {
    const Eigen::Index pair = (i % 2 == 0) ? i + 1 : i - 1;
    double rowMax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; j++)
      if (j != i) rowMax = std::max(rowMax, s(i, j));
    double denom = 0;
    for (Eigen::Index j = 0; j < m; j++) {
      if (j == i) continue;
      const double e = std::exp(s(i, j) - rowMax);
      p(i, j) = e;
      denom += e;
    }
    p.row(i) /= denom;
    out.perAnchor(i) = std::log(denom) + rowMax - s(i, pair);
  }
  out.loss = out.perAnchor.mean();

  Mat g = p;  // P - A
  for (Eigen::Index i = 0; i < m; i++) {
    const Eigen::Index pair = (i % 2 == 0) ? i + 1 : i - 1;
    g(i, pair) -= 1.0;
  }
  out.grad = z * (g + g.transpose()) / (tau * (double)m);
  return out;
}

LossValue squaredDistanceLoss(const Mat& online, const Mat& target) {
  if (online.rows() != target.rows() || online.cols() != target.cols())
    throw std::invalid_argument("squaredDistanceLoss: shape mismatch");
  if (online.cols() == 0) throw std::invalid_argument("squaredDistanceLoss: empty batch");
  requireNormalizedCols(online, "squaredDistanceLoss");
  requireNormalizedCols(target, "squaredDistanceLoss");

  const Eigen::Index n = online.cols();
  LossValue out;
  out.perAnchor = (online - target).colwise().squaredNorm().transpose();
  out.loss = out.perAnchor.mean();
  out.grad = 2.0 * (online - target) / (double)n;
  return out;
}

LossValue crossEntropyLoss(const Mat& logits, const std::vector<int>& labels) {
  const Eigen::Index n = logits.cols(), c = logits.rows();
  if ((std::size_t)n != labels.size()) throw std::invalid_argument("crossEntropy: label count mismatch");
  if (n == 0) throw std::invalid_argument("crossEntropy: empty batch");

  LossValue out;
  out.perAnchor = Vec::Zero(n);
  out.grad = Mat::Zero(c, n);
  for (Eigen::Index i = 0; i < n; i++) {
    const int y = labels[(std::size_t)i];
    if (y < 0 || y >= c) throw std::invalid_argument("crossEntropy: label out of range");
    const double mx = logits.col(i).maxCoeff();
    Vec e = (logits.col(i).array() - mx).exp();
    const double denom = e.sum();
    out.perAnchor(i) = std::log(denom) + mx - logits(y, i);
    out.grad.col(i) = e / denom / (double)n;
    out.grad(y, i) -= 1.0 / (double)n;
  }
  out.loss = out.perAnchor.mean();
  return out;
}

}  // namespace clt
