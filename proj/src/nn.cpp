#include "cltrojan/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace clt {

Mat DenseLayer::forward(const Mat& x, bool train) {
  if (x.rows() != w.cols()) throw std::invalid_argument("dense layer: input dimension mismatch");
  Mat p = (w * x).colwise() + b;
  if (train) {
    in = x;
    pre = p;
  }
  return relu ? p.cwiseMax(0.0) : p;
}

Mat DenseLayer::backward(const Mat& gy) {
  if (in.size() == 0) throw std::logic_error("dense layer: backward without a training forward");
  Mat gp = gy;
  if (relu) gp.array() *= (pre.array() > 0.0).cast<double>();
  gw += gp * in.transpose();
  gb += gp.rowwise().sum();
  return w.transpose() * gp;
}

Mlp::Mlp(const std::vector<int>& dims, bool reluOnOutput, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("mlp: need at least input and output dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("mlp: non-positive layer dim");
  layers.resize(dims.size() - 1);
  for (std::size_t l = 0; l < layers.size(); l++) {
    DenseLayer& lay = layers[l];
    const int fanIn = dims[l], fanOut = dims[l + 1];
    lay.w.resize(fanOut, fanIn);
    const double limit = std::sqrt(6.0 / fanIn);
    for (int i = 0; i < fanOut; i++)
      for (int j = 0; j < fanIn; j++) lay.w(i, j) = rng.uniform(-limit, limit);
    lay.b = Vec::Zero(fanOut);
    lay.relu = (l + 1 < layers.size()) || reluOnOutput;
    lay.gw = Mat::Zero(fanOut, fanIn);
    lay.gb = Vec::Zero(fanOut);
    lay.vw = Mat::Zero(fanOut, fanIn);
    lay.vb = Vec::Zero(fanOut);
  }
}

Mat Mlp::forward(const Mat& x, bool train) {
  Mat h = x;
  for (auto& l : layers) h = l.forward(h, train);
  return h;
}

Mat Mlp::backward(const Mat& gy) {
  Mat g = gy;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) g = it->backward(g);
  return g;
}

void Mlp::zeroGrad() {
  for (auto& l : layers) {
    l.gw.setZero();
    l.gb.setZero();
  }
}

std::size_t Mlp::parameterCount() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += (std::size_t)l.w.size() + (std::size_t)l.b.size();
  return n;
}

double Mlp::minAbsPreactivation() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& l : layers) {
    if (!l.relu || l.pre.size() == 0) continue;
    m = std::min(m, l.pre.array().abs().minCoeff());
  }
  return m;
}

Mat l2NormalizeCols(const Mat& z, double eps) {
  Mat y = z;
  for (Eigen::Index c = 0; c < z.cols(); c++) {
    const double n = std::sqrt(z.col(c).squaredNorm() + eps * eps);
    y.col(c) /= n;
  }
  return y;
}

Mat l2NormalizeColsBackward(const Mat& z, const Mat& gy, double eps) {
  if (z.rows() != gy.rows() || z.cols() != gy.cols())
    throw std::invalid_argument("normalize backward: shape mismatch");
  Mat gz(z.rows(), z.cols());
  for (Eigen::Index c = 0; c < z.cols(); c++) {
    const double n = std::sqrt(z.col(c).squaredNorm() + eps * eps);
    const Vec y = z.col(c) / n;
    gz.col(c) = (gy.col(c) - y * y.dot(gy.col(c))) / n;
  }
  return gz;
}

void sgdStep(Mlp& net, const SgdConfig& cfg) {
  for (auto& l : net.layers) {
    l.vw = cfg.momentum * l.vw + (l.gw + cfg.weightDecay * l.w);
    l.vb = cfg.momentum * l.vb + (l.gb + cfg.weightDecay * l.b);
    l.w -= cfg.lr * l.vw;
    l.b -= cfg.lr * l.vb;
  }
}

void emaUpdate(Mlp& target, const Mlp& online, double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("ema: eta must lie in [0,1]");
  if (target.layers.size() != online.layers.size()) throw std::invalid_argument("ema: layer count mismatch");
  for (std::size_t i = 0; i < target.layers.size(); i++) {
    auto& t = target.layers[i];
    const auto& o = online.layers[i];
    if (t.w.rows() != o.w.rows() || t.w.cols() != o.w.cols())
      throw std::invalid_argument("ema: parameter shape mismatch");
    t.w = eta * t.w + (1.0 - eta) * o.w;
    t.b = eta * t.b + (1.0 - eta) * o.b;
  }
}

double paramDistance(const Mlp& a, const Mlp& b) {
  if (a.layers.size() != b.layers.size()) throw std::invalid_argument("paramDistance: layer count mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.layers.size(); i++) {
    s += (a.layers[i].w - b.layers[i].w).squaredNorm();
    s += (a.layers[i].b - b.layers[i].b).squaredNorm();
  }
  return std::sqrt(s);
}

}  // namespace clt
