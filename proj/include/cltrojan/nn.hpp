#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "cltrojan/rng.hpp"

namespace clt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Fully connected layer over column batches (each column is one example).
// forward(train=true) keeps the caches backward() needs; backward()
// accumulates parameter gradients and returns the gradient w.r.t. the input.
struct DenseLayer {
  Mat w;  // out x in
  Vec b;
  bool relu = true;

  Mat gw;
  Vec gb;
  Mat vw;  // SGD momentum state
  Vec vb;
  Mat in, pre;  // forward caches (training mode only)

  Mat forward(const Mat& x, bool train);
  Mat backward(const Mat& gy);
};

struct Mlp {
  std::vector<DenseLayer> layers;

  Mlp() = default;
  // dims = {in, hidden..., out}; rectifier after every layer except the last
  // unless reluOnOutput. He-style uniform init scaled by fan-in, seeded.
  Mlp(const std::vector<int>& dims, bool reluOnOutput, Rng& rng);

  bool empty() const { return layers.empty(); }
  int inputDim() const { return layers.empty() ? 0 : (int)layers.front().w.cols(); }
  int outputDim() const { return layers.empty() ? 0 : (int)layers.back().w.rows(); }

  Mat forward(const Mat& x, bool train = true);
  Mat backward(const Mat& gy);
  void zeroGrad();
  std::size_t parameterCount() const;
  // Smallest |pre-activation| cached by the last training-mode forward.
  // Finite-difference checks use this to resample away from rectifier kinks.
  double minAbsPreactivation() const;
};

// Column-wise z / ||z||; the norm is smoothed as sqrt(z'z + eps^2) so the map
// stays differentiable at the origin.
Mat l2NormalizeCols(const Mat& z, double eps = 1e-12);
// Backward through y = z/||z||: given the forward input and dL/dy, return dL/dz.
Mat l2NormalizeColsBackward(const Mat& z, const Mat& gy, double eps = 1e-12);

struct SgdConfig {
  double lr = 0.1;
  double momentum = 0.9;
  double weightDecay = 0.0;
};

// v = mu*v + (g + wd*w); w -= lr*v. Gradients are left untouched.
void sgdStep(Mlp& net, const SgdConfig& cfg);

// target = eta*target + (1-eta)*online, elementwise over all parameters.
void emaUpdate(Mlp& target, const Mlp& online, double eta);

// Euclidean distance between parameter sets (EMA contraction checks).
double paramDistance(const Mlp& a, const Mlp& b);

}  // namespace clt
