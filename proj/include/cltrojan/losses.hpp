#pragma once

#include <vector>

#include "cltrojan/nn.hpp"

namespace clt {

struct LossValue {
  double loss = 0;  // batch mean
  Vec perAnchor;    // one entry per input column
  Mat grad;         // dL/d(first input), same shape
};

// Contrastive batch loss over 2N normalized feature columns; columns 2i and
// 2i+1 are the two views of sample i. For each anchor the positive is its
// paired view and the denominator runs over every other column (the positive
// plus the 2(N-1) views of the other samples). Gradient is analytic:
// dL/dZ = (1/(M*tau)) * Z * (P + P' - 2A) with P the self-masked softmax
// probabilities and A the view-pairing permutation, M = 2N.
LossValue infoNceLoss(const Mat& z, double tau);

// Mean per-pair squared distance ||online_i - target_i||^2 between matched
// columns. Gradient is returned for the online side only; the target side is
// behind a stop-gradient by contract. Inputs must be L2-normalized, making
// the loss equal to 2 - 2*online'target per pair.
LossValue squaredDistanceLoss(const Mat& online, const Mat& target);

// Softmax cross-entropy over logits columns; labels index rows.
LossValue crossEntropyLoss(const Mat& logits, const std::vector<int>& labels);

}  // namespace clt
