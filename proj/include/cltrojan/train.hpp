#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cltrojan/augment.hpp"
#include "cltrojan/dataset.hpp"
#include "cltrojan/losses.hpp"
#include "cltrojan/nn.hpp"

namespace clt {

enum class SslMethod { SimClr, Byol, SimSiam };

std::string sslMethodName(SslMethod m);
SslMethod sslMethodFromName(const std::string& name);

struct TrainConfig {
  SslMethod method = SslMethod::SimClr;
  double temperature = 0.5;
  double lr = 0.5;  // SimCLR desk default; 0.06 for BYOL/SimSiam
  double momentum = 0.9;
  double weightDecay = 1e-4;  // 5e-4 for SimSiam
  int batchSize = 128;
  int epochs = 100;
  double emaDecay = 0.996;
  std::uint64_t seed = 1;
  std::vector<int> encoderDims = {3072, 512, 256};
  int projectorHidden = 512;
  int projectorOut = 128;
  int predictorHidden = 512;
  int threads = 1;
};

// Defaults above are SimCLR's; this swaps in the method-specific lr / decay.
TrainConfig defaultTrainConfig(SslMethod m);
void validateTrainConfig(const TrainConfig& cfg);

struct SslModel {
  SslMethod method = SslMethod::SimClr;
  double emaDecay = 0.996;
  Mlp encoder;
  Mlp projector;
  Mlp predictor;        // BYOL / SimSiam only
  Mlp targetEncoder;    // BYOL only
  Mlp targetProjector;  // BYOL only
};

struct LossTrace {
  std::vector<double> epochMean;  // [epochs]
  Mat perSample;                  // epochs x n, anchor-averaged per input
};

SslModel initSslModel(const TrainConfig& cfg);

// Model-input columns: fixed spectral stem (YCbCr, orthonormal blockwise
// DCT, sqrt(1+u+v) band gain, 1/255 scale), one column per image. Parameter-
// free; gives the fully-connected stack the band-organized, scale-balanced
// input a convolutional backbone gets from its filter geometry.
Vec flattenInput(const ImageTensor& img);
Mat imagesToColumns(const std::vector<ImageTensor>& images, int threads = 1);

// Self-supervised pre-training: two augmented views per sample per step, SGD
// with momentum, weight decay and a cosine-annealed rate, deterministic for
// a given (seed, cfg, policy) at any thread count. Labels are ignored.
// Throws DivergenceError on a non-finite loss.
SslModel pretrain(const LabeledDataset& data, const TrainConfig& cfg, const AugmentPolicy& policy,
                  LossTrace* trace = nullptr);

struct FinetuneConfig {
  double lr = 0.2;
  double momentum = 0.9;
  int epochs = 20;  // cosine-annealed
  int batchSize = 32;
  int hidden = 128;
  bool freezeEncoder = true;
  // full-model mode trains the raw-pixel encoder at a fraction of the head
  // rate; the head rate alone blows up a pixel-input MLP
  double encoderLrScale = 0.1;
  std::uint64_t seed = 2;
  int threads = 1;
};

// Cross-entropy classifier head over encoder features. Frozen mode leaves the
// encoder bit-identical; full-model mode updates it in place.
Mlp finetuneClassifier(Mlp& encoder, const LabeledDataset& labeled, int classCount,
                       const FinetuneConfig& cfg);

struct SupervisedModel {
  Mlp encoder;
  Mlp classifier;
};

struct SupervisedConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weightDecay = 1e-4;
  int batchSize = 128;
  int epochs = 20;
  std::uint64_t seed = 3;
  std::vector<int> encoderDims = {3072, 512, 256};
  int hidden = 128;
  int threads = 1;
};

// End-to-end supervised baseline over a label-flipped poisoned set; per-sample
// cross-entropy trace recorded per epoch for loss-based isolation defenses.
SupervisedModel supervisedTrojanTrain(const LabeledDataset& poisoned, int classCount,
                                      const SupervisedConfig& cfg, LossTrace* trace = nullptr);

// Eval-mode logits of classifier(encoder(x)) over a whole set, batched.
Mat classifierLogits(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& images,
                     int batchSize = 512, int threads = 1);

}  // namespace clt
