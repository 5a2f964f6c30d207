#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cltrojan/augment.hpp"
#include "cltrojan/dataset.hpp"
#include "cltrojan/train.hpp"
#include "cltrojan/trigger.hpp"

namespace clt {

std::vector<int> predictLabels(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& images,
                               int batchSize = 512, int threads = 1);

// Fraction of correct predictions on a labeled set.
double accuracy(Mlp& encoder, Mlp& classifier, const LabeledDataset& test, int threads = 1);

// Fraction of the (already trigger-embedded) set classified as the target.
double attackSuccessRate(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& triggeredTest,
                         int targetClass, int threads = 1);

// Eval-mode encoder features, one column per image, optionally L2-normalized.
Mat encodeFeatures(Mlp& encoder, const std::vector<ImageTensor>& images, bool normalize,
                   int batchSize = 512, int threads = 1);

// Indices of the k nearest columns of refs to query (Euclidean); exact ties
// resolve to the lowest index.
std::vector<std::size_t> knnIndices(const Mat& refs, const Vec& query, int k);

struct ERConfig {
  int perClass = 200;  // clean inputs sampled per class
  int augDraws = 5;    // augmented views kept per sampled input
  int probeCount = 300;
  int k = 50;
  int targetClass = 0;
  std::uint64_t seed = 0xE7;
};

struct ERReport {
  double er = 0;
  std::size_t neighborPoolSize = 0;
  int probeCount = 0;
  int k = 0;
  int targetClass = 0;
};

// Exhaustive-search core: mean over probe columns of the class-target
// fraction among the k nearest neighbor-pool columns.
double entanglementRatioFromFeatures(const Mat& poolFeats, const std::vector<int>& poolClasses,
                                     const Mat& probeFeats, int k, int targetClass);

// Entanglement ratio of a trained encoder: per class, sample `perClass` clean
// inputs and keep `augDraws` augmented views each (the neighbor pool); embed
// the trigger into `probeCount` inputs disjoint from that sample (the
// probes); average the class-target fraction among each probe's k nearest
// normalized encoder features.
ERReport entanglementRatio(Mlp& encoder, const LabeledDataset& data, const ERConfig& cfg,
                           const TriggerSpec& trigger, const AugmentPolicy& policy, int threads = 1);

// CSV: index,label,is_triggered,f0..f{d-1} with normalized feature rows.
// triggeredFlags may be empty (all rows written as clean).
void exportFeatures(Mlp& encoder, const LabeledDataset& data,
                    const std::vector<std::uint8_t>& triggeredFlags, const std::string& path,
                    int threads = 1);

}  // namespace clt
