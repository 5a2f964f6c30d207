#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cltrojan/dataset.hpp"
#include "cltrojan/nn.hpp"

namespace clt {

// Shared result shape for the three detectors; only the fields a given
// defense fills are meaningful (AC has no threshold, loss isolation has no
// calibration target).
struct DetectionReport {
  std::string defense;
  std::vector<double> classSilhouette;  // activation clustering: one per class
  int flaggedClass = -1;                // activation clustering: top silhouette
  std::vector<double> scores;           // per-input suspicion scores
  std::vector<std::size_t> flagged;     // indices declared poison
  double threshold = 0;
  double targetFpr = 0;
  bool degenerateThreshold = false;
  double fpr = 0, tpr = 0;
};

// Fills fpr/tpr of `rep.flagged` against the ground-truth poison index set.
void scoreAgainstManifest(DetectionReport& rep, std::size_t total,
                          const std::vector<std::size_t>& poisonIndices);

// Activations of the classifier's last hidden layer (its input features when
// the classifier is a single layer), one column per image.
Mat penultimateFeatures(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& images,
                        int batchSize = 512, int threads = 1);

// Per class: 2-means over that class's feature columns and the mean
// silhouette; the class with the highest silhouette is flagged and its
// smaller cluster declared poison. Every class needs >= 2 samples.
DetectionReport activationClustering(const Mat& features, const std::vector<int>& labels,
                                     int classCount, const std::vector<std::size_t>& poisonIndices,
                                     std::uint64_t seed);

// Entropy of the predicted-class histogram over nPerturb equal-weight blends
// of each input with random overlays (drawn with replacement, per-input
// stream). Low entropy marks a suspected trigger input.
std::vector<double> stripScores(Mlp& encoder, Mlp& classifier,
                                const std::vector<ImageTensor>& inputs,
                                const std::vector<ImageTensor>& overlays, int nPerturb,
                                std::uint64_t seed, int threads = 1);

struct ThresholdCalibration {
  double threshold = 0;    // flag score <= threshold
  bool degenerate = false; // ties straddle the cut (e.g. all-equal scores)
};

// Empirical quantile of clean scores: with k = floor(targetFpr * n) the
// k lowest clean scores fall at or below the threshold, so the clean
// false-flag rate matches targetFpr within 1/n; k = 0 flags nothing.
ThresholdCalibration calibrateThreshold(std::vector<double> cleanScores, double targetFpr);

std::vector<std::size_t> flagByThreshold(const std::vector<double>& scores, double threshold);

// Ranks samples by mean loss over the first earlyEpochs rows of a per-sample
// trace (epochs x n), ascending, and returns the lowest round(fraction * n)
// indices, most suspicious first.
std::vector<std::size_t> ablIsolate(const Mat& perSampleLoss, int earlyEpochs,
                                    double isolationFraction);

// Mean poison-sample loss minus mean clean-sample loss at one trace row;
// strongly negative means the low-loss early-training signature is present.
double lossSeparation(const Mat& perSampleLoss, int epochRow,
                      const std::vector<std::size_t>& poisonIndices);

struct UnlearnConfig {
  double lr = 0.001;
  int batchSize = 128;
  int epochs = 1;
  int threads = 1;
};

// Optional follow-up to isolation: gradient ascent on the cross-entropy of
// the flagged samples, in place.
void ablUnlearn(Mlp& encoder, Mlp& classifier, const LabeledDataset& data,
                const std::vector<std::size_t>& flagged, const UnlearnConfig& cfg);

// CSV rows (defense, fpr_target, threshold, fpr, tpr), one line per report.
void saveDetectionCsv(const std::string& path, const std::vector<DetectionReport>& reports);

}  // namespace clt
