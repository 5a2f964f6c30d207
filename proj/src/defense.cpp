#include "cltrojan/defense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "cltrojan/errors.hpp"
#include "cltrojan/kmeans.hpp"
#include "cltrojan/losses.hpp"
#include "cltrojan/parallel.hpp"
#include "cltrojan/rng.hpp"
#include "cltrojan/train.hpp"

namespace clt {

void scoreAgainstManifest(DetectionReport& rep, std::size_t total,
                          const std::vector<std::size_t>& poisonIndices) {
  std::unordered_set<std::size_t> poison(poisonIndices.begin(), poisonIndices.end());
  for (std::size_t i : poison)
    if (i >= total) throw std::invalid_argument("scoreAgainstManifest: poison index out of range");
  std::size_t hits = 0, falseFlags = 0;
  std::unordered_set<std::size_t> seen;
  for (std::size_t i : rep.flagged) {
    if (i >= total) throw std::invalid_argument("scoreAgainstManifest: flagged index out of range");
    if (!seen.insert(i).second) throw std::invalid_argument("scoreAgainstManifest: duplicate flag");
    (poison.count(i) ? hits : falseFlags)++;
  }
  const std::size_t cleanTotal = total - poison.size();
  rep.tpr = poison.empty() ? 0.0 : (double)hits / (double)poison.size();
  rep.fpr = cleanTotal == 0 ? 0.0 : (double)falseFlags / (double)cleanTotal;
}

Mat penultimateFeatures(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& images,
                        int batchSize, int threads) {
  if (classifier.empty()) throw std::invalid_argument("penultimateFeatures: empty classifier");
  const Eigen::Index outDim = classifier.layers.size() > 1
                                  ? classifier.layers[classifier.layers.size() - 2].w.rows()
                                  : (Eigen::Index)classifier.inputDim();
  Mat out(outDim, (Eigen::Index)images.size());
  for (std::size_t lo = 0; lo < images.size(); lo += (std::size_t)batchSize) {
    const std::size_t hi = std::min(images.size(), lo + (std::size_t)batchSize);
    std::vector<ImageTensor> chunk(images.begin() + (std::ptrdiff_t)lo,
                                   images.begin() + (std::ptrdiff_t)hi);
    Mat h = encoder.empty() ? imagesToColumns(chunk, threads)
                            : encoder.forward(imagesToColumns(chunk, threads), false);
    for (std::size_t l = 0; l + 1 < classifier.layers.size(); l++)
      h = classifier.layers[l].forward(h, false);
    out.middleCols((Eigen::Index)lo, (Eigen::Index)(hi - lo)) = h;
  }
  return out;
}

DetectionReport activationClustering(const Mat& features, const std::vector<int>& labels,
                                     int classCount, const std::vector<std::size_t>& poisonIndices,
                                     std::uint64_t seed) {
  if ((std::size_t)features.cols() != labels.size())
    throw std::invalid_argument("activationClustering: one label per feature column required");
  if (classCount < 1) throw std::invalid_argument("activationClustering: need at least one class");
  std::vector<std::vector<std::size_t>> byClass((std::size_t)classCount);
  for (std::size_t i = 0; i < labels.size(); i++) {
    if (labels[i] < 0 || labels[i] >= classCount)
      throw std::invalid_argument("activationClustering: label out of range");
    byClass[(std::size_t)labels[i]].push_back(i);
  }
  for (const auto& members : byClass)
    if (members.size() < 2)
      throw std::invalid_argument("activationClustering: every class needs >= 2 samples");

  DetectionReport rep;
  rep.defense = "activation-clustering";
  rep.classSilhouette.resize((std::size_t)classCount);
  std::vector<std::vector<int>> assignments((std::size_t)classCount);
  for (int c = 0; c < classCount; c++) {
    const auto& members = byClass[(std::size_t)c];
    Mat X((Eigen::Index)members.size(), features.rows());
    for (std::size_t r = 0; r < members.size(); r++)
      X.row((Eigen::Index)r) = features.col((Eigen::Index)members[r]).transpose();
    KMeansResult km = kmeansLloyd(X, 2, mixSeed(seed, 0xAC, (std::uint64_t)c));
    rep.classSilhouette[(std::size_t)c] = meanSilhouette2(X, km.assign);
    assignments[(std::size_t)c] = std::move(km.assign);
  }

  rep.flaggedClass = (int)(std::max_element(rep.classSilhouette.begin(), rep.classSilhouette.end()) -
                           rep.classSilhouette.begin());
  const auto& assign = assignments[(std::size_t)rep.flaggedClass];
  const auto ones = (std::size_t)std::count(assign.begin(), assign.end(), 1);
  const int poisonCluster = ones < assign.size() - ones ? 1 : 0;  // smaller; tie goes to 0
  const auto& members = byClass[(std::size_t)rep.flaggedClass];
  for (std::size_t r = 0; r < members.size(); r++)
    if (assign[r] == poisonCluster) rep.flagged.push_back(members[r]);
  scoreAgainstManifest(rep, labels.size(), poisonIndices);
  return rep;
}

namespace {

ImageTensor blendEqual(const ImageTensor& a, const ImageTensor& b) {
  ImageTensor out = a;
  for (std::size_t i = 0; i < out.data.size(); i++)
    out.data[i] = clampTo(0.5 * (a.data[i] + b.data[i]), a.range);
  return out;
}

double histogramEntropy(const std::vector<std::size_t>& counts, std::size_t total) {
  double h = 0;
  for (std::size_t c : counts)
    if (c > 0) {
      const double p = (double)c / (double)total;
      h -= p * std::log(p);
    }
  return h;
}

}  // namespace

std::vector<double> stripScores(Mlp& encoder, Mlp& classifier,
                                const std::vector<ImageTensor>& inputs,
                                const std::vector<ImageTensor>& overlays, int nPerturb,
                                std::uint64_t seed, int threads) {
  if (overlays.empty()) throw std::invalid_argument("stripScores: empty overlay set");
  if (nPerturb < 2) throw std::invalid_argument("stripScores: need at least two perturbations");
  for (const auto& o : overlays)
    if (!o.sameShape(inputs.empty() ? o : inputs[0]) ||
        (!inputs.empty() && o.range != inputs[0].range))
      throw std::invalid_argument("stripScores: overlay shape/range mismatch");

  const int classCount = (int)classifier.outputDim();
  std::vector<double> scores(inputs.size());
  parallelFor(threads, inputs.size(), [&](std::size_t i) {
    Rng rng(mixSeed(seed, 0x57A1, (std::uint64_t)i));
    std::vector<ImageTensor> blends((std::size_t)nPerturb);
    for (int p = 0; p < nPerturb; p++)
      blends[(std::size_t)p] = blendEqual(inputs[i], overlays[rng.below(overlays.size())]);
    Mat logits = classifier.forward(encoder.forward(imagesToColumns(blends), false), false);
    std::vector<std::size_t> counts((std::size_t)classCount, 0);
    for (Eigen::Index j = 0; j < logits.cols(); j++) {
      Eigen::Index arg;
      logits.col(j).maxCoeff(&arg);
      counts[(std::size_t)arg]++;
    }
    scores[i] = histogramEntropy(counts, (std::size_t)nPerturb);
  });
  return scores;
}

ThresholdCalibration calibrateThreshold(std::vector<double> cleanScores, double targetFpr) {
  if (cleanScores.empty()) throw std::invalid_argument("calibrateThreshold: empty calibration set");
  if (!(targetFpr > 0.0 && targetFpr < 1.0))
    throw std::invalid_argument("calibrateThreshold: target rate must lie in (0,1)");
  std::sort(cleanScores.begin(), cleanScores.end());
  const std::size_t n = cleanScores.size();
  const auto k = (std::size_t)std::floor(targetFpr * (double)n);
  ThresholdCalibration cal;
  if (k == 0) {
    cal.threshold = -std::numeric_limits<double>::infinity();
    return cal;
  }
  cal.threshold = cleanScores[k - 1];
  cal.degenerate = k < n && cleanScores[k] == cal.threshold;
  return cal;
}

std::vector<std::size_t> flagByThreshold(const std::vector<double>& scores, double threshold) {
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < scores.size(); i++)
    if (scores[i] <= threshold) flagged.push_back(i);
  return flagged;
}

std::vector<std::size_t> ablIsolate(const Mat& perSampleLoss, int earlyEpochs,
                                    double isolationFraction) {
  if (earlyEpochs < 1) throw std::invalid_argument("ablIsolate: window must cover an epoch");
  if (earlyEpochs > perSampleLoss.rows())
    throw std::invalid_argument("ablIsolate: window exceeds trace length");
  if (isolationFraction < 0.0 || isolationFraction > 1.0)
    throw std::invalid_argument("ablIsolate: fraction outside [0,1]");
  const std::size_t n = (std::size_t)perSampleLoss.cols();
  const Vec mean = perSampleLoss.topRows(earlyEpochs).colwise().mean().transpose();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (mean[(Eigen::Index)a] != mean[(Eigen::Index)b])
      return mean[(Eigen::Index)a] < mean[(Eigen::Index)b];
    return a < b;
  });
  const auto take = std::min(n, (std::size_t)std::llround(isolationFraction * (double)n));
  order.resize(take);
  return order;
}

double lossSeparation(const Mat& perSampleLoss, int epochRow,
                      const std::vector<std::size_t>& poisonIndices) {
  if (epochRow < 0 || epochRow >= perSampleLoss.rows())
    throw std::invalid_argument("lossSeparation: epoch row out of range");
  const std::size_t n = (std::size_t)perSampleLoss.cols();
  std::unordered_set<std::size_t> poison(poisonIndices.begin(), poisonIndices.end());
  for (std::size_t i : poison)
    if (i >= n) throw std::invalid_argument("lossSeparation: poison index out of range");
  if (poison.empty() || poison.size() == n)
    throw std::invalid_argument("lossSeparation: need both poison and clean samples");
  double poisonSum = 0, cleanSum = 0;
  for (std::size_t i = 0; i < n; i++)
    (poison.count(i) ? poisonSum : cleanSum) += perSampleLoss(epochRow, (Eigen::Index)i);
  return poisonSum / (double)poison.size() - cleanSum / (double)(n - poison.size());
}

void ablUnlearn(Mlp& encoder, Mlp& classifier, const LabeledDataset& data,
                const std::vector<std::size_t>& flagged, const UnlearnConfig& cfg) {
  if (cfg.lr <= 0 || cfg.batchSize < 1 || cfg.epochs < 1)
    throw std::invalid_argument("ablUnlearn: bad config");
  for (std::size_t i : flagged)
    if (i >= data.size()) throw std::invalid_argument("ablUnlearn: flagged index out of range");
  if (flagged.empty()) return;
  const SgdConfig sgd{cfg.lr, 0.0, 0.0};
  for (int e = 0; e < cfg.epochs; e++) {
    for (std::size_t lo = 0; lo < flagged.size(); lo += (std::size_t)cfg.batchSize) {
      const std::size_t hi = std::min(flagged.size(), lo + (std::size_t)cfg.batchSize);
      std::vector<ImageTensor> chunk;
      std::vector<int> labels;
      for (std::size_t r = lo; r < hi; r++) {
        chunk.push_back(data.images[flagged[r]]);
        labels.push_back(data.labels[flagged[r]]);
      }
      encoder.zeroGrad();
      classifier.zeroGrad();
      const Mat logits =
          classifier.forward(encoder.forward(imagesToColumns(chunk, cfg.threads), true), true);
      LossValue ce = crossEntropyLoss(logits, labels);
      encoder.backward(classifier.backward(-ce.grad));  // ascent on the flagged loss
      sgdStep(encoder, sgd);
      sgdStep(classifier, sgd);
    }
  }
}

void saveDetectionCsv(const std::string& path, const std::vector<DetectionReport>& reports) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(12);
  out << "defense,fpr_target,threshold,fpr,tpr\n";
  for (const auto& r : reports)
    out << r.defense << ',' << r.targetFpr << ',' << r.threshold << ',' << r.fpr << ',' << r.tpr
        << '\n';
  if (!out) throw IoError("short write to " + path);
}

}  // namespace clt
