#include "cltrojan/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cltrojan/errors.hpp"
#include "cltrojan/parallel.hpp"

namespace clt {

std::vector<int> predictLabels(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& images,
                               int batchSize, int threads) {
  Mat logits = classifierLogits(encoder, classifier, images, batchSize, threads);
  std::vector<int> out((std::size_t)logits.cols());
  for (Eigen::Index i = 0; i < logits.cols(); i++) {
    Eigen::Index arg;
    logits.col(i).maxCoeff(&arg);
    out[(std::size_t)i] = (int)arg;
  }
  return out;
}

double accuracy(Mlp& encoder, Mlp& classifier, const LabeledDataset& test, int threads) {
  if (test.images.empty()) throw std::invalid_argument("accuracy: empty test set");
  if (test.images.size() != test.labels.size()) throw std::invalid_argument("accuracy: label count mismatch");
  const std::vector<int> pred = predictLabels(encoder, classifier, test.images, 512, threads);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); i++)
    if (pred[i] == test.labels[i]) ok++;
  return (double)ok / (double)pred.size();
}

double attackSuccessRate(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& triggeredTest,
                         int targetClass, int threads) {
  if (triggeredTest.empty()) throw std::invalid_argument("attackSuccessRate: empty test set");
  const std::vector<int> pred = predictLabels(encoder, classifier, triggeredTest, 512, threads);
  std::size_t hits = 0;
  for (int p : pred)
    if (p == targetClass) hits++;
  return (double)hits / (double)pred.size();
}

Mat encodeFeatures(Mlp& encoder, const std::vector<ImageTensor>& images, bool normalize,
                   int batchSize, int threads) {
  if (images.empty()) return Mat(encoder.outputDim(), 0);
  Mat out(encoder.outputDim(), (Eigen::Index)images.size());
  for (std::size_t lo = 0; lo < images.size(); lo += (std::size_t)batchSize) {
    const std::size_t hi = std::min(images.size(), lo + (std::size_t)batchSize);
    std::vector<ImageTensor> chunk(images.begin() + (std::ptrdiff_t)lo,
                                   images.begin() + (std::ptrdiff_t)hi);
    Mat x = imagesToColumns(chunk, threads);
    out.middleCols((Eigen::Index)lo, (Eigen::Index)(hi - lo)) = encoder.forward(x, false);
  }
  return normalize ? l2NormalizeCols(out) : out;
}

std::vector<std::size_t> knnIndices(const Mat& refs, const Vec& query, int k) {
  const std::size_t r = (std::size_t)refs.cols();
  if (k <= 0 || (std::size_t)k > r) throw std::invalid_argument("knn: k out of range");
  if (refs.rows() != query.size()) throw std::invalid_argument("knn: dimension mismatch");
  std::vector<std::pair<double, std::size_t>> d(r);
  for (std::size_t i = 0; i < r; i++)
    d[i] = {(refs.col((Eigen::Index)i) - query).squaredNorm(), i};
  std::partial_sort(d.begin(), d.begin() + k, d.end());  // pair order = (distance, index)
  std::vector<std::size_t> out((std::size_t)k);
  for (int i = 0; i < k; i++) out[(std::size_t)i] = d[(std::size_t)i].second;
  return out;
}

double entanglementRatioFromFeatures(const Mat& poolFeats, const std::vector<int>& poolClasses,
                                     const Mat& probeFeats, int k, int targetClass) {
  if ((std::size_t)poolFeats.cols() != poolClasses.size())
    throw std::invalid_argument("entanglement: pool class count mismatch");
  if (probeFeats.cols() == 0) throw std::invalid_argument("entanglement: no probes");
  if (k <= 0 || k > poolFeats.cols()) throw std::invalid_argument("entanglement: k exceeds the pool");
  double sum = 0;
  for (Eigen::Index p = 0; p < probeFeats.cols(); p++) {
    const auto nn = knnIndices(poolFeats, probeFeats.col(p), k);
    std::size_t hits = 0;
    for (std::size_t idx : nn)
      if (poolClasses[idx] == targetClass) hits++;
    sum += (double)hits / (double)k;
  }
  return sum / (double)probeFeats.cols();
}

ERReport entanglementRatio(Mlp& encoder, const LabeledDataset& data, const ERConfig& cfg,
                           const TriggerSpec& trigger, const AugmentPolicy& policy, int threads) {
  if (cfg.perClass <= 0 || cfg.augDraws <= 0 || cfg.probeCount <= 0 || cfg.k <= 0)
    throw std::invalid_argument("entanglement: config values must be positive");
  if (data.classCount <= 0) throw std::invalid_argument("entanglement: dataset missing class count");
  if (cfg.targetClass < 0 || cfg.targetClass >= data.classCount)
    throw std::invalid_argument("entanglement: target class out of range");
  const std::size_t poolSize = (std::size_t)data.classCount * (std::size_t)cfg.perClass * (std::size_t)cfg.augDraws;
  if ((std::size_t)cfg.k > poolSize) throw std::invalid_argument("entanglement: k exceeds the neighbor pool");
  validateAugmentPolicy(policy);
  validateTriggerSpec(trigger);

  // clean sample: perClass indices from every class
  std::vector<std::size_t> cleanIdx;
  std::vector<int> cleanCls;
  std::vector<char> taken(data.size(), 0);
  for (int c = 0; c < data.classCount; c++) {
    std::vector<std::size_t> pool = classIndices(data, c);
    if (pool.size() < (std::size_t)cfg.perClass)
      throw std::invalid_argument("entanglement: class " + std::to_string(c) +
                                  " smaller than the per-class sample");
    Rng rng(mixSeed(cfg.seed, 0xD0, (std::uint64_t)c));
    for (int i = 0; i < cfg.perClass; i++) {  // partial Fisher-Yates
      const std::size_t j = i + rng.below(pool.size() - (std::size_t)i);
      std::swap(pool[(std::size_t)i], pool[j]);
      cleanIdx.push_back(pool[(std::size_t)i]);
      cleanCls.push_back(c);
      taken[pool[(std::size_t)i]] = 1;
    }
  }

  // probes: disjoint from the clean sample, any class
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < data.size(); i++)
    if (!taken[i]) rest.push_back(i);
  if (rest.size() < (std::size_t)cfg.probeCount)
    throw std::invalid_argument("entanglement: not enough inputs left for disjoint probes");
  Rng prng(mixSeed(cfg.seed, 0xB0));
  for (int i = 0; i < cfg.probeCount; i++) {
    const std::size_t j = (std::size_t)i + prng.below(rest.size() - (std::size_t)i);
    std::swap(rest[(std::size_t)i], rest[j]);
  }

  // augmented neighbor pool
  std::vector<ImageTensor> poolImgs(cleanIdx.size() * (std::size_t)cfg.augDraws);
  std::vector<int> poolCls(poolImgs.size());
  parallelFor(threads, cleanIdx.size(), [&](std::size_t i) {
    for (int d = 0; d < cfg.augDraws; d++) {
      const std::size_t slot = i * (std::size_t)cfg.augDraws + (std::size_t)d;
      poolImgs[slot] = augmentSeeded(data.images[cleanIdx[i]], policy,
                                     mixSeed(cfg.seed, 0xA7, cleanIdx[i], (std::uint64_t)d));
      poolCls[slot] = cleanCls[i];
    }
  });

  std::vector<ImageTensor> probeImgs((std::size_t)cfg.probeCount);
  parallelFor(threads, probeImgs.size(),
              [&](std::size_t i) { probeImgs[i] = applyTrigger(data.images[rest[i]], trigger); });

  Mat poolFeats = encodeFeatures(encoder, poolImgs, true, 512, threads);
  Mat probeFeats = encodeFeatures(encoder, probeImgs, true, 512, threads);

  std::vector<double> frac((std::size_t)cfg.probeCount, 0.0);
  parallelFor(threads, frac.size(), [&](std::size_t p) {
    const auto nn = knnIndices(poolFeats, probeFeats.col((Eigen::Index)p), cfg.k);
    std::size_t hits = 0;
    for (std::size_t idx : nn)
      if (poolCls[idx] == cfg.targetClass) hits++;
    frac[p] = (double)hits / (double)cfg.k;
  });

  ERReport rep;
  rep.er = std::accumulate(frac.begin(), frac.end(), 0.0) / (double)frac.size();
  rep.neighborPoolSize = poolImgs.size();
  rep.probeCount = cfg.probeCount;
  rep.k = cfg.k;
  rep.targetClass = cfg.targetClass;
  return rep;
}

void exportFeatures(Mlp& encoder, const LabeledDataset& data,
                    const std::vector<std::uint8_t>& triggeredFlags, const std::string& path,
                    int threads) {
  if (!triggeredFlags.empty() && triggeredFlags.size() != data.size())
    throw std::invalid_argument("exportFeatures: trigger flag count mismatch");
  Mat f = encodeFeatures(encoder, data.images, true, 512, threads);
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "index,label,is_triggered";
  for (Eigen::Index d = 0; d < f.rows(); d++) os << ",f" << d;
  os << '\n';
  os.precision(12);
  for (Eigen::Index i = 0; i < f.cols(); i++) {
    os << i << ',' << data.labels[(std::size_t)i] << ','
       << (triggeredFlags.empty() ? 0 : (int)triggeredFlags[(std::size_t)i]);
    for (Eigen::Index d = 0; d < f.rows(); d++) os << ',' << f(d, i);
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace clt
