#include "cltrojan/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cltrojan/dct.hpp"
#include "cltrojan/errors.hpp"
#include "cltrojan/parallel.hpp"

namespace clt {

namespace {

constexpr int kStemBlockSize = 32;

constexpr std::uint64_t kInitStream = 0xA11CE;
constexpr std::uint64_t kShuffleStream = 0x5E9;
constexpr std::uint64_t kViewStream = 0xA9;

std::vector<std::size_t> shuffledOrder(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; i--) {
    const std::size_t j = rng.below(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

// batch [start, stop) slices over a shuffled order; a trailing batch of one
// sample is folded into its predecessor so pair losses always have a batch
std::vector<std::pair<std::size_t, std::size_t>> batchSlices(std::size_t n, std::size_t batch) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t s = 0; s < n; s += batch) out.emplace_back(s, std::min(n, s + batch));
  if (out.size() >= 2 && out.back().second - out.back().first < 2) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

void checkFinite(double loss, const std::string& what, int epoch) {
  if (!std::isfinite(loss))
    throw DivergenceError(what + " loss became non-finite at epoch " + std::to_string(epoch) +
                          "; lower the learning rate");
}

}  // namespace

std::string sslMethodName(SslMethod m) {
  switch (m) {
    case SslMethod::SimClr: return "simclr";
    case SslMethod::Byol: return "byol";
    case SslMethod::SimSiam: return "simsiam";
  }
  return "?";
}

SslMethod sslMethodFromName(const std::string& name) {
  if (name == "simclr") return SslMethod::SimClr;
  if (name == "byol") return SslMethod::Byol;
  if (name == "simsiam") return SslMethod::SimSiam;
  throw std::invalid_argument("unknown SSL method: " + name + " (simclr|byol|simsiam)");
}

TrainConfig defaultTrainConfig(SslMethod m) {
  TrainConfig cfg;
  cfg.method = m;
  if (m == SslMethod::Byol) cfg.lr = 0.06;
  if (m == SslMethod::SimSiam) {
    cfg.lr = 0.06;
    cfg.weightDecay = 5e-4;
  }
  return cfg;
}

void validateTrainConfig(const TrainConfig& cfg) {
  if (cfg.temperature <= 0) throw std::invalid_argument("train config: temperature must be positive");
  if (cfg.emaDecay < 0 || cfg.emaDecay >= 1) throw std::invalid_argument("train config: ema decay must lie in [0,1)");
  if (cfg.lr <= 0) throw std::invalid_argument("train config: learning rate must be positive");
  if (cfg.momentum < 0 || cfg.momentum >= 1) throw std::invalid_argument("train config: momentum must lie in [0,1)");
  if (cfg.weightDecay < 0) throw std::invalid_argument("train config: weight decay must be non-negative");
  if (cfg.batchSize < 2) throw std::invalid_argument("train config: batch size must be at least 2");
  if (cfg.epochs < 0) throw std::invalid_argument("train config: negative epoch count");
  if (cfg.encoderDims.size() < 2) throw std::invalid_argument("train config: encoder needs input and output dims");
  if (cfg.projectorHidden <= 0 || cfg.projectorOut <= 0 || cfg.predictorHidden <= 0)
    throw std::invalid_argument("train config: head dims must be positive");
  if (cfg.threads < 1) throw std::invalid_argument("train config: thread count must be at least 1");
}

SslModel initSslModel(const TrainConfig& cfg) {
  validateTrainConfig(cfg);
  SslModel m;
  m.method = cfg.method;
  m.emaDecay = cfg.emaDecay;
  Rng rng(mixSeed(cfg.seed, kInitStream));
  m.encoder = Mlp(cfg.encoderDims, false, rng);
  const int encOut = cfg.encoderDims.back();
  m.projector = Mlp({encOut, cfg.projectorHidden, cfg.projectorOut}, false, rng);
  if (cfg.method != SslMethod::SimClr)
    m.predictor = Mlp({cfg.projectorOut, cfg.predictorHidden, cfg.projectorOut}, false, rng);
  if (cfg.method == SslMethod::Byol) {
    m.targetEncoder = m.encoder;  // same initial weights; EMA keeps them shape-identical
    m.targetProjector = m.projector;
  }
  return m;
}

Vec flattenInput(const ImageTensor& img) {
  // fixed spectral stem: YCbCr + orthonormal blockwise DCT per plane, with a
  // sqrt(1+u+v) band gain (capped so color statistics stay audible) that
  // flattens the natural 1/f coefficient decay, and a 1/255 byte scale. A
  // parameter-free change of basis that hands the trainable stack the
  // band-organized, scale-balanced input a convolutional backbone gets from
  // its filter geometry.
  ImageTensor ycc = rgbToYCbCr(img);
  Vec v((Eigen::Index)img.data.size());
  Eigen::Index k = 0;
  for (int ch = 0; ch < img.channels; ch++) {
    DctBlockGrid g = blockDct(extractPlane(ycc, ch), kStemBlockSize);
    for (int br = 0; br < g.gridRows; br++)
      for (int bc = 0; bc < g.gridCols; bc++)
        for (int u = 0; u < g.blockSize; u++)
          for (int vv = 0; vv < g.blockSize; vv++)
            v[k++] = g.at(br, bc, u, vv) * std::sqrt(1.0 + std::min(u + vv, 8)) / 255.0;
  }
  return v;
}

Mat imagesToColumns(const std::vector<ImageTensor>& images, int threads) {
  if (images.empty()) return Mat();
  const std::size_t d = images[0].data.size();
  for (const auto& img : images)
    if (img.data.size() != d) throw std::invalid_argument("imagesToColumns: ragged image shapes");
  Mat x((Eigen::Index)d, (Eigen::Index)images.size());
  parallelFor(threads, images.size(),
              [&](std::size_t i) { x.col((Eigen::Index)i) = flattenInput(images[i]); });
  return x;
}

SslModel pretrain(const LabeledDataset& data, const TrainConfig& cfg, const AugmentPolicy& policy,
                  LossTrace* trace) {
  validateTrainConfig(cfg);
  validateAugmentPolicy(policy);
  const std::size_t n = data.images.size();
  if (n < 2) throw std::invalid_argument("pretrain: need at least two samples");

  SslModel model = initSslModel(cfg);
  if (trace) {
    trace->epochMean.clear();
    trace->perSample = Mat::Zero(cfg.epochs, (Eigen::Index)n);
  }

  const std::size_t inDim = (std::size_t)cfg.encoderDims.front();
  for (const auto& img : data.images)
    if (img.data.size() != inDim || img.channels != 3)
      throw std::invalid_argument("pretrain: images must be 3-channel and match the encoder input dim");

  for (int epoch = 0; epoch < cfg.epochs; epoch++) {
    // cosine-annealed rate: constant-rate contrastive training keeps churning
    // the representation and can erase earlier structure late in the run
    const double lrT =
        cfg.lr * 0.5 * (1.0 + std::cos(M_PI * (double)epoch / (double)std::max(cfg.epochs, 1)));
    const SgdConfig opt{lrT, cfg.momentum, cfg.weightDecay};
    Rng shuffleRng(mixSeed(cfg.seed, kShuffleStream, (std::uint64_t)epoch));
    const std::vector<std::size_t> order = shuffledOrder(n, shuffleRng);
    double lossSum = 0;
    std::size_t anchorCount = 0;

    for (const auto& [lo, hi] : batchSlices(n, (std::size_t)cfg.batchSize)) {
      const std::size_t b = hi - lo;
      Mat x(inDim, 2 * b);
      parallelFor(cfg.threads, b, [&](std::size_t j) {
        const std::size_t idx = order[lo + j];
        for (int v = 0; v < 2; v++) {
          const std::uint64_t s =
              mixSeed(cfg.seed, kViewStream, (std::uint64_t)epoch, (std::uint64_t)idx, (std::uint64_t)v);
          x.col((Eigen::Index)(2 * j + v)) = flattenInput(augmentSeeded(data.images[idx], policy, s));
        }
      });

      model.encoder.zeroGrad();
      model.projector.zeroGrad();
      if (!model.predictor.empty()) model.predictor.zeroGrad();

      LossValue lv;
      if (cfg.method == SslMethod::SimClr) {
        Mat zp = model.projector.forward(model.encoder.forward(x, true), true);
        lv = infoNceLoss(l2NormalizeCols(zp), cfg.temperature);
        checkFinite(lv.loss, sslMethodName(cfg.method), epoch);
        model.encoder.backward(model.projector.backward(l2NormalizeColsBackward(zp, lv.grad)));
        sgdStep(model.encoder, opt);
        sgdStep(model.projector, opt);
      } else {
        // target branch first, eval mode, so the online caches survive to backward
        Mat xsw(inDim, 2 * b);
        for (std::size_t j = 0; j < b; j++) {
          xsw.col((Eigen::Index)(2 * j)) = x.col((Eigen::Index)(2 * j + 1));
          xsw.col((Eigen::Index)(2 * j + 1)) = x.col((Eigen::Index)(2 * j));
        }
        Mat tz = (cfg.method == SslMethod::Byol)
                     ? model.targetProjector.forward(model.targetEncoder.forward(xsw, false), false)
                     : model.projector.forward(model.encoder.forward(xsw, false), false);
        Mat q = model.predictor.forward(
            model.projector.forward(model.encoder.forward(x, true), true), true);
        lv = squaredDistanceLoss(l2NormalizeCols(q), l2NormalizeCols(tz));
        checkFinite(lv.loss, sslMethodName(cfg.method), epoch);
        model.encoder.backward(model.projector.backward(
            model.predictor.backward(l2NormalizeColsBackward(q, lv.grad))));
        sgdStep(model.encoder, opt);
        sgdStep(model.projector, opt);
        sgdStep(model.predictor, opt);
        if (cfg.method == SslMethod::Byol) {
          emaUpdate(model.targetEncoder, model.encoder, cfg.emaDecay);
          emaUpdate(model.targetProjector, model.projector, cfg.emaDecay);
        }
      }

      lossSum += lv.perAnchor.sum();
      anchorCount += 2 * b;
      if (trace)
        for (std::size_t j = 0; j < b; j++)
          trace->perSample(epoch, (Eigen::Index)order[lo + j]) =
              0.5 * (lv.perAnchor((Eigen::Index)(2 * j)) + lv.perAnchor((Eigen::Index)(2 * j + 1)));
    }
    if (trace) trace->epochMean.push_back(lossSum / (double)anchorCount);
  }
  return model;
}

Mlp finetuneClassifier(Mlp& encoder, const LabeledDataset& labeled, int classCount,
                       const FinetuneConfig& cfg) {
  if (classCount < 2) throw std::invalid_argument("finetune: need at least two classes");
  if (cfg.epochs < 0 || cfg.batchSize < 1 || cfg.lr <= 0 || cfg.hidden < 1 || cfg.threads < 1)
    throw std::invalid_argument("finetune: bad config");
  const std::size_t n = labeled.images.size();
  std::vector<std::size_t> perClass((std::size_t)classCount, 0);
  for (int y : labeled.labels) {
    if (y < 0 || y >= classCount) throw std::invalid_argument("finetune: label out of range");
    perClass[(std::size_t)y]++;
  }
  for (int c = 0; c < classCount; c++)
    if (perClass[(std::size_t)c] == 0)
      throw std::invalid_argument("finetune: class " + std::to_string(c) + " has no labeled samples");

  Rng initRng(mixSeed(cfg.seed, 0xC1F));
  Mlp clf(std::vector<int>{encoder.outputDim(), cfg.hidden, classCount}, false, initRng);

  Mat pixels = imagesToColumns(labeled.images, cfg.threads);
  Mat frozenFeats;
  if (cfg.freezeEncoder) frozenFeats = encoder.forward(pixels, false);

  const int totalEpochs = std::max(cfg.epochs, 1);
  for (int epoch = 0; epoch < cfg.epochs; epoch++) {
    const double lrT = cfg.lr * 0.5 * (1.0 + std::cos(M_PI * (double)epoch / (double)totalEpochs));
    const SgdConfig opt{lrT, cfg.momentum, 0.0};
    Rng shuffleRng(mixSeed(cfg.seed, 0xF7, (std::uint64_t)epoch));
    const std::vector<std::size_t> order = shuffledOrder(n, shuffleRng);
    for (std::size_t lo = 0; lo < n; lo += (std::size_t)cfg.batchSize) {
      const std::size_t hi = std::min(n, lo + (std::size_t)cfg.batchSize);
      const std::size_t b = hi - lo;
      std::vector<int> y(b);
      Mat in(cfg.freezeEncoder ? frozenFeats.rows() : pixels.rows(), (Eigen::Index)b);
      for (std::size_t j = 0; j < b; j++) {
        const std::size_t idx = order[lo + j];
        y[j] = labeled.labels[idx];
        in.col((Eigen::Index)j) =
            cfg.freezeEncoder ? frozenFeats.col((Eigen::Index)idx) : pixels.col((Eigen::Index)idx);
      }
      clf.zeroGrad();
      if (cfg.freezeEncoder) {
        LossValue lv = crossEntropyLoss(clf.forward(in, true), y);
        checkFinite(lv.loss, "classifier", epoch);
        clf.backward(lv.grad);
        sgdStep(clf, opt);
      } else {
        encoder.zeroGrad();
        Mat h = encoder.forward(in, true);
        LossValue lv = crossEntropyLoss(clf.forward(h, true), y);
        checkFinite(lv.loss, "classifier", epoch);
        encoder.backward(clf.backward(lv.grad));
        sgdStep(clf, opt);
        sgdStep(encoder, SgdConfig{lrT * cfg.encoderLrScale, cfg.momentum, 0.0});
      }
    }
  }
  return clf;
}

SupervisedModel supervisedTrojanTrain(const LabeledDataset& poisoned, int classCount,
                                      const SupervisedConfig& cfg, LossTrace* trace) {
  if (classCount < 2) throw std::invalid_argument("supervised: need at least two classes");
  if (cfg.epochs < 0 || cfg.batchSize < 1 || cfg.lr <= 0 || cfg.threads < 1)
    throw std::invalid_argument("supervised: bad config");
  const std::size_t n = poisoned.images.size();
  if (n == 0) throw std::invalid_argument("supervised: empty dataset");
  for (int y : poisoned.labels)
    if (y < 0 || y >= classCount) throw std::invalid_argument("supervised: label out of range");

  SupervisedModel m;
  Rng initRng(mixSeed(cfg.seed, 0x5F));
  m.encoder = Mlp(cfg.encoderDims, false, initRng);
  m.classifier = Mlp(std::vector<int>{cfg.encoderDims.back(), cfg.hidden, classCount}, false, initRng);

  if (trace) {
    trace->epochMean.clear();
    trace->perSample = Mat::Zero(cfg.epochs, (Eigen::Index)n);
  }
  Mat pixels = imagesToColumns(poisoned.images, cfg.threads);
  const SgdConfig opt{cfg.lr, cfg.momentum, cfg.weightDecay};

  for (int epoch = 0; epoch < cfg.epochs; epoch++) {
    Rng shuffleRng(mixSeed(cfg.seed, 0x51AB, (std::uint64_t)epoch));
    const std::vector<std::size_t> order = shuffledOrder(n, shuffleRng);
    double lossSum = 0;
    for (std::size_t lo = 0; lo < n; lo += (std::size_t)cfg.batchSize) {
      const std::size_t hi = std::min(n, lo + (std::size_t)cfg.batchSize);
      const std::size_t b = hi - lo;
      std::vector<int> y(b);
      Mat in(pixels.rows(), (Eigen::Index)b);
      for (std::size_t j = 0; j < b; j++) {
        const std::size_t idx = order[lo + j];
        y[j] = poisoned.labels[idx];
        in.col((Eigen::Index)j) = pixels.col((Eigen::Index)idx);
      }
      m.encoder.zeroGrad();
      m.classifier.zeroGrad();
      Mat h = m.encoder.forward(in, true);
      LossValue lv = crossEntropyLoss(m.classifier.forward(h, true), y);
      if (!std::isfinite(lv.loss))
        throw DivergenceError("supervised loss became non-finite at epoch " + std::to_string(epoch));
      m.encoder.backward(m.classifier.backward(lv.grad));
      sgdStep(m.classifier, opt);
      sgdStep(m.encoder, opt);
      lossSum += lv.perAnchor.sum();
      if (trace)
        for (std::size_t j = 0; j < b; j++)
          trace->perSample(epoch, (Eigen::Index)order[lo + j]) = lv.perAnchor((Eigen::Index)j);
    }
    if (trace) trace->epochMean.push_back(lossSum / (double)n);
  }
  return m;
}

Mat classifierLogits(Mlp& encoder, Mlp& classifier, const std::vector<ImageTensor>& images,
                     int batchSize, int threads) {
  if (images.empty()) return Mat(classifier.outputDim(), 0);
  Mat out(classifier.outputDim(), (Eigen::Index)images.size());
  for (std::size_t lo = 0; lo < images.size(); lo += (std::size_t)batchSize) {
    const std::size_t hi = std::min(images.size(), lo + (std::size_t)batchSize);
    std::vector<ImageTensor> chunk(images.begin() + (std::ptrdiff_t)lo, images.begin() + (std::ptrdiff_t)hi);
    Mat x = imagesToColumns(chunk, threads);
    out.middleCols((Eigen::Index)lo, (Eigen::Index)(hi - lo)) =
        classifier.forward(encoder.forward(x, false), false);
  }
  return out;
}

}  // namespace clt
