#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cltrojan/checkpoint.hpp"
#include "cltrojan/errors.hpp"
#include "cltrojan/losses.hpp"
#include "cltrojan/nn.hpp"
#include "cltrojan/synth.hpp"
#include "cltrojan/train.hpp"
#include "doctest.h"

using namespace clt;

namespace {

Mat randomBatch(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Mat x(rows, cols);
  for (int j = 0; j < cols; j++)
    for (int i = 0; i < rows; i++) x(i, j) = rng.normal();
  return x;
}

struct ParamRef {
  Mlp* net;
  std::size_t layer;
  bool isBias;
  Eigen::Index i, j;
};

std::vector<ParamRef> collectParams(const std::vector<Mlp*>& nets) {
  std::vector<ParamRef> out;
  for (Mlp* net : nets)
    for (std::size_t l = 0; l < net->layers.size(); l++) {
      const auto& lay = net->layers[l];
      for (Eigen::Index i = 0; i < lay.w.rows(); i++)
        for (Eigen::Index j = 0; j < lay.w.cols(); j++) out.push_back({net, l, false, i, j});
      for (Eigen::Index i = 0; i < lay.b.size(); i++) out.push_back({net, l, true, i, 0});
    }
  return out;
}

double& paramValue(const ParamRef& p) {
  auto& lay = p.net->layers[p.layer];
  return p.isBias ? lay.b(p.i) : lay.w(p.i, p.j);
}

double paramGrad(const ParamRef& p) {
  const auto& lay = p.net->layers[p.layer];
  return p.isBias ? lay.gb(p.i) : lay.gw(p.i, p.j);
}

// Central finite differences (step 1e-5) on `probes` randomly picked
// parameters against the analytic gradients filled in by `runBackward`.
// `runLoss` must be a pure eval-mode recomputation of the same scalar.
template <class BackFn, class LossFn>
void fdCheckParams(const std::vector<Mlp*>& nets, BackFn runBackward, LossFn runLoss, int probes,
                   std::uint64_t seed) {
  for (Mlp* n : nets) n->zeroGrad();
  runBackward();
  auto params = collectParams(nets);
  Rng pick(seed);
  const double h = 1e-5;
  int done = 0;
  std::size_t guard = 0;
  while (done < probes && guard++ < params.size() * 4) {
    const ParamRef& p = params[pick.below(params.size())];
    const double analytic = paramGrad(p);
    if (std::abs(analytic) < 1e-6) continue;  // probe informative coordinates
    double& v = paramValue(p);
    const double keep = v;
    v = keep + h;
    const double up = runLoss();
    v = keep - h;
    const double dn = runLoss();
    v = keep;
    const double fd = (up - dn) / (2 * h);
    const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-8});
    CAPTURE(analytic);
    CAPTURE(fd);
    CHECK(rel <= 1e-4);
    done++;
  }
  CHECK(done == probes);
}

}  // namespace

TEST_CASE("losses: contrastive hand value for two samples with orthogonal negatives") {
  // sample 0's two views identical (similarity 1), sample 1's two views on an
  // orthogonal axis: each anchor sees one positive at 1 and two negatives at 0
  Mat z = Mat::Zero(3, 4);
  z(0, 0) = z(0, 1) = 1.0;
  z(1, 2) = z(1, 3) = 1.0;
  LossValue lv = infoNceLoss(z, 0.5);
  const double expected = -std::log(std::exp(2.0) / (std::exp(2.0) + 2.0));
  CHECK(lv.loss == doctest::Approx(expected).epsilon(1e-12));
  for (int i = 0; i < 4; i++) CHECK(lv.perAnchor(i) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("losses: contrastive input validation") {
  Mat z = l2NormalizeCols(randomBatch(5, 6, 11));
  CHECK_THROWS_AS(infoNceLoss(z, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(infoNceLoss(z.leftCols(5), 0.5), std::invalid_argument);  // odd
  CHECK_THROWS_AS(infoNceLoss(z.leftCols(2), 0.5), std::invalid_argument);  // single sample
  Mat bad = z;
  bad.col(2) *= 1.01;
  CHECK_THROWS_AS(infoNceLoss(bad, 0.5), std::invalid_argument);
}

TEST_CASE("losses: contrastive loss depends on inner products only") {
  Mat z = l2NormalizeCols(randomBatch(6, 8, 21));
  LossValue base = infoNceLoss(z, 0.5);
  // random orthogonal matrix via QR
  Eigen::HouseholderQR<Mat> qr(randomBatch(6, 6, 22));
  Mat q = qr.householderQ();
  LossValue rotated = infoNceLoss(q * z, 0.5);
  CHECK(rotated.loss == doctest::Approx(base.loss).epsilon(1e-12));
}

TEST_CASE("losses: distance loss trivial values and the 2-2cos identity") {
  Mat a = Mat::Zero(4, 3), b = Mat::Zero(4, 3);
  a(0, 0) = 1;
  b(0, 0) = 1;  // identical -> 0
  a(1, 1) = 1;
  b(1, 1) = -1;  // antipodal -> 4
  a(2, 2) = 1;
  b(3, 2) = 1;  // orthogonal -> 2
  LossValue lv = squaredDistanceLoss(a, b);
  CHECK(lv.perAnchor(0) == doctest::Approx(0.0));
  CHECK(lv.perAnchor(1) == doctest::Approx(4.0));
  CHECK(lv.perAnchor(2) == doctest::Approx(2.0));
  CHECK(lv.loss == doctest::Approx(2.0));

  Mat p = l2NormalizeCols(randomBatch(5, 7, 31));
  Mat t = l2NormalizeCols(randomBatch(5, 7, 32));
  LossValue gen = squaredDistanceLoss(p, t);
  for (int i = 0; i < 7; i++) {
    const double expect = 2.0 - 2.0 * p.col(i).dot(t.col(i));
    CHECK(gen.perAnchor(i) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("losses: cross entropy hand value and gradient row sums") {
  Mat logits(3, 2);
  logits << 1, 0, 1, 0, 1, std::log(2.0);
  std::vector<int> y{0, 2};
  LossValue lv = crossEntropyLoss(logits, y);
  CHECK(lv.perAnchor(0) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(lv.perAnchor(1) == doctest::Approx(std::log(4.0 / 2.0)).epsilon(1e-12));
  // softmax minus one-hot sums to zero over classes
  for (int i = 0; i < 2; i++) CHECK(lv.grad.col(i).sum() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("losses: gradients match finite differences at the loss inputs") {
  const double h = 1e-5;
  for (std::uint64_t inst = 0; inst < 3; inst++) {
    Mat z = l2NormalizeCols(randomBatch(5, 8, 100 + inst));
    LossValue lv = infoNceLoss(z, 0.5);
    Rng pick(200 + inst);
    for (int probe = 0; probe < 10; probe++) {
      const Eigen::Index i = (Eigen::Index)pick.below(5), j = (Eigen::Index)pick.below(8);
      Mat zp = z, zm = z;
      zp(i, j) += h;
      zm(i, j) -= h;
      const double fd = (infoNceLoss(zp, 0.5).loss - infoNceLoss(zm, 0.5).loss) / (2 * h);
      const double an = lv.grad(i, j);
      CHECK(std::abs(fd - an) <= 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-8}));
    }
  }
}

TEST_CASE("sslcore: full-chain gradients match finite differences (contrastive)") {
  for (std::uint64_t inst = 0; inst < 3; inst++) {
    Rng init(mixSeed(40, inst));
    Mlp enc(std::vector<int>{7, 6, 5}, false, init);
    Mlp proj(std::vector<int>{5, 6, 4}, false, init);
    Mat x;
    for (std::uint64_t attempt = 0;; attempt++) {  // stay away from rectifier kinks
      x = randomBatch(7, 6, mixSeed(41, inst, attempt));
      proj.forward(enc.forward(x, true), true);
      if (std::min(enc.minAbsPreactivation(), proj.minAbsPreactivation()) > 1e-3) break;
      REQUIRE(attempt < 50);
    }
    auto runLoss = [&]() {
      return infoNceLoss(l2NormalizeCols(proj.forward(enc.forward(x, false), false)), 0.5).loss;
    };
    auto runBackward = [&]() {
      Mat zp = proj.forward(enc.forward(x, true), true);
      LossValue lv = infoNceLoss(l2NormalizeCols(zp), 0.5);
      enc.backward(proj.backward(l2NormalizeColsBackward(zp, lv.grad)));
    };
    fdCheckParams({&enc, &proj}, runBackward, runLoss, 12, mixSeed(42, inst));
  }
}

TEST_CASE("sslcore: full-chain gradients match finite differences (distance, frozen target)") {
  // stop-gradient contract: the target features are a constant during the
  // backward pass, so the finite-difference oracle freezes them too
  for (std::uint64_t inst = 0; inst < 3; inst++) {
    Rng init(mixSeed(50, inst));
    Mlp enc(std::vector<int>{7, 6, 5}, false, init);
    Mlp proj(std::vector<int>{5, 6, 4}, false, init);
    Mlp pred(std::vector<int>{4, 5, 4}, false, init);
    Mat x = randomBatch(7, 6, mixSeed(51, inst));
    Mat t = l2NormalizeCols(randomBatch(4, 6, mixSeed(52, inst)));
    {
      Mat q = pred.forward(proj.forward(enc.forward(x, true), true), true);
      const double kink =
          std::min({enc.minAbsPreactivation(), proj.minAbsPreactivation(), pred.minAbsPreactivation()});
      if (kink <= 1e-3) continue;  // rare with these seeds; skip instead of flaking
      (void)q;
    }
    auto runLoss = [&]() {
      return squaredDistanceLoss(
                 l2NormalizeCols(pred.forward(proj.forward(enc.forward(x, false), false), false)), t)
          .loss;
    };
    auto runBackward = [&]() {
      Mat q = pred.forward(proj.forward(enc.forward(x, true), true), true);
      LossValue lv = squaredDistanceLoss(l2NormalizeCols(q), t);
      enc.backward(proj.backward(pred.backward(l2NormalizeColsBackward(q, lv.grad))));
    };
    fdCheckParams({&enc, &proj, &pred}, runBackward, runLoss, 12, mixSeed(53, inst));
  }
}

TEST_CASE("sslcore: full-chain gradients match finite differences (cross entropy)") {
  for (std::uint64_t inst = 0; inst < 3; inst++) {
    Rng init(mixSeed(60, inst));
    Mlp enc(std::vector<int>{7, 5, 4}, false, init);
    Mlp clf(std::vector<int>{4, 5, 3}, false, init);
    Mat x = randomBatch(7, 6, mixSeed(61, inst));
    std::vector<int> y{0, 1, 2, 1, 0, 2};
    {
      clf.forward(enc.forward(x, true), true);
      if (std::min(enc.minAbsPreactivation(), clf.minAbsPreactivation()) <= 1e-3) continue;
    }
    auto runLoss = [&]() { return crossEntropyLoss(clf.forward(enc.forward(x, false), false), y).loss; };
    auto runBackward = [&]() {
      Mat logits = clf.forward(enc.forward(x, true), true);
      LossValue lv = crossEntropyLoss(logits, y);
      enc.backward(clf.backward(lv.grad));
    };
    fdCheckParams({&enc, &clf}, runBackward, runLoss, 12, mixSeed(62, inst));
  }
}

TEST_CASE("sslcore: moving-average update is a contraction with exact endpoints") {
  Rng r1(71), r2(72);
  Mlp online(std::vector<int>{6, 5, 4}, false, r1);
  Mlp target(std::vector<int>{6, 5, 4}, false, r2);
  const double before = paramDistance(target, online);
  CHECK(before > 0);

  Mlp t0 = target;
  emaUpdate(t0, online, 0.0);
  CHECK(paramDistance(t0, online) == 0.0);

  Mlp t1 = target;
  emaUpdate(t1, online, 1.0);
  CHECK(paramDistance(t1, target) == 0.0);

  Mlp t = target;
  emaUpdate(t, online, 0.996);
  CHECK(paramDistance(t, online) == doctest::Approx(0.996 * before).epsilon(1e-12));

  Mlp wrong(std::vector<int>{6, 4, 4}, false, r1);
  CHECK_THROWS_AS(emaUpdate(wrong, online, 0.5), std::invalid_argument);
}

namespace {

LabeledDataset toyDataset(int classes, int perClass, std::uint64_t seed) {
  return makeSyntheticImageSet(classes, (std::size_t)perClass, seed);
}

TrainConfig toyConfig(SslMethod m, int epochs, std::uint64_t seed) {
  TrainConfig cfg = defaultTrainConfig(m);
  cfg.encoderDims = {3072, 64, 32};
  cfg.projectorHidden = 48;
  cfg.projectorOut = 16;
  cfg.predictorHidden = 48;
  cfg.epochs = epochs;
  cfg.batchSize = 64;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("sslcore: zero-epoch training returns the initialization unchanged") {
  LabeledDataset d = toyDataset(3, 10, 5);
  for (SslMethod m : {SslMethod::SimClr, SslMethod::Byol, SslMethod::SimSiam}) {
    TrainConfig cfg = toyConfig(m, 0, 9);
    SslModel trained = pretrain(d, cfg, AugmentPolicy{});
    SslModel init = initSslModel(cfg);
    CHECK(paramDistance(trained.encoder, init.encoder) == 0.0);
    CHECK(paramDistance(trained.projector, init.projector) == 0.0);
  }
}

TEST_CASE("sslcore: training is bit-reproducible and thread-count independent") {
  LabeledDataset d = toyDataset(3, 14, 6);
  TrainConfig cfg = toyConfig(SslMethod::SimClr, 2, 77);
  cfg.batchSize = 16;
  SslModel a = pretrain(d, cfg, AugmentPolicy{});
  SslModel b = pretrain(d, cfg, AugmentPolicy{});
  cfg.threads = 3;
  SslModel c = pretrain(d, cfg, AugmentPolicy{});
  CHECK(paramDistance(a.encoder, b.encoder) == 0.0);
  CHECK(paramDistance(a.projector, b.projector) == 0.0);
  CHECK(paramDistance(a.encoder, c.encoder) == 0.0);
  cfg.threads = 1;
  cfg.seed = 78;
  SslModel other = pretrain(d, cfg, AugmentPolicy{});
  CHECK(paramDistance(a.encoder, other.encoder) > 0.0);
}

TEST_CASE("sslcore: contrastive loss trace decreases on a small corpus") {
  LabeledDataset d = toyDataset(4, 50, 7);  // 200 samples
  TrainConfig cfg = toyConfig(SslMethod::SimClr, 50, 11);
  LossTrace trace;
  SslModel m = pretrain(d, cfg, AugmentPolicy{}, &trace);
  REQUIRE(trace.epochMean.size() == 50);
  REQUIRE(trace.perSample.rows() == 50);
  REQUIRE(trace.perSample.cols() == 200);
  double head = 0, tail = 0;
  for (int e = 0; e < 5; e++) head += trace.epochMean[(std::size_t)e];
  for (int e = 45; e < 50; e++) tail += trace.epochMean[(std::size_t)e];
  INFO("first epochs mean ", head / 5, " last epochs mean ", tail / 5);
  CHECK(tail < head);
  // per-sample rows average to the epoch mean
  for (int e : {0, 25, 49})
    CHECK(trace.perSample.row(e).mean() == doctest::Approx(trace.epochMean[(std::size_t)e]).epsilon(1e-9));
  (void)m;
}

TEST_CASE("sslcore: momentum methods run and keep the target branch gradient-free") {
  LabeledDataset d = toyDataset(3, 12, 8);
  for (SslMethod method : {SslMethod::Byol, SslMethod::SimSiam}) {
    TrainConfig cfg = toyConfig(method, 3, 13);
    cfg.batchSize = 12;
    LossTrace trace;
    SslModel m = pretrain(d, cfg, AugmentPolicy{}, &trace);
    CHECK(trace.epochMean.size() == 3);
    for (double v : trace.epochMean) CHECK(std::isfinite(v));
    if (method == SslMethod::Byol) {
      // EMA moved the target off the shared initialization but no gradient
      // ever accumulated there
      SslModel init = initSslModel(cfg);
      CHECK(paramDistance(m.targetEncoder, init.targetEncoder) > 0.0);
      CHECK(paramDistance(m.targetEncoder, m.encoder) > 0.0);
      for (const auto& l : m.targetEncoder.layers) {
        CHECK(l.gw.cwiseAbs().maxCoeff() == 0.0);
        CHECK(l.gb.cwiseAbs().maxCoeff() == 0.0);
      }
      for (const auto& l : m.targetProjector.layers) CHECK(l.gw.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("sslcore: runaway learning rate raises the divergence error") {
  LabeledDataset d = toyDataset(2, 8, 14);
  TrainConfig cfg = toyConfig(SslMethod::SimClr, 3, 15);
  cfg.lr = 1e200;
  cfg.batchSize = 8;
  CHECK_THROWS_AS(pretrain(d, cfg, AugmentPolicy{}), DivergenceError);
}

TEST_CASE("sslcore: classifier fine-tuning freezes or updates the encoder as asked") {
  LabeledDataset train = toyDataset(3, 30, 16);
  LabeledDataset eval = toyDataset(3, 12, 17);
  Rng init(18);
  Mlp encFrozen(std::vector<int>{3072, 24, 8}, false, init);
  Mlp encFull = encFrozen;

  FinetuneConfig fcfg;
  fcfg.epochs = 12;
  fcfg.seed = 19;
  Mlp clfFrozen = finetuneClassifier(encFrozen, train, 3, fcfg);

  Rng initCheck(18);
  Mlp encRef(std::vector<int>{3072, 24, 8}, false, initCheck);
  CHECK(paramDistance(encFrozen, encRef) == 0.0);  // bit-identical under freezing

  fcfg.freezeEncoder = false;
  fcfg.lr = 0.05;  // end-to-end pixel training wants gentler rates than a frozen head
  fcfg.encoderLrScale = 0.05;
  Mlp clfFull = finetuneClassifier(encFull, train, 3, fcfg);
  CHECK(paramDistance(encFull, encRef) > 0.0);

  auto acc = [&](Mlp& enc, Mlp& clf) {
    Mat logits = classifierLogits(enc, clf, eval.images);
    int ok = 0;
    for (Eigen::Index i = 0; i < logits.cols(); i++) {
      Eigen::Index arg;
      logits.col(i).maxCoeff(&arg);
      if ((int)arg == eval.labels[(std::size_t)i]) ok++;
    }
    return (double)ok / (double)logits.cols();
  };
  const double accFrozen = acc(encFrozen, clfFrozen);
  const double accFull = acc(encFull, clfFull);
  INFO("frozen ", accFrozen, " full ", accFull);
  CHECK(accFrozen >= 0.9);
  CHECK(accFull >= 0.9);

  LabeledDataset missing = train;
  for (auto& y : missing.labels)
    if (y == 2) y = 1;
  CHECK_THROWS_AS(finetuneClassifier(encFrozen, missing, 3, fcfg), std::invalid_argument);
}

TEST_CASE("sslcore: model files round-trip bit-exactly") {
  const std::string dir = "cltrojan_ckpt_test";
  std::filesystem::create_directories(dir);
  TrainConfig cfg = toyConfig(SslMethod::Byol, 0, 23);
  SslModel m = initSslModel(cfg);
  const std::string p = dir + "/model.bin";
  saveSslModel(m, p);
  SslModel r = loadSslModel(p);
  CHECK(r.method == m.method);
  CHECK(r.emaDecay == m.emaDecay);
  CHECK(paramDistance(r.encoder, m.encoder) == 0.0);
  CHECK(paramDistance(r.projector, m.projector) == 0.0);
  CHECK(paramDistance(r.predictor, m.predictor) == 0.0);
  CHECK(paramDistance(r.targetEncoder, m.targetEncoder) == 0.0);

  CHECK_THROWS_AS(loadClassifier(p), IoError);  // wrong kind
  CHECK_THROWS_AS(loadSslModel(dir + "/nope.bin"), IoError);
  {
    std::ofstream bad(dir + "/junk.bin", std::ios::binary);
    bad << "JUNKJUNKJUNKJUNK";
  }
  CHECK_THROWS_AS(loadSslModel(dir + "/junk.bin"), IoError);

  LossTrace trace;
  trace.epochMean = {1.5, 0.75};
  trace.perSample = Mat(2, 3);
  trace.perSample << 1.0, 2.0, 1.5, 0.5, 1.0, 0.75;
  saveLossTraceCsv(trace, dir + "/mean.csv", dir + "/per_sample.csv");
  Mat back = loadPerSampleTraceCsv(dir + "/per_sample.csv");
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  CHECK((back - trace.perSample).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sslcore: supervised baseline learns the toy task and records a trace") {
  LabeledDataset d = toyDataset(3, 40, 25);
  SupervisedConfig cfg;
  cfg.encoderDims = {3072, 48, 24};
  cfg.hidden = 16;
  cfg.epochs = 10;
  cfg.batchSize = 32;
  cfg.seed = 26;
  LossTrace trace;
  SupervisedModel m = supervisedTrojanTrain(d, 3, cfg, &trace);
  REQUIRE(trace.epochMean.size() == 10);
  CHECK(trace.epochMean.back() < trace.epochMean.front());

  Mat logits = classifierLogits(m.encoder, m.classifier, d.images);
  int ok = 0;
  for (Eigen::Index i = 0; i < logits.cols(); i++) {
    Eigen::Index arg;
    logits.col(i).maxCoeff(&arg);
    if ((int)arg == d.labels[(std::size_t)i]) ok++;
  }
  CHECK((double)ok / (double)d.images.size() > 0.9);
}
