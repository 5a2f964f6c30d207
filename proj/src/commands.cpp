#include "cltrojan/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "cltrojan/checkpoint.hpp"
#include "cltrojan/defense.hpp"
#include "cltrojan/errors.hpp"
#include "cltrojan/metrics.hpp"
#include "cltrojan/svgplot.hpp"
#include "cltrojan/synth.hpp"
#include "cltrojan/theory.hpp"

namespace clt {

namespace {

void prepareOutDir(const RunConfig& rc, const std::string& command) {
  std::error_code ec;
  std::filesystem::create_directories(rc.outDir, ec);
  if (ec) throw IoError("cannot create output directory " + rc.outDir + ": " + ec.message());
  runConfigToFile(rc).save(outPath(rc, command + "_config.ini"));
}

LabeledDataset loadSplit(const RunConfig& rc, const std::string& path, std::size_t synthPerClass,
                         std::uint64_t synthTag) {
  if (path.empty())
    return makeSyntheticImageSet(rc.classCount, synthPerClass, mixSeed(rc.dataSeed, synthTag));
  LabeledDataset ds = loadCifarBinary(path, rc.classes.empty() ? rc.classCount : rc.fileClassCount);
  if (!rc.classes.empty())
    ds = subsetByClass(ds, rc.classes, std::numeric_limits<std::size_t>::max());
  return ds;
}

std::vector<std::size_t> sampleClassSubset(const LabeledDataset& ds, int cls, std::size_t want,
                                           std::uint64_t seed) {
  std::vector<std::size_t> pool = classIndices(ds, cls);
  if (pool.size() < want)
    throw ConfigError("class " + std::to_string(cls) + " has " + std::to_string(pool.size()) +
                      " samples, need " + std::to_string(want));
  Rng rng(seed);
  for (std::size_t i = 0; i < want; i++)
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(want);
  return pool;
}

Eigen::MatrixXd rawPixelRows(const LabeledDataset& ds) {
  Eigen::MatrixXd f((Eigen::Index)ds.size(), ds.images.empty() ? 0 : (Eigen::Index)ds.images[0].data.size());
  for (std::size_t i = 0; i < ds.size(); i++) f.row((Eigen::Index)i) = flattenInput(ds.images[i]).transpose();
  return f;
}

PoisonOutput poisonInMemory(const LabeledDataset& train, const RunConfig& rc,
                            const PoisonPlan& plan) {
  if (plan.selector == Selector::Random) return buildPoisonedDataset(train, plan, nullptr);
  const Eigen::MatrixXd feats = rawPixelRows(train);
  (void)rc;
  return buildPoisonedDataset(train, plan, &feats);
}

SupervisedModel loadFinetunedPair(const RunConfig& rc) {
  return loadSupervisedModel(outPath(rc, "finetuned_model.bin"));
}

void writeCsv(const std::string& path, const std::string& header,
              const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
  if (!out) throw IoError("short write to " + path);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string outPath(const RunConfig& rc, const std::string& name) {
  return (std::filesystem::path(rc.outDir) / name).string();
}

LabeledDataset loadCleanTrain(const RunConfig& rc) {
  return loadSplit(rc, rc.trainPath, rc.synthTrainPerClass, 0x514A);
}

LabeledDataset loadCleanTest(const RunConfig& rc) {
  return loadSplit(rc, rc.testPath, rc.synthTestPerClass, 0x514B);
}

LabeledDataset finetuneLabeledSet(const RunConfig& rc, const LabeledDataset& test) {
  LabeledDataset out;
  out.classCount = rc.classCount;
  for (int c = 0; c < rc.classCount; c++) {
    for (std::size_t i : sampleClassSubset(test, c, rc.finetuneLabeledPerClass,
                                           mixSeed(rc.finetune.seed, 0x1ABE1, (std::uint64_t)c))) {
      out.images.push_back(test.images[i]);
      out.labels.push_back(test.labels[i]);
    }
  }
  return out;
}

void cmdPoison(const RunConfig& rc) {
  prepareOutDir(rc, "poison");
  const LabeledDataset train = loadCleanTrain(rc);
  const PoisonOutput out = poisonInMemory(train, rc, rc.plan);
  saveCifarBinary(outPath(rc, "poisoned_train.bin"), out.poisoned);
  saveManifestCsv(outPath(rc, "manifest.csv"), out.manifest);
  std::printf("poison: %zu of %zu records replaced (target class %d, magnitude %g) -> %s\n",
              out.manifest.rows.size(), train.size(), rc.plan.targetClass,
              rc.plan.trigger.magnitude, rc.outDir.c_str());
}

void cmdPretrain(const RunConfig& rc) {
  prepareOutDir(rc, "pretrain");
  const LabeledDataset data = loadCifarBinary(outPath(rc, "poisoned_train.bin"), rc.classCount);
  TrainConfig tc = rc.train;
  tc.threads = rc.threads;
  LossTrace trace;
  const SslModel model = pretrain(data, tc, rc.augmentPolicy, &trace);
  saveSslModel(model, outPath(rc, "ssl_model.bin"));
  saveLossTraceCsv(trace, outPath(rc, "pretrain_loss.csv"), outPath(rc, "pretrain_per_sample.csv"));
  std::printf("pretrain: %s, %d epochs over %zu records, final mean loss %.6f\n",
              sslMethodName(tc.method).c_str(), tc.epochs, data.size(), trace.epochMean.back());
}

void cmdFinetune(const RunConfig& rc) {
  prepareOutDir(rc, "finetune");
  SslModel m = loadSslModel(outPath(rc, "ssl_model.bin"));
  const LabeledDataset test = loadCleanTest(rc);
  const LabeledDataset labeled = finetuneLabeledSet(rc, test);
  FinetuneConfig fc = rc.finetune;
  fc.threads = rc.threads;
  Mlp head = finetuneClassifier(m.encoder, labeled, rc.classCount, fc);
  SupervisedModel pair;
  pair.encoder = std::move(m.encoder);
  pair.classifier = std::move(head);
  saveSupervisedModel(pair, outPath(rc, "finetuned_model.bin"));
  const double fitAcc = accuracy(pair.encoder, pair.classifier, labeled, rc.threads);
  std::printf("finetune: %s encoder, %zu labeled samples, fit accuracy %.4f\n",
              fc.freezeEncoder ? "frozen" : "full", labeled.size(), fitAcc);
}

void cmdEval(const RunConfig& rc) {
  prepareOutDir(rc, "eval");
  SupervisedModel pair = loadFinetunedPair(rc);
  const LabeledDataset test = loadCleanTest(rc);
  const double acc = accuracy(pair.encoder, pair.classifier, test, rc.threads);
  const LabeledDataset triggered = embedTriggerInTestSet(test, rc.activationTrigger, rc.threads);
  const double asr = attackSuccessRate(pair.encoder, pair.classifier, triggered.images,
                                       rc.plan.targetClass, rc.threads);
  writeCsv(outPath(rc, "metrics.csv"), "metric,value",
           {"acc," + fmt(acc), "asr," + fmt(asr), "chance," + fmt(1.0 / rc.classCount)});
  std::printf("eval: acc %.4f, asr %.4f (chance %.4f, activation magnitude %g)\n", acc, asr,
              1.0 / rc.classCount, rc.activationTrigger.magnitude);
}

void cmdEr(const RunConfig& rc) {
  prepareOutDir(rc, "er");
  SslModel m = loadSslModel(outPath(rc, "ssl_model.bin"));
  const LabeledDataset train = loadCleanTrain(rc);
  std::vector<std::string> rows;
  PlotSeries series;
  series.label = "ER";
  for (double mag : rc.erProbeMagnitudes) {
    TriggerSpec probe = rc.activationTrigger;
    probe.magnitude = mag;
    const ERReport rep = entanglementRatio(m.encoder, train, rc.er, probe, rc.augmentPolicy,
                                           rc.threads);
    rows.push_back(fmt(mag) + "," + fmt(rep.er) + "," + std::to_string(rep.neighborPoolSize) +
                   "," + std::to_string(rep.probeCount) + "," + std::to_string(rep.k));
    series.x.push_back(mag);
    series.y.push_back(rep.er);
    std::printf("er: magnitude %g -> %.4f (pool %zu, k %d)\n", mag, rep.er, rep.neighborPoolSize,
                rep.k);
  }
  writeCsv(outPath(rc, "er.csv"), "magnitude,er,pool,probes,k", rows);
  writeLinePlot(outPath(rc, "er.svg"), "Entanglement ratio vs trigger magnitude", "magnitude",
                "entanglement ratio", {series});
}

void cmdBoundCheck(const RunConfig& rc) {
  prepareOutDir(rc, "bound_check");
  std::vector<std::string> rows;
  int cell = 0, passed = 0, total = 0;
  for (double eps : {0.0, 0.05, 0.2}) {
    for (int ai = 1; ai <= 9; ai++) {
      MixingModel m;
      m.d = 128;
      m.alpha = ai * 0.1;
      m.epsilon = eps;
      const BoundReport rep = verifyTheoremBound(m, 1000, mixSeed(rc.seed, 0x7E0, (std::uint64_t)cell++),
                                                 rc.threads);
      rows.push_back(fmt(rep.alpha) + "," + fmt(rep.epsilon) + "," + std::to_string(rep.d) + "," +
                     std::to_string(rep.trials) + "," + fmt(rep.meanInner) + "," +
                     fmt(rep.meanInnerRenormalized) + "," + fmt(rep.stdError) + "," +
                     fmt(rep.bound) + "," + fmt(rep.margin) + "," + fmt(rep.intermediateMin) +
                     "," + fmt(rep.intermediateBound) + "," + (rep.vacuous ? "1" : "0") + "," +
                     (rep.pass ? "1" : "0"));
      total++;
      passed += rep.pass ? 1 : 0;
    }
  }
  writeCsv(outPath(rc, "bound_check.csv"),
           "alpha,epsilon,d,trials,mean_inner,mean_inner_renormalized,std_error,bound,margin,"
           "intermediate_min,intermediate_bound,vacuous,pass",
           rows);

  Rng rng(mixSeed(rc.seed, 0xA2F));
  Mat dirs(128, 20000);
  for (Eigen::Index j = 0; j < dirs.cols(); j++) dirs.col(j) = uniformSphere(128, rng);
  const UniformityReport uni = checkUniformity(dirs, 128, 36);
  writeCsv(outPath(rc, "uniformity.csv"), "pairs,mean_angle,min_angle,max_angle,ks,ks_critical,pass",
           {std::to_string(uni.pairCount) + "," + fmt(uni.meanAngle) + "," + fmt(uni.minAngle) +
            "," + fmt(uni.maxAngle) + "," + fmt(uni.ks) + "," + fmt(uni.ksCritical) + "," +
            (uni.pass ? "1" : "0")});
  std::vector<std::string> binLabels(uni.histogram.size());
  for (std::size_t b = 0; b < uni.histogram.size(); b++) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", (b + 0.5) * 3.14159265358979323846 / (double)uni.histogram.size());
    binLabels[b] = (b % 6 == 0) ? buf : "";
  }
  writeBarPlot(outPath(rc, "angle_histogram.svg"), "Pairwise feature angles", "angle (rad)",
               "fraction of pairs", binLabels, uni.histogram);
  std::printf("bound-check: %d/%d cells pass; uniformity ks %.4f (critical %.4f, mean angle %.4f)\n",
              passed, total, uni.ks, uni.ksCritical, uni.meanAngle);
}

void cmdDefendAc(const RunConfig& rc) {
  prepareOutDir(rc, "defend_ac");
  SupervisedModel pair = loadFinetunedPair(rc);
  const LabeledDataset poisoned = loadCifarBinary(outPath(rc, "poisoned_train.bin"), rc.classCount);
  const PoisonManifest manifest = loadManifestCsv(outPath(rc, "manifest.csv"));
  const Mat feats = penultimateFeatures(pair.encoder, pair.classifier, poisoned.images, 512,
                                        rc.threads);
  DetectionReport rep = activationClustering(feats, poisoned.labels, rc.classCount,
                                             manifest.indices(), rc.defense.seed);
  saveDetectionCsv(outPath(rc, "defense_ac.csv"), {rep});
  std::string sil;
  for (std::size_t c = 0; c < rep.classSilhouette.size(); c++)
    sil += (c ? " " : "") + fmt(rep.classSilhouette[c]);
  std::printf("defend ac: flagged class %d (silhouettes %s), tpr %.4f, fpr %.4f\n",
              rep.flaggedClass, sil.c_str(), rep.tpr, rep.fpr);
}

void cmdDefendStrip(const RunConfig& rc) {
  prepareOutDir(rc, "defend_strip");
  SupervisedModel pair = loadFinetunedPair(rc);
  const LabeledDataset test = loadCleanTest(rc);
  const DefenseSettings& d = rc.defense;
  const std::size_t need = (std::size_t)d.stripOverlayCount + 2u * (std::size_t)d.stripInputsPerSide;
  if (test.size() < need)
    throw ConfigError("defend strip: test split too small for overlays + scored inputs");

  std::vector<std::size_t> perm(test.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mixSeed(d.seed, 0x0E1));
  for (std::size_t i = 0; i < need; i++) std::swap(perm[i], perm[i + rng.below(perm.size() - i)]);

  std::vector<ImageTensor> overlays, cleanIn, trigIn;
  std::size_t at = 0;
  for (int i = 0; i < d.stripOverlayCount; i++) overlays.push_back(test.images[perm[at++]]);
  for (int i = 0; i < d.stripInputsPerSide; i++) cleanIn.push_back(test.images[perm[at++]]);
  for (int i = 0; i < d.stripInputsPerSide; i++)
    trigIn.push_back(applyTrigger(test.images[perm[at++]], rc.activationTrigger));

  const auto cleanScores = stripScores(pair.encoder, pair.classifier, cleanIn, overlays,
                                       d.stripPerturb, mixSeed(d.seed, 0x5C1), rc.threads);
  const auto trigScores = stripScores(pair.encoder, pair.classifier, trigIn, overlays,
                                      d.stripPerturb, mixSeed(d.seed, 0x5C2), rc.threads);

  std::vector<double> all = cleanScores;
  all.insert(all.end(), trigScores.begin(), trigScores.end());
  std::vector<std::size_t> trigIdx(trigScores.size());
  std::iota(trigIdx.begin(), trigIdx.end(), cleanScores.size());

  std::vector<DetectionReport> reports;
  for (double target : d.stripTargetFprs) {
    const ThresholdCalibration cal = calibrateThreshold(cleanScores, target);
    DetectionReport rep;
    rep.defense = "strip";
    rep.targetFpr = target;
    rep.threshold = cal.threshold;
    rep.degenerateThreshold = cal.degenerate;
    rep.scores = all;
    rep.flagged = flagByThreshold(all, cal.threshold);
    scoreAgainstManifest(rep, all.size(), trigIdx);
    reports.push_back(std::move(rep));
    std::printf("defend strip: target fpr %.3f -> threshold %.4f, fpr %.4f, tpr %.4f%s\n", target,
                cal.threshold, reports.back().fpr, reports.back().tpr,
                cal.degenerate ? " (degenerate)" : "");
  }
  saveDetectionCsv(outPath(rc, "defense_strip.csv"), reports);
}

void cmdDefendAbl(const RunConfig& rc) {
  prepareOutDir(rc, "defend_abl");
  const Mat trace = loadPerSampleTraceCsv(outPath(rc, "pretrain_per_sample.csv"));
  const PoisonManifest manifest = loadManifestCsv(outPath(rc, "manifest.csv"));
  const int window = rc.defense.ablWindow;
  DetectionReport rep;
  rep.defense = "abl";
  rep.flagged = ablIsolate(trace, window, rc.defense.ablFraction);
  const Vec means = trace.topRows(std::min<Eigen::Index>(window, trace.rows()))
                        .colwise()
                        .mean()
                        .transpose();
  rep.scores.assign(means.data(), means.data() + means.size());
  const auto poison = manifest.indices();
  scoreAgainstManifest(rep, (std::size_t)trace.cols(), poison);
  saveDetectionCsv(outPath(rc, "defense_abl.csv"), {rep});
  if (!poison.empty() && poison.size() < (std::size_t)trace.cols()) {
    const double sep = lossSeparation(trace, window - 1, poison);
    std::printf("defend abl: window %d, flagged %zu, tpr %.4f, fpr %.4f, separation %.6f\n",
                window, rep.flagged.size(), rep.tpr, rep.fpr, sep);
  } else {
    std::printf("defend abl: window %d, flagged %zu (no poison rows in manifest)\n", window,
                rep.flagged.size());
  }
}

void cmdExportFeatures(const RunConfig& rc) {
  prepareOutDir(rc, "export_features");
  SslModel m = loadSslModel(outPath(rc, "ssl_model.bin"));
  const LabeledDataset test = loadCleanTest(rc);
  const LabeledDataset triggered = embedTriggerInTestSet(test, rc.activationTrigger, rc.threads);
  LabeledDataset combined;
  combined.classCount = rc.classCount;
  combined.images = test.images;
  combined.images.insert(combined.images.end(), triggered.images.begin(), triggered.images.end());
  combined.labels = test.labels;
  combined.labels.insert(combined.labels.end(), triggered.labels.begin(), triggered.labels.end());
  std::vector<std::uint8_t> flags(combined.size(), 0);
  std::fill(flags.begin() + (std::ptrdiff_t)test.size(), flags.end(), 1);
  exportFeatures(m.encoder, combined, flags, outPath(rc, "features.csv"), rc.threads);
  std::printf("export-features: %zu clean + %zu triggered rows -> features.csv\n", test.size(),
              triggered.size());
}

void cmdSweepMagnitude(const RunConfig& rc) {
  prepareOutDir(rc, "sweep_magnitude");
  SupervisedModel pair = loadFinetunedPair(rc);
  const LabeledDataset test = loadCleanTest(rc);
  std::vector<std::string> rows;
  PlotSeries series;
  series.label = "ASR";
  for (double mag : rc.sweepActivationMagnitudes) {
    TriggerSpec spec = rc.activationTrigger;
    spec.magnitude = mag;
    const LabeledDataset triggered = embedTriggerInTestSet(test, spec, rc.threads);
    const double asr = attackSuccessRate(pair.encoder, pair.classifier, triggered.images,
                                         rc.plan.targetClass, rc.threads);
    rows.push_back(fmt(mag) + "," + fmt(asr));
    series.x.push_back(mag);
    series.y.push_back(asr);
    std::printf("sweep magnitude: %g -> asr %.4f\n", mag, asr);
  }
  writeCsv(outPath(rc, "sweep_magnitude.csv"), "magnitude,asr", rows);
  writeLinePlot(outPath(rc, "sweep_magnitude.svg"), "ASR vs activation magnitude", "magnitude",
                "attack success rate", {series});
}

void cmdSweepRatio(const RunConfig& rc) {
  prepareOutDir(rc, "sweep_ratio");
  const LabeledDataset train = loadCleanTrain(rc);
  const LabeledDataset test = loadCleanTest(rc);
  std::vector<std::string> rows;
  PlotSeries accS, asrS;
  accS.label = "ACC";
  asrS.label = "ASR";
  for (double ratio : rc.sweepRatios) {
    PoisonPlan plan = rc.plan;
    plan.ratio = ratio;
    plan.count.reset();
    PoisonOutput po = poisonInMemory(train, rc, plan);
    quantizeToBytes(po.poisoned);
    TrainConfig tc = rc.train;
    tc.threads = rc.threads;
    SslModel m = pretrain(po.poisoned, tc, rc.augmentPolicy);
    FinetuneConfig fc = rc.finetune;
    fc.threads = rc.threads;
    const LabeledDataset labeled = finetuneLabeledSet(rc, test);
    Mlp head = finetuneClassifier(m.encoder, labeled, rc.classCount, fc);
    const double acc = accuracy(m.encoder, head, test, rc.threads);
    const LabeledDataset triggered = embedTriggerInTestSet(test, rc.activationTrigger, rc.threads);
    const double asr =
        attackSuccessRate(m.encoder, head, triggered.images, rc.plan.targetClass, rc.threads);
    rows.push_back(fmt(ratio) + "," + fmt(acc) + "," + fmt(asr));
    accS.x.push_back(ratio);
    accS.y.push_back(acc);
    asrS.x.push_back(ratio);
    asrS.y.push_back(asr);
    std::printf("sweep ratio: %g -> acc %.4f, asr %.4f\n", ratio, acc, asr);
  }
  writeCsv(outPath(rc, "sweep_ratio.csv"), "ratio,acc,asr", rows);
  writeLinePlot(outPath(rc, "sweep_ratio.svg"), "ACC / ASR vs poisoning ratio", "poisoning ratio",
                "rate", {accS, asrS});
}

}  // namespace clt
