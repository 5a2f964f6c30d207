#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "cltrojan/dataset.hpp"
#include "cltrojan/errors.hpp"
#include "cltrojan/kmeans.hpp"
#include "cltrojan/synth.hpp"
#include "doctest.h"
#include "testutil.hpp"

using namespace clt;
namespace fs = std::filesystem;

static std::string tmpPath(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

static std::vector<char> slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

TEST_CASE("cifar binary: save/load round trip is byte identical") {
  LabeledDataset ds = makeSyntheticImageSet(4, 6, 123);
  // quantize once so the in-memory values are integral like a real load
  std::string p1 = tmpPath("clt_ds1.bin"), p2 = tmpPath("clt_ds2.bin");
  saveCifarBinary(p1, ds);
  LabeledDataset back = loadCifarBinary(p1, 4);
  CHECK(back.size() == ds.size());
  CHECK(back.labels == ds.labels);
  for (double v : back.images[0].data) CHECK(v == (double)(unsigned char)v);
  saveCifarBinary(p2, back);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(fs::file_size(p1) == ds.size() * 3073);
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("cifar binary: malformed files are refused") {
  CHECK_THROWS_AS(loadCifarBinary(tmpPath("clt_no_such_file.bin")), IoError);

  std::string p = tmpPath("clt_trunc.bin");
  {
    std::ofstream out(p, std::ios::binary);
    std::vector<char> half(3073 / 2, 7);
    out.write(half.data(), (std::streamsize)half.size());
  }
  CHECK_THROWS_AS(loadCifarBinary(p), IoError);

  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    std::vector<char> rec(3073, 0);
    rec[0] = 25;  // label out of range for 10 classes
    out.write(rec.data(), 3073);
  }
  CHECK_THROWS_AS(loadCifarBinary(p, 10), IoError);
  CHECK_NOTHROW(loadCifarBinary(p, 26));
  fs::remove(p);
}

TEST_CASE("manifest csv round trip") {
  PoisonManifest m;
  m.rows = {{3, 3, 0}, {17, 17, 0}, {40, 40, 0}};
  std::string p = tmpPath("clt_manifest.csv");
  saveManifestCsv(p, m);
  PoisonManifest back = loadManifestCsv(p);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[1].index == 17);
  CHECK(back.rows[1].originIndex == 17);
  CHECK(back.rows[1].label == 0);
  CHECK(back.indices() == std::vector<std::size_t>{3, 17, 40});

  std::ofstream(p) << "wrong,header\n";
  CHECK_THROWS_AS(loadManifestCsv(p), IoError);
  fs::remove(p);
}

TEST_CASE("poison count resolution") {
  PoisonPlan plan;
  plan.ratio = 0.01;
  CHECK(resolvePoisonCount(plan, 6000) == 60);
  plan.ratio = 0.0;
  CHECK(resolvePoisonCount(plan, 6000) == 0);
  plan.count = 7;
  CHECK(resolvePoisonCount(plan, 6000) == 7);
  plan.count.reset();
  plan.ratio = -0.1;
  CHECK_THROWS_AS(resolvePoisonCount(plan, 100), std::invalid_argument);
}

TEST_CASE("selector: random picks distinct target-class records, seeded") {
  LabeledDataset ds = makeSyntheticImageSet(3, 50, 5);
  PoisonPlan plan;
  plan.targetClass = 1;
  plan.count = 10;
  plan.seed = 42;
  auto a = selectCandidates(ds, plan, nullptr);
  auto b = selectCandidates(ds, plan, nullptr);
  CHECK(a == b);
  CHECK(a.size() == 10);
  std::set<std::size_t> uniq(a.begin(), a.end());
  CHECK(uniq.size() == 10);
  for (auto i : a) CHECK(ds.labels[i] == 1);
  plan.seed = 43;
  CHECK(selectCandidates(ds, plan, nullptr) != a);

  plan.count = 51;  // pool has only 50
  CHECK_THROWS_AS(selectCandidates(ds, plan, nullptr), std::invalid_argument);
}

TEST_CASE("selector: center picks the pool point nearest the class mean") {
  // 3 one-dimensional points in class 0 at 0, 1, 10; mean 11/3 -> nearest is 1
  LabeledDataset ds = makeSyntheticImageSet(2, 3, 9);
  ds.labels = {0, 1, 0, 1, 0, 1};
  Eigen::MatrixXd feats(6, 1);
  feats << 0, 5, 1, 6, 10, 7;
  PoisonPlan plan;
  plan.targetClass = 0;
  plan.count = 1;
  plan.selector = Selector::Center;
  auto picked = selectCandidates(ds, plan, &feats);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] == 2);  // the record holding value 1

  CHECK_THROWS_AS(selectCandidates(ds, plan, nullptr), std::invalid_argument);
}

TEST_CASE("selector: core-set takes one representative per cluster") {
  LabeledDataset ds = makeSyntheticImageSet(2, 4, 9);
  ds.labels = {0, 1, 0, 1, 0, 1, 0, 1};  // class-0 records: 0,2,4,6
  Eigen::MatrixXd feats(8, 2);
  feats << 0.0, 0.1, 99, 99, 0.1, 0.0, 99, 99, 10.0, 10.1, 99, 99, 10.1, 10.0, 99, 99;
  PoisonPlan plan;
  plan.targetClass = 0;
  plan.count = 2;
  plan.selector = Selector::CoreSet;
  plan.seed = 3;
  auto picked = selectCandidates(ds, plan, &feats);
  REQUIRE(picked.size() == 2);
  bool nearOrigin = picked[0] == 0 || picked[0] == 2;
  bool nearTen = picked[1] == 4 || picked[1] == 6;
  CHECK(nearOrigin);
  CHECK(nearTen);
}

TEST_CASE("kmeans: tiny exhaustive case and convergence flag") {
  Eigen::MatrixXd X(4, 1);
  X << 0.0, 0.2, 9.8, 10.0;
  KMeansResult km = kmeansLloyd(X, 2, 7);
  CHECK(km.converged);
  CHECK(km.assign[0] == km.assign[1]);
  CHECK(km.assign[2] == km.assign[3]);
  CHECK(km.assign[0] != km.assign[2]);
  double lo = std::min(km.centroids(0, 0), km.centroids(1, 0));
  double hi = std::max(km.centroids(0, 0), km.centroids(1, 0));
  CHECK(lo == doctest::Approx(0.1));
  CHECK(hi == doctest::Approx(9.9));
  CHECK_THROWS_AS(kmeansLloyd(X, 5, 1), std::invalid_argument);

  // well separated pairs score near 1; an interleaved split scores <= 0
  std::vector<int> good = {0, 0, 1, 1};
  CHECK(meanSilhouette2(X, good) > 0.9);
  Eigen::MatrixXd Y(4, 1);
  Y << 0.0, 1.0, 2.0, 3.0;
  std::vector<int> interleaved = {0, 1, 0, 1};
  // by hand: s = {0, -1/2, -1/2, 0} -> mean -1/4
  CHECK(meanSilhouette2(Y, interleaved) == doctest::Approx(-0.25));
}

TEST_CASE("poisoning: in-place, label-preserving, manifest-exact") {
  LabeledDataset ds = makeSyntheticImageSet(3, 40, 77);
  PoisonPlan plan;
  plan.targetClass = 2;
  plan.ratio = 0.05;  // 6 of 120
  plan.seed = 11;
  PoisonOutput out = buildPoisonedDataset(ds, plan, nullptr);
  CHECK(out.poisoned.size() == ds.size());
  CHECK(out.poisoned.labels == ds.labels);
  CHECK(out.manifest.rows.size() == 6);
  std::vector<std::size_t> idx = out.manifest.indices();
  std::set<std::size_t> poisoned(idx.begin(), idx.end());
  for (std::size_t i = 0; i < ds.size(); i++) {
    double d = cltest::maxAbsDiff(ds.images[i].data, out.poisoned.images[i].data);
    if (poisoned.count(i)) {
      CHECK(ds.labels[i] == 2);
      CHECK(d > 0.1);
    } else {
      CHECK(d == 0.0);
    }
  }
  for (const auto& r : out.manifest.rows) {
    CHECK(r.index == r.originIndex);
    CHECK(r.label == 2);
  }
}

TEST_CASE("poisoning: zero ratio leaves the dataset untouched") {
  LabeledDataset ds = makeSyntheticImageSet(3, 10, 4);
  PoisonPlan plan;
  plan.ratio = 0.0;
  PoisonOutput out = buildPoisonedDataset(ds, plan, nullptr);
  CHECK(out.manifest.rows.empty());
  for (std::size_t i = 0; i < ds.size(); i++)
    CHECK(cltest::maxAbsDiff(ds.images[i].data, out.poisoned.images[i].data) == 0.0);
}

TEST_CASE("supervised poisoning flips labels to the target class") {
  LabeledDataset ds = makeSyntheticImageSet(3, 40, 13);
  PoisonPlan plan;
  plan.targetClass = 0;
  plan.count = 30;
  plan.seed = 5;
  PoisonOutput out = buildSupervisedPoisonedDataset(ds, plan);
  CHECK(out.manifest.rows.size() == 30);
  bool crossClass = false;
  for (const auto& r : out.manifest.rows) {
    CHECK(out.poisoned.labels[r.index] == 0);
    if (ds.labels[r.index] != 0) crossClass = true;
  }
  CHECK(crossClass);  // candidates come from every class
}

TEST_CASE("test-set embedding applies the activation trigger everywhere") {
  LabeledDataset ds = makeSyntheticImageSet(2, 8, 21);
  TriggerSpec act;
  act.magnitude = 100;
  LabeledDataset trig = embedTriggerInTestSet(ds, act, 1);
  CHECK(trig.labels == ds.labels);
  for (std::size_t i = 0; i < ds.size(); i++) {
    ImageTensor want = applyTrigger(ds.images[i], act);
    CHECK(cltest::maxAbsDiff(want.data, trig.images[i].data) == 0.0);
  }
  LabeledDataset trig3 = embedTriggerInTestSet(ds, act, 3);
  for (std::size_t i = 0; i < ds.size(); i++)
    CHECK(cltest::maxAbsDiff(trig3.images[i].data, trig.images[i].data) == 0.0);
}

TEST_CASE("class subsetting remaps labels and caps sizes") {
  LabeledDataset ds = makeSyntheticImageSet(5, 20, 31);
  LabeledDataset sub = subsetByClass(ds, {3, 0, 4}, 7);
  CHECK(sub.classCount == 3);
  CHECK(sub.size() == 21);
  std::vector<int> counts(3, 0);
  for (int l : sub.labels) counts[(std::size_t)l]++;
  CHECK(counts == std::vector<int>{7, 7, 7});
  CHECK_THROWS_AS(subsetByClass(ds, {0, 0}, 5), std::invalid_argument);
  CHECK_THROWS_AS(subsetByClass(ds, {9}, 5), std::invalid_argument);
}

TEST_CASE("synthetic set: balanced, in range, deterministic") {
  LabeledDataset a = makeSyntheticImageSet(3, 12, 55);
  LabeledDataset b = makeSyntheticImageSet(3, 12, 55);
  CHECK(a.size() == 36);
  std::vector<int> counts(3, 0);
  for (int l : a.labels) counts[(std::size_t)l]++;
  CHECK(counts == std::vector<int>{12, 12, 12});
  for (std::size_t i = 0; i < a.size(); i++)
    CHECK(cltest::maxAbsDiff(a.images[i].data, b.images[i].data) == 0.0);
  for (double v : a.images[0].data) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
  }
  LabeledDataset c = makeSyntheticImageSet(3, 12, 56);
  CHECK(cltest::maxAbsDiff(a.images[0].data, c.images[0].data) > 0.0);
}
