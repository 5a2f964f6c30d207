#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cltrojan/image.hpp"
#include "cltrojan/trigger.hpp"

namespace clt {

struct LabeledDataset {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  int classCount = 0;

  std::size_t size() const { return images.size(); }
};

// 3073-byte records: 1 label byte + 32*32 R + 32*32 G + 32*32 B, row-major
LabeledDataset loadCifarBinary(const std::string& path, int classCount = 10);
void saveCifarBinary(const std::string& path, const LabeledDataset& ds);

// byte-file rounding (clamp to [0,255], round half away from zero) applied in
// place; in-memory pipelines use it to match a save/load round trip exactly
void quantizeToBytes(LabeledDataset& ds);

// keep the listed original classes (in the given order, relabeled 0..k-1),
// capped per class; record order is preserved
LabeledDataset subsetByClass(const LabeledDataset& ds, const std::vector<int>& classes,
                             std::size_t perClassCap);

std::vector<std::size_t> classIndices(const LabeledDataset& ds, int cls);

enum class Selector { Random, Center, CoreSet };

struct PoisonPlan {
  int targetClass = 0;
  std::optional<std::size_t> count;  // wins over ratio when set
  double ratio = 0.01;
  Selector selector = Selector::Random;
  TriggerSpec trigger;
  std::uint64_t seed = 1;
};

std::size_t resolvePoisonCount(const PoisonPlan& plan, std::size_t trainSize);

// picks candidate indices out of the target-class pool of `ref`; `features`
// (one row per ref record, aligned by index) is required by Center/CoreSet
std::vector<std::size_t> selectCandidates(const LabeledDataset& ref, const PoisonPlan& plan,
                                          const Eigen::MatrixXd* features);

struct ManifestRow {
  std::size_t index;        // position in the emitted dataset
  std::size_t originIndex;  // position the clean source record came from
  int label;
};

struct PoisonManifest {
  std::vector<ManifestRow> rows;
  std::vector<std::size_t> indices() const;
};

void saveManifestCsv(const std::string& path, const PoisonManifest& m);
PoisonManifest loadManifestCsv(const std::string& path);

struct PoisonOutput {
  LabeledDataset poisoned;
  PoisonManifest manifest;
};

// replaces the selected target-class records in place with their triggered
// versions; labels are untouched
PoisonOutput buildPoisonedDataset(const LabeledDataset& train, const PoisonPlan& plan,
                                  const Eigen::MatrixXd* features);

// label-flipping variant for the supervised baseline: candidates are drawn
// from every class and their labels are rewritten to the target class
PoisonOutput buildSupervisedPoisonedDataset(const LabeledDataset& train,
                                            const PoisonPlan& plan);

LabeledDataset embedTriggerInTestSet(const LabeledDataset& test, const TriggerSpec& activation,
                                     int threads = 1);

}  // namespace clt
