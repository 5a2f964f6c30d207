#include "cltrojan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cltrojan/errors.hpp"
#include "cltrojan/kmeans.hpp"
#include "cltrojan/parallel.hpp"
#include "cltrojan/rng.hpp"

namespace clt {

static constexpr int kDim = 32;
static constexpr std::size_t kRecordBytes = 1 + 3 * kDim * kDim;

LabeledDataset loadCifarBinary(const std::string& path, int classCount) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);
  in.seekg(0, std::ios::end);
  auto bytes = (std::size_t)in.tellg();
  in.seekg(0);
  if (bytes == 0 || bytes % kRecordBytes != 0)
    throw IoError(path + ": size " + std::to_string(bytes) +
                  " is not a multiple of " + std::to_string(kRecordBytes));
  std::size_t n = bytes / kRecordBytes;
  LabeledDataset ds;
  ds.classCount = classCount;
  ds.images.reserve(n);
  ds.labels.reserve(n);
  std::vector<unsigned char> rec(kRecordBytes);
  for (std::size_t i = 0; i < n; i++) {
    if (!in.read((char*)rec.data(), (std::streamsize)rec.size()))
      throw IoError(path + ": truncated record " + std::to_string(i));
    int label = rec[0];
    if (label >= classCount)
      throw IoError(path + ": record " + std::to_string(i) + " has label " +
                    std::to_string(label) + " >= classCount " +
                    std::to_string(classCount));
    ImageTensor img(kDim, kDim, 3);  // file layout matches the planar layout
    for (std::size_t j = 0; j < 3u * kDim * kDim; j++)
      img.data[j] = (double)rec[1 + j];
    ds.images.push_back(std::move(img));
    ds.labels.push_back(label);
  }
  return ds;
}

void saveCifarBinary(const std::string& path, const LabeledDataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write dataset file: " + path);
  std::vector<unsigned char> rec(kRecordBytes);
  for (std::size_t i = 0; i < ds.size(); i++) {
    const ImageTensor& img = ds.images[i];
    if (img.height != kDim || img.width != kDim || img.channels != 3)
      throw IoError("saveCifarBinary: record " + std::to_string(i) +
                    " is not 32x32x3");
    rec[0] = (unsigned char)ds.labels[i];
    for (std::size_t j = 0; j < 3u * kDim * kDim; j++) {
      double v = std::clamp(img.data[j], 0.0, 255.0);
      rec[1 + j] = (unsigned char)std::llround(v);
    }
    out.write((const char*)rec.data(), (std::streamsize)rec.size());
  }
  if (!out) throw IoError("write failed: " + path);
}

void quantizeToBytes(LabeledDataset& ds) {
  for (auto& img : ds.images)
    for (auto& v : img.data) v = (double)std::llround(std::clamp(v, 0.0, 255.0));
}

LabeledDataset subsetByClass(const LabeledDataset& ds, const std::vector<int>& classes,
                             std::size_t perClassCap) {
  std::vector<int> remap((std::size_t)ds.classCount, -1);
  for (std::size_t i = 0; i < classes.size(); i++) {
    int c = classes[i];
    if (c < 0 || c >= ds.classCount)
      throw std::invalid_argument("subsetByClass: class out of range");
    if (remap[(std::size_t)c] != -1)
      throw std::invalid_argument("subsetByClass: duplicate class");
    remap[(std::size_t)c] = (int)i;
  }
  LabeledDataset out;
  out.classCount = (int)classes.size();
  std::vector<std::size_t> taken(classes.size(), 0);
  for (std::size_t i = 0; i < ds.size(); i++) {
    int nc = remap[(std::size_t)ds.labels[i]];
    if (nc < 0) continue;
    if (perClassCap && taken[(std::size_t)nc] >= perClassCap) continue;
    taken[(std::size_t)nc]++;
    out.images.push_back(ds.images[i]);
    out.labels.push_back(nc);
  }
  return out;
}

std::vector<std::size_t> classIndices(const LabeledDataset& ds, int cls) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.size(); i++)
    if (ds.labels[i] == cls) idx.push_back(i);
  return idx;
}

std::size_t resolvePoisonCount(const PoisonPlan& plan, std::size_t trainSize) {
  if (plan.count) return *plan.count;
  if (plan.ratio < 0 || plan.ratio > 1)
    throw std::invalid_argument("poison ratio must be in [0,1]");
  return (std::size_t)std::llround(plan.ratio * (double)trainSize);
}

static std::vector<std::size_t> sampleDistinctIdx(const std::vector<std::size_t>& pool,
                                                  std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx = pool;
  for (std::size_t i = 0; i < k; i++) {
    std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> selectCandidates(const LabeledDataset& ref, const PoisonPlan& plan,
                                          const Eigen::MatrixXd* features) {
  if (plan.targetClass < 0 || plan.targetClass >= ref.classCount)
    throw std::invalid_argument("selectCandidates: target class out of range");
  std::vector<std::size_t> pool = classIndices(ref, plan.targetClass);
  std::size_t k = resolvePoisonCount(plan, ref.size());
  if (k > pool.size())
    throw std::invalid_argument("selectCandidates: poison budget " + std::to_string(k) +
                                " exceeds target-class pool of " +
                                std::to_string(pool.size()));
  if (k == 0) return {};

  if (plan.selector == Selector::Random) {
    Rng rng(plan.seed);
    return sampleDistinctIdx(pool, k, rng);
  }

  if (!features || (std::size_t)features->rows() != ref.size())
    throw std::invalid_argument(
        "selectCandidates: Center/CoreSet need one feature row per record");

  if (plan.selector == Selector::Center) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(features->cols());
    for (std::size_t i : pool) mean += features->row((Eigen::Index)i);
    mean /= (double)pool.size();
    std::vector<std::pair<double, std::size_t>> byDist;
    byDist.reserve(pool.size());
    for (std::size_t i : pool)
      byDist.emplace_back((features->row((Eigen::Index)i) - mean).norm(), i);
    std::sort(byDist.begin(), byDist.end());  // ties break on the lower index
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; i++) out.push_back(byDist[i].second);
    std::sort(out.begin(), out.end());
    return out;
  }

  // CoreSet: cluster the pool, take the member nearest each center
  Eigen::MatrixXd poolFeats((Eigen::Index)pool.size(), features->cols());
  for (std::size_t i = 0; i < pool.size(); i++)
    poolFeats.row((Eigen::Index)i) = features->row((Eigen::Index)pool[i]);
  KMeansResult km = kmeansLloyd(poolFeats, (int)k, plan.seed);
  std::vector<std::size_t> out;
  std::vector<char> used(pool.size(), 0);
  for (int c = 0; c < (int)k; c++) {
    double best = -1;
    std::size_t bi = pool.size();
    for (std::size_t i = 0; i < pool.size(); i++) {
      if (km.assign[i] != c || used[i]) continue;
      double d = (poolFeats.row((Eigen::Index)i) - km.centroids.row(c)).squaredNorm();
      if (bi == pool.size() || d < best) {
        best = d;
        bi = i;
      }
    }
    if (bi < pool.size()) {
      used[bi] = 1;
      out.push_back(pool[bi]);
    }
  }
  // top up if some cluster ended empty
  for (std::size_t i = 0; i < pool.size() && out.size() < k; i++)
    if (!used[i]) {
      used[i] = 1;
      out.push_back(pool[i]);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> PoisonManifest::indices() const {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.index);
  return out;
}

void saveManifestCsv(const std::string& path, const PoisonManifest& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << "index,origin_index,label\n";
  for (const auto& r : m.rows)
    out << r.index << "," << r.originIndex << "," << r.label << "\n";
  if (!out) throw IoError("write failed: " + path);
}

PoisonManifest loadManifestCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "index,origin_index,label")
    throw IoError(path + ": bad manifest header");
  PoisonManifest m;
  std::size_t lineNo = 1;
  while (std::getline(in, line)) {
    lineNo++;
    if (line.empty()) continue;
    ManifestRow r{};
    if (std::sscanf(line.c_str(), "%zu,%zu,%d", &r.index, &r.originIndex, &r.label) != 3)
      throw IoError(path + ": bad manifest row at line " + std::to_string(lineNo));
    m.rows.push_back(r);
  }
  return m;
}

PoisonOutput buildPoisonedDataset(const LabeledDataset& train, const PoisonPlan& plan,
                                  const Eigen::MatrixXd* features) {
  validateTriggerSpec(plan.trigger);
  PoisonOutput out;
  out.poisoned = train;
  std::vector<std::size_t> picked = selectCandidates(train, plan, features);
  for (std::size_t i : picked) {
    out.poisoned.images[i] = applyTrigger(train.images[i], plan.trigger);
    out.manifest.rows.push_back({i, i, train.labels[i]});
  }
  return out;
}

PoisonOutput buildSupervisedPoisonedDataset(const LabeledDataset& train,
                                            const PoisonPlan& plan) {
  validateTriggerSpec(plan.trigger);
  if (plan.targetClass < 0 || plan.targetClass >= train.classCount)
    throw std::invalid_argument("supervised poison: target class out of range");
  std::size_t k = resolvePoisonCount(plan, train.size());
  if (k > train.size())
    throw std::invalid_argument("supervised poison: budget exceeds dataset");
  std::vector<std::size_t> all(train.size());
  for (std::size_t i = 0; i < all.size(); i++) all[i] = i;
  Rng rng(plan.seed);
  std::vector<std::size_t> picked = sampleDistinctIdx(all, k, rng);
  PoisonOutput out;
  out.poisoned = train;
  for (std::size_t i : picked) {
    out.poisoned.images[i] = applyTrigger(train.images[i], plan.trigger);
    out.poisoned.labels[i] = plan.targetClass;  // label flip
    out.manifest.rows.push_back({i, i, plan.targetClass});
  }
  return out;
}

LabeledDataset embedTriggerInTestSet(const LabeledDataset& test, const TriggerSpec& activation,
                                     int threads) {
  validateTriggerSpec(activation);
  LabeledDataset out;
  out.classCount = test.classCount;
  out.labels = test.labels;
  out.images.resize(test.size());
  parallelFor(threads, test.size(), [&](std::size_t i) {
    out.images[i] = applyTrigger(test.images[i], activation);
  });
  return out;
}

}  // namespace clt
