#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cltrojan/dataset.hpp"
#include "cltrojan/metrics.hpp"
#include "cltrojan/train.hpp"

namespace clt {

// Line-oriented key=value store with [section] headers. '#' starts a
// comment, keys are unique within their section, insertion order is kept on
// write, doubles serialize shortest-round-trip so a saved file reloads to
// bit-identical values. Lookups on missing keys and malformed values throw
// ConfigError with file:line / section.key diagnostics.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& origin = "<string>");
  static ConfigFile load(const std::string& path);
  std::string serialize() const;
  void save(const std::string& path) const;

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sectionNames() const;
  std::vector<std::string> keysIn(const std::string& section) const;

  std::string get(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double getDouble(const std::string& section, const std::string& key, double fallback) const;
  int getInt(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t getUint(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool getBool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> getDoubles(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;
  std::vector<int> getInts(const std::string& section, const std::string& key,
                           const std::vector<int>& fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  void setDouble(const std::string& section, const std::string& key, double value);
  void setInt(const std::string& section, const std::string& key, long long value);
  void setUint(const std::string& section, const std::string& key, std::uint64_t value);
  void setBool(const std::string& section, const std::string& key, bool value);
  void setDoubles(const std::string& section, const std::string& key,
                  const std::vector<double>& values);
  void setInts(const std::string& section, const std::string& key, const std::vector<int>& values);

 private:
  struct Entry {
    std::string key, value;
    int line = 0;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
  };

  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& why) const;

  std::vector<Section> sections_;
  std::string origin_ = "<empty>";
};

struct DefenseSettings {
  int stripPerturb = 100;       // overlays blended per scored input
  int stripOverlayCount = 200;  // clean images in the overlay set
  int stripInputsPerSide = 300; // clean / triggered inputs scored
  std::vector<double> stripTargetFprs = {0.005, 0.01, 0.02};
  int ablWindow = 3;            // early epochs averaged
  double ablFraction = 0.01;    // fraction of samples isolated
  std::uint64_t seed = 0xDEF;
};

// Everything a run needs; a saved resolved config reproduces the run
// bit-for-bit in single-threaded mode.
struct RunConfig {
  // data: file-backed when paths are set, synthetic otherwise
  std::string trainPath, testPath;
  int classCount = 3;
  std::vector<int> classes;  // original labels kept from a file (empty = all)
  int fileClassCount = 10;   // label range of the file before subsetting
  std::size_t synthTrainPerClass = 2000;
  std::size_t synthTestPerClass = 1000;
  std::uint64_t dataSeed = 7;

  TriggerSpec poisonTrigger;      // magnitude 50 by default
  TriggerSpec activationTrigger;  // magnitude 100 by default
  PoisonPlan plan;                // its trigger field mirrors poisonTrigger

  AugmentPolicy augmentPolicy;
  TrainConfig train;
  FinetuneConfig finetune;
  std::size_t finetuneLabeledPerClass = 50;  // labeled subset drawn from test
  SupervisedConfig supervised;
  ERConfig er;
  std::vector<double> erProbeMagnitudes = {5, 50, 500};
  std::vector<double> sweepActivationMagnitudes = {25, 50, 100, 200};
  std::vector<double> sweepRatios = {0.0, 0.005, 0.01};
  DefenseSettings defense;

  std::uint64_t seed = 1;  // base for sub-seeds not set explicitly
  std::string outDir = "out";
  int threads = 1;
};

// Defaults overridden by the file; sub-module seeds not present in the file
// derive from [run] seed. Validates and throws ConfigError on bad values.
RunConfig runConfigFromFile(const ConfigFile& f);
// Every field written out, so the result reloads to an identical RunConfig.
ConfigFile runConfigToFile(const RunConfig& rc);

void validateRunConfig(const RunConfig& rc);

std::string selectorName(Selector s);
Selector selectorFromName(const std::string& name);

}  // namespace clt
