#include "cltrojan/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cltrojan/errors.hpp"
#include "cltrojan/rng.hpp"

namespace clt {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

double parseDouble(const std::string& s, const std::string& where) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(where + ": not a number: '" + s + "'");
  return v;
}

long long parseInt(const std::string& s, const std::string& where) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(where + ": not an integer: '" + s + "'");
  return v;
}

std::uint64_t parseUint(const std::string& s, const std::string& where) {
  std::uint64_t v = 0;
  const bool hex = s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
  const char* begin = s.data() + (hex ? 2 : 0);
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(begin, end, v, hex ? 16 : 10);
  if (ec != std::errc() || p != end || begin == end)
    throw ConfigError(where + ": not an unsigned integer: '" + s + "'");
  return v;
}

std::string formatDouble(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
  ConfigFile f;
  f.origin_ = origin;
  std::stringstream in(text);
  std::string raw;
  int lineNo = 0;
  Section* cur = nullptr;
  auto where = [&] { return origin + ":" + std::to_string(lineNo); };
  while (std::getline(in, raw)) {
    lineNo++;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '[') {
      if (line.back() != ']') throw ConfigError(where() + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(where() + ": empty section name");
      for (const auto& s : f.sections_)
        if (s.name == name) throw ConfigError(where() + ": duplicate section [" + name + "]");
      f.sections_.push_back({name, {}});
      cur = &f.sections_.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + ": expected key = value");
    if (!cur) throw ConfigError(where() + ": key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where() + ": empty key");
    for (const auto& e : cur->entries)
      if (e.key == key)
        throw ConfigError(where() + ": duplicate key '" + key + "' in [" + cur->name + "]");
    cur->entries.push_back({key, trim(line.substr(eq + 1)), lineNo});
  }
  return f;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string ConfigFile::serialize() const {
  std::string out;
  for (const auto& s : sections_) {
    out += "[" + s.name + "]\n";
    for (const auto& e : s.entries) out += e.key + " = " + e.value + "\n";
    out += "\n";
  }
  return out;
}

void ConfigFile::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config " + path);
  out << serialize();
  if (!out) throw IoError("short write to " + path);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  for (const auto& s : sections_)
    if (s.name == section)
      for (const auto& e : s.entries)
        if (e.key == key) return &e;
  return nullptr;
}

void ConfigFile::fail(const std::string& section, const std::string& key,
                      const std::string& why) const {
  throw ConfigError(origin_ + ": [" + section + "] " + key + ": " + why);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::vector<std::string> ConfigFile::sectionNames() const {
  std::vector<std::string> out;
  for (const auto& s : sections_) out.push_back(s.name);
  return out;
}

std::vector<std::string> ConfigFile::keysIn(const std::string& section) const {
  std::vector<std::string> out;
  for (const auto& s : sections_)
    if (s.name == section)
      for (const auto& e : s.entries) out.push_back(e.key);
  return out;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) fail(section, key, "missing required key");
  return e->value;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double ConfigFile::getDouble(const std::string& section, const std::string& key,
                             double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  return parseDouble(e->value, origin_ + ":" + std::to_string(e->line));
}

int ConfigFile::getInt(const std::string& section, const std::string& key, int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  return (int)parseInt(e->value, origin_ + ":" + std::to_string(e->line));
}

std::uint64_t ConfigFile::getUint(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  return parseUint(e->value, origin_ + ":" + std::to_string(e->line));
}

bool ConfigFile::getBool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  fail(section, key, "expected true/false, got '" + e->value + "'");
}

std::vector<double> ConfigFile::getDoubles(const std::string& section, const std::string& key,
                                           const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const std::string where = origin_ + ":" + std::to_string(e->line);
  std::vector<double> out;
  for (const auto& tok : splitList(e->value)) out.push_back(parseDouble(tok, where));
  return out;
}

std::vector<int> ConfigFile::getInts(const std::string& section, const std::string& key,
                                     const std::vector<int>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const std::string where = origin_ + ":" + std::to_string(e->line);
  std::vector<int> out;
  for (const auto& tok : splitList(e->value)) out.push_back((int)parseInt(tok, where));
  return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
  Section* sec = nullptr;
  for (auto& s : sections_)
    if (s.name == section) sec = &s;
  if (!sec) {
    sections_.push_back({section, {}});
    sec = &sections_.back();
  }
  for (auto& e : sec->entries)
    if (e.key == key) {
      e.value = value;
      return;
    }
  sec->entries.push_back({key, value, 0});
}

void ConfigFile::setDouble(const std::string& section, const std::string& key, double value) {
  set(section, key, formatDouble(value));
}
void ConfigFile::setInt(const std::string& section, const std::string& key, long long value) {
  set(section, key, std::to_string(value));
}
void ConfigFile::setUint(const std::string& section, const std::string& key, std::uint64_t value) {
  set(section, key, std::to_string(value));
}
void ConfigFile::setBool(const std::string& section, const std::string& key, bool value) {
  set(section, key, value ? "true" : "false");
}
void ConfigFile::setDoubles(const std::string& section, const std::string& key,
                            const std::vector<double>& values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); i++)
    joined += (i ? "," : "") + formatDouble(values[i]);
  set(section, key, joined);
}
void ConfigFile::setInts(const std::string& section, const std::string& key,
                         const std::vector<int>& values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); i++) joined += (i ? "," : "") + std::to_string(values[i]);
  set(section, key, joined);
}

std::string selectorName(Selector s) {
  switch (s) {
    case Selector::Random: return "random";
    case Selector::Center: return "center";
    case Selector::CoreSet: return "coreset";
  }
  throw std::invalid_argument("selectorName: unknown selector");
}

Selector selectorFromName(const std::string& name) {
  if (name == "random") return Selector::Random;
  if (name == "center") return Selector::Center;
  if (name == "coreset") return Selector::CoreSet;
  throw ConfigError("unknown selector '" + name + "' (random|center|coreset)");
}

namespace {

std::string bandsToString(const std::vector<std::pair<int, int>>& bands) {
  std::string out;
  for (std::size_t i = 0; i < bands.size(); i++)
    out += (i ? "," : "") + std::to_string(bands[i].first) + ":" + std::to_string(bands[i].second);
  return out;
}

std::vector<std::pair<int, int>> bandsFromString(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  for (const auto& tok : splitList(s)) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ConfigError("band '" + tok + "' is not u:v");
    out.emplace_back((int)parseInt(trim(tok.substr(0, colon)), "band"),
                     (int)parseInt(trim(tok.substr(colon + 1)), "band"));
  }
  return out;
}

std::string channelsToString(const std::vector<ChromaChannel>& ch) {
  std::string out;
  for (std::size_t i = 0; i < ch.size(); i++)
    out += std::string(i ? "," : "") + (ch[i] == ChromaChannel::Cb ? "cb" : "cr");
  return out;
}

std::vector<ChromaChannel> channelsFromString(const std::string& s) {
  std::vector<ChromaChannel> out;
  for (const auto& tok : splitList(s)) {
    if (tok == "cb") out.push_back(ChromaChannel::Cb);
    else if (tok == "cr") out.push_back(ChromaChannel::Cr);
    else throw ConfigError("unknown chroma channel '" + tok + "' (cb|cr)");
  }
  return out;
}

}  // namespace

RunConfig runConfigFromFile(const ConfigFile& f) {
  RunConfig rc;
  rc.seed = f.getUint("run", "seed", rc.seed);
  rc.outDir = f.get("run", "out_dir", rc.outDir);
  rc.threads = f.getInt("run", "threads", rc.threads);

  rc.trainPath = f.get("data", "train_path", "");
  rc.testPath = f.get("data", "test_path", "");
  rc.classCount = f.getInt("data", "class_count", rc.classCount);
  rc.classes = f.getInts("data", "classes", rc.classes);
  rc.fileClassCount = f.getInt("data", "file_class_count", rc.fileClassCount);
  rc.synthTrainPerClass =
      (std::size_t)f.getInt("data", "synth_train_per_class", (int)rc.synthTrainPerClass);
  rc.synthTestPerClass =
      (std::size_t)f.getInt("data", "synth_test_per_class", (int)rc.synthTestPerClass);
  rc.dataSeed = f.getUint("data", "seed", mixSeed(rc.seed, 0xDA7A));

  TriggerSpec base;
  base.blockSize = f.getInt("trigger", "block_size", base.blockSize);
  if (f.has("trigger", "bands")) base.bands = bandsFromString(f.get("trigger", "bands"));
  if (f.has("trigger", "channels")) base.channels = channelsFromString(f.get("trigger", "channels"));
  rc.poisonTrigger = base;
  rc.poisonTrigger.magnitude = f.getDouble("trigger", "poison_magnitude", 50.0);
  rc.activationTrigger = base;
  rc.activationTrigger.magnitude = f.getDouble("trigger", "activation_magnitude", 100.0);

  rc.plan.targetClass = f.getInt("poison", "target_class", rc.plan.targetClass);
  rc.plan.ratio = f.getDouble("poison", "ratio", rc.plan.ratio);
  const int count = f.getInt("poison", "count", -1);
  rc.plan.count = count >= 0 ? std::optional<std::size_t>((std::size_t)count) : std::nullopt;
  rc.plan.selector = selectorFromName(f.get("poison", "selector", "random"));
  rc.plan.seed = f.getUint("poison", "seed", mixSeed(rc.seed, 0x9015));
  rc.plan.trigger = rc.poisonTrigger;

  AugmentPolicy& a = rc.augmentPolicy;
  a.crop = f.getBool("augment", "crop", a.crop);
  a.cropScaleMin = f.getDouble("augment", "crop_scale_min", a.cropScaleMin);
  a.cropScaleMax = f.getDouble("augment", "crop_scale_max", a.cropScaleMax);
  a.cropAspectMin = f.getDouble("augment", "crop_aspect_min", a.cropAspectMin);
  a.cropAspectMax = f.getDouble("augment", "crop_aspect_max", a.cropAspectMax);
  a.flip = f.getBool("augment", "flip", a.flip);
  a.flipProb = f.getDouble("augment", "flip_prob", a.flipProb);
  a.jitter = f.getBool("augment", "jitter", a.jitter);
  a.jitterProb = f.getDouble("augment", "jitter_prob", a.jitterProb);
  a.brightness = f.getDouble("augment", "brightness", a.brightness);
  a.contrast = f.getDouble("augment", "contrast", a.contrast);
  a.saturation = f.getDouble("augment", "saturation", a.saturation);
  a.hue = f.getDouble("augment", "hue", a.hue);
  a.grayscale = f.getBool("augment", "grayscale", a.grayscale);
  a.grayscaleProb = f.getDouble("augment", "grayscale_prob", a.grayscaleProb);

  TrainConfig& t = rc.train;
  const std::string methodName = f.get("train", "method", sslMethodName(t.method));
  try {
    t.method = sslMethodFromName(methodName);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  TrainConfig methodDefaults = defaultTrainConfig(t.method);
  t.lr = f.getDouble("train", "lr", methodDefaults.lr);
  t.weightDecay = f.getDouble("train", "weight_decay", methodDefaults.weightDecay);
  t.temperature = f.getDouble("train", "temperature", t.temperature);
  t.momentum = f.getDouble("train", "momentum", t.momentum);
  t.batchSize = f.getInt("train", "batch_size", t.batchSize);
  t.epochs = f.getInt("train", "epochs", t.epochs);
  t.emaDecay = f.getDouble("train", "ema_decay", t.emaDecay);
  t.seed = f.getUint("train", "seed", mixSeed(rc.seed, 0x7121));
  t.encoderDims = f.getInts("train", "encoder_dims", t.encoderDims);
  t.projectorHidden = f.getInt("train", "projector_hidden", t.projectorHidden);
  t.projectorOut = f.getInt("train", "projector_out", t.projectorOut);
  t.predictorHidden = f.getInt("train", "predictor_hidden", t.predictorHidden);
  t.threads = rc.threads;

  FinetuneConfig& ft = rc.finetune;
  ft.lr = f.getDouble("finetune", "lr", ft.lr);
  ft.momentum = f.getDouble("finetune", "momentum", ft.momentum);
  ft.epochs = f.getInt("finetune", "epochs", ft.epochs);
  ft.batchSize = f.getInt("finetune", "batch_size", ft.batchSize);
  ft.hidden = f.getInt("finetune", "hidden", ft.hidden);
  ft.freezeEncoder = f.getBool("finetune", "freeze_encoder", ft.freezeEncoder);
  ft.encoderLrScale = f.getDouble("finetune", "encoder_lr_scale", ft.encoderLrScale);
  ft.seed = f.getUint("finetune", "seed", mixSeed(rc.seed, 0xF17E));
  ft.threads = rc.threads;
  rc.finetuneLabeledPerClass =
      (std::size_t)f.getInt("finetune", "labeled_per_class", (int)rc.finetuneLabeledPerClass);

  SupervisedConfig& sup = rc.supervised;
  sup.lr = f.getDouble("supervised", "lr", sup.lr);
  sup.momentum = f.getDouble("supervised", "momentum", sup.momentum);
  sup.weightDecay = f.getDouble("supervised", "weight_decay", sup.weightDecay);
  sup.batchSize = f.getInt("supervised", "batch_size", sup.batchSize);
  sup.epochs = f.getInt("supervised", "epochs", sup.epochs);
  sup.seed = f.getUint("supervised", "seed", mixSeed(rc.seed, 0x50BE));
  sup.encoderDims = f.getInts("supervised", "encoder_dims", sup.encoderDims);
  sup.hidden = f.getInt("supervised", "hidden", sup.hidden);
  sup.threads = rc.threads;

  ERConfig& er = rc.er;
  er.perClass = f.getInt("er", "per_class", er.perClass);
  er.augDraws = f.getInt("er", "aug_draws", er.augDraws);
  er.probeCount = f.getInt("er", "probe_count", er.probeCount);
  er.k = f.getInt("er", "k", er.k);
  er.targetClass = f.getInt("er", "target_class", rc.plan.targetClass);
  er.seed = f.getUint("er", "seed", mixSeed(rc.seed, 0xE12));
  rc.erProbeMagnitudes = f.getDoubles("er", "probe_magnitudes", rc.erProbeMagnitudes);

  rc.sweepActivationMagnitudes =
      f.getDoubles("sweep", "activation_magnitudes", rc.sweepActivationMagnitudes);
  rc.sweepRatios = f.getDoubles("sweep", "ratios", rc.sweepRatios);

  DefenseSettings& d = rc.defense;
  d.stripPerturb = f.getInt("defense", "strip_perturb", d.stripPerturb);
  d.stripOverlayCount = f.getInt("defense", "strip_overlay_count", d.stripOverlayCount);
  d.stripInputsPerSide = f.getInt("defense", "strip_inputs_per_side", d.stripInputsPerSide);
  d.stripTargetFprs = f.getDoubles("defense", "strip_target_fprs", d.stripTargetFprs);
  d.ablWindow = f.getInt("defense", "abl_window", d.ablWindow);
  d.ablFraction = f.getDouble("defense", "abl_fraction", d.ablFraction);
  d.seed = f.getUint("defense", "seed", mixSeed(rc.seed, 0xDEF5));

  validateRunConfig(rc);
  return rc;
}

ConfigFile runConfigToFile(const RunConfig& rc) {
  ConfigFile f = ConfigFile::parse("", "<resolved>");
  f.setUint("run", "seed", rc.seed);
  f.set("run", "out_dir", rc.outDir);
  f.setInt("run", "threads", rc.threads);

  f.set("data", "train_path", rc.trainPath);
  f.set("data", "test_path", rc.testPath);
  f.setInt("data", "class_count", rc.classCount);
  f.setInts("data", "classes", rc.classes);
  f.setInt("data", "file_class_count", rc.fileClassCount);
  f.setInt("data", "synth_train_per_class", (long long)rc.synthTrainPerClass);
  f.setInt("data", "synth_test_per_class", (long long)rc.synthTestPerClass);
  f.setUint("data", "seed", rc.dataSeed);

  f.setInt("trigger", "block_size", rc.poisonTrigger.blockSize);
  f.set("trigger", "bands", bandsToString(rc.poisonTrigger.bands));
  f.set("trigger", "channels", channelsToString(rc.poisonTrigger.channels));
  f.setDouble("trigger", "poison_magnitude", rc.poisonTrigger.magnitude);
  f.setDouble("trigger", "activation_magnitude", rc.activationTrigger.magnitude);

  f.setInt("poison", "target_class", rc.plan.targetClass);
  f.setDouble("poison", "ratio", rc.plan.ratio);
  f.setInt("poison", "count", rc.plan.count ? (long long)*rc.plan.count : -1);
  f.set("poison", "selector", selectorName(rc.plan.selector));
  f.setUint("poison", "seed", rc.plan.seed);

  const AugmentPolicy& a = rc.augmentPolicy;
  f.setBool("augment", "crop", a.crop);
  f.setDouble("augment", "crop_scale_min", a.cropScaleMin);
  f.setDouble("augment", "crop_scale_max", a.cropScaleMax);
  f.setDouble("augment", "crop_aspect_min", a.cropAspectMin);
  f.setDouble("augment", "crop_aspect_max", a.cropAspectMax);
  f.setBool("augment", "flip", a.flip);
  f.setDouble("augment", "flip_prob", a.flipProb);
  f.setBool("augment", "jitter", a.jitter);
  f.setDouble("augment", "jitter_prob", a.jitterProb);
  f.setDouble("augment", "brightness", a.brightness);
  f.setDouble("augment", "contrast", a.contrast);
  f.setDouble("augment", "saturation", a.saturation);
  f.setDouble("augment", "hue", a.hue);
  f.setBool("augment", "grayscale", a.grayscale);
  f.setDouble("augment", "grayscale_prob", a.grayscaleProb);

  const TrainConfig& t = rc.train;
  f.set("train", "method", sslMethodName(t.method));
  f.setDouble("train", "temperature", t.temperature);
  f.setDouble("train", "lr", t.lr);
  f.setDouble("train", "momentum", t.momentum);
  f.setDouble("train", "weight_decay", t.weightDecay);
  f.setInt("train", "batch_size", t.batchSize);
  f.setInt("train", "epochs", t.epochs);
  f.setDouble("train", "ema_decay", t.emaDecay);
  f.setUint("train", "seed", t.seed);
  f.setInts("train", "encoder_dims", t.encoderDims);
  f.setInt("train", "projector_hidden", t.projectorHidden);
  f.setInt("train", "projector_out", t.projectorOut);
  f.setInt("train", "predictor_hidden", t.predictorHidden);

  const FinetuneConfig& ft = rc.finetune;
  f.setDouble("finetune", "lr", ft.lr);
  f.setDouble("finetune", "momentum", ft.momentum);
  f.setInt("finetune", "epochs", ft.epochs);
  f.setInt("finetune", "batch_size", ft.batchSize);
  f.setInt("finetune", "hidden", ft.hidden);
  f.setBool("finetune", "freeze_encoder", ft.freezeEncoder);
  f.setDouble("finetune", "encoder_lr_scale", ft.encoderLrScale);
  f.setInt("finetune", "labeled_per_class", (long long)rc.finetuneLabeledPerClass);
  f.setUint("finetune", "seed", ft.seed);

  const SupervisedConfig& sup = rc.supervised;
  f.setDouble("supervised", "lr", sup.lr);
  f.setDouble("supervised", "momentum", sup.momentum);
  f.setDouble("supervised", "weight_decay", sup.weightDecay);
  f.setInt("supervised", "batch_size", sup.batchSize);
  f.setInt("supervised", "epochs", sup.epochs);
  f.setUint("supervised", "seed", sup.seed);
  f.setInts("supervised", "encoder_dims", sup.encoderDims);
  f.setInt("supervised", "hidden", sup.hidden);

  const ERConfig& er = rc.er;
  f.setInt("er", "per_class", er.perClass);
  f.setInt("er", "aug_draws", er.augDraws);
  f.setInt("er", "probe_count", er.probeCount);
  f.setInt("er", "k", er.k);
  f.setInt("er", "target_class", er.targetClass);
  f.setUint("er", "seed", er.seed);
  f.setDoubles("er", "probe_magnitudes", rc.erProbeMagnitudes);

  f.setDoubles("sweep", "activation_magnitudes", rc.sweepActivationMagnitudes);
  f.setDoubles("sweep", "ratios", rc.sweepRatios);

  const DefenseSettings& d = rc.defense;
  f.setInt("defense", "strip_perturb", d.stripPerturb);
  f.setInt("defense", "strip_overlay_count", d.stripOverlayCount);
  f.setInt("defense", "strip_inputs_per_side", d.stripInputsPerSide);
  f.setDoubles("defense", "strip_target_fprs", d.stripTargetFprs);
  f.setInt("defense", "abl_window", d.ablWindow);
  f.setDouble("defense", "abl_fraction", d.ablFraction);
  f.setUint("defense", "seed", d.seed);
  return f;
}

void validateRunConfig(const RunConfig& rc) {
  try {
    validateTriggerSpec(rc.poisonTrigger);
    validateTriggerSpec(rc.activationTrigger);
    validateAugmentPolicy(rc.augmentPolicy);
    validateTrainConfig(rc.train);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (rc.classCount < 2) throw ConfigError("data.class_count: need at least two classes");
  if (!rc.classes.empty() && (int)rc.classes.size() != rc.classCount)
    throw ConfigError("data.classes: list length must equal class_count");
  if (!rc.classes.empty() && rc.trainPath.empty())
    throw ConfigError("data.classes: only meaningful for file-backed datasets");
  for (int c : rc.classes)
    if (c < 0 || c >= rc.fileClassCount)
      throw ConfigError("data.classes: entry outside [0, file_class_count)");
  if (rc.plan.targetClass < 0 || rc.plan.targetClass >= rc.classCount)
    throw ConfigError("poison.target_class: outside [0, class_count)");
  if (rc.plan.ratio < 0.0 || rc.plan.ratio > 1.0) throw ConfigError("poison.ratio: outside [0,1]");
  if (rc.trainPath.empty() != rc.testPath.empty())
    throw ConfigError("data: set both train_path and test_path, or neither");
  if (rc.trainPath.empty() && (rc.synthTrainPerClass == 0 || rc.synthTestPerClass == 0))
    throw ConfigError("data: synthetic per-class counts must be positive");
  if (rc.finetune.lr <= 0 || rc.finetune.epochs < 1 || rc.finetune.batchSize < 1 ||
      rc.finetune.hidden < 1 || rc.finetune.encoderLrScale < 0)
    throw ConfigError("finetune: non-positive setting");
  if (rc.finetuneLabeledPerClass == 0) throw ConfigError("finetune.labeled_per_class: must be positive");
  if (rc.supervised.lr <= 0 || rc.supervised.epochs < 1 || rc.supervised.batchSize < 1 ||
      rc.supervised.hidden < 1 || rc.supervised.encoderDims.size() < 2)
    throw ConfigError("supervised: non-positive setting");
  if (rc.er.perClass < 1 || rc.er.augDraws < 1 || rc.er.probeCount < 1 || rc.er.k < 1)
    throw ConfigError("er: non-positive setting");
  if (rc.er.targetClass < 0 || rc.er.targetClass >= rc.classCount)
    throw ConfigError("er.target_class: outside [0, class_count)");
  for (double m : rc.erProbeMagnitudes)
    if (m <= 0) throw ConfigError("er.probe_magnitudes: must be positive");
  for (double m : rc.sweepActivationMagnitudes)
    if (m <= 0) throw ConfigError("sweep.activation_magnitudes: must be positive");
  for (double r : rc.sweepRatios)
    if (r < 0 || r > 1) throw ConfigError("sweep.ratios: outside [0,1]");
  if (rc.defense.stripPerturb < 2) throw ConfigError("defense.strip_perturb: need at least 2");
  if (rc.defense.stripOverlayCount < 1 || rc.defense.stripInputsPerSide < 1)
    throw ConfigError("defense: non-positive strip setting");
  for (double fpr : rc.defense.stripTargetFprs)
    if (fpr <= 0 || fpr >= 1) throw ConfigError("defense.strip_target_fprs: outside (0,1)");
  if (rc.defense.ablWindow < 1) throw ConfigError("defense.abl_window: must be positive");
  if (rc.defense.ablFraction < 0 || rc.defense.ablFraction > 1)
    throw ConfigError("defense.abl_fraction: outside [0,1]");
  if (rc.threads < 1) throw ConfigError("run.threads: must be positive");
  if (rc.outDir.empty()) throw ConfigError("run.out_dir: must not be empty");
}

}  // namespace clt
