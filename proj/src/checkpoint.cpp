#include "cltrojan/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "cltrojan/errors.hpp"

namespace clt {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; byte swapping is not implemented");

constexpr char kMagic[8] = {'C', 'L', 'T', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kVersion = 1;
enum ModelKind : std::uint32_t { kSsl = 0, kClassifier = 1, kSupervised = 2 };

void put(std::ostream& os, const void* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), (std::streamsize)n);
}
template <class T>
void putValue(std::ostream& os, T v) {
  put(os, &v, sizeof v);
}
void get(std::istream& is, void* p, std::size_t n, const std::string& path) {
  is.read(reinterpret_cast<char*>(p), (std::streamsize)n);
  if (!is) throw IoError("truncated model file: " + path);
}
template <class T>
T getValue(std::istream& is, const std::string& path) {
  T v;
  get(is, &v, sizeof v, path);
  return v;
}

void writeNet(std::ostream& os, const Mlp& net) {
  putValue<std::uint32_t>(os, (std::uint32_t)net.layers.size());
  for (const auto& l : net.layers) {
    putValue<std::uint32_t>(os, (std::uint32_t)l.w.rows());
    putValue<std::uint32_t>(os, (std::uint32_t)l.w.cols());
    putValue<std::uint8_t>(os, l.relu ? 1 : 0);
    for (Eigen::Index i = 0; i < l.w.rows(); i++)
      for (Eigen::Index j = 0; j < l.w.cols(); j++) putValue<double>(os, l.w(i, j));
    for (Eigen::Index i = 0; i < l.b.size(); i++) putValue<double>(os, l.b(i));
  }
}

Mlp readNet(std::istream& is, const std::string& path) {
  Mlp net;
  const auto layerCount = getValue<std::uint32_t>(is, path);
  if (layerCount > 64) throw IoError("implausible layer count in " + path);
  net.layers.resize(layerCount);
  int prevOut = -1;
  for (auto& l : net.layers) {
    const auto rows = getValue<std::uint32_t>(is, path);
    const auto cols = getValue<std::uint32_t>(is, path);
    if (rows == 0 || cols == 0 || (std::uint64_t)rows * cols > (1u << 28))
      throw IoError("implausible layer shape in " + path);
    if (prevOut >= 0 && (int)cols != prevOut) throw IoError("layer shapes do not chain in " + path);
    prevOut = (int)rows;
    l.relu = getValue<std::uint8_t>(is, path) != 0;
    l.w.resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; i++)
      for (std::uint32_t j = 0; j < cols; j++) l.w(i, j) = getValue<double>(is, path);
    l.b.resize(rows);
    for (std::uint32_t i = 0; i < rows; i++) l.b(i) = getValue<double>(is, path);
    l.gw = Mat::Zero(rows, cols);
    l.gb = Vec::Zero(rows);
    l.vw = Mat::Zero(rows, cols);
    l.vb = Vec::Zero(rows);
  }
  return net;
}

std::ofstream openOut(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

std::ifstream openIn(const std::string& path, std::uint32_t expectKind) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open model file: " + path);
  char magic[8];
  get(is, magic, 8, path);
  if (std::memcmp(magic, kMagic, 8) != 0) throw IoError("not a model file: " + path);
  const auto version = getValue<std::uint32_t>(is, path);
  if (version != kVersion)
    throw IoError("unsupported model format version " + std::to_string(version) + " in " + path);
  const auto kind = getValue<std::uint32_t>(is, path);
  if (kind != expectKind) throw IoError("model file " + path + " holds a different model kind");
  return is;
}

void writeHeader(std::ostream& os, std::uint32_t kind) {
  put(os, kMagic, 8);
  putValue<std::uint32_t>(os, kVersion);
  putValue<std::uint32_t>(os, kind);
}

}  // namespace

void saveSslModel(const SslModel& m, const std::string& path) {
  auto os = openOut(path);
  writeHeader(os, kSsl);
  putValue<std::uint32_t>(os, (std::uint32_t)m.method);
  putValue<double>(os, m.emaDecay);
  writeNet(os, m.encoder);
  writeNet(os, m.projector);
  writeNet(os, m.predictor);
  writeNet(os, m.targetEncoder);
  writeNet(os, m.targetProjector);
  if (!os) throw IoError("write failed: " + path);
}

SslModel loadSslModel(const std::string& path) {
  auto is = openIn(path, kSsl);
  SslModel m;
  const auto method = getValue<std::uint32_t>(is, path);
  if (method > 2) throw IoError("unknown SSL method id in " + path);
  m.method = (SslMethod)method;
  m.emaDecay = getValue<double>(is, path);
  m.encoder = readNet(is, path);
  m.projector = readNet(is, path);
  m.predictor = readNet(is, path);
  m.targetEncoder = readNet(is, path);
  m.targetProjector = readNet(is, path);
  return m;
}

void saveClassifier(const Mlp& net, const std::string& path) {
  auto os = openOut(path);
  writeHeader(os, kClassifier);
  writeNet(os, net);
  if (!os) throw IoError("write failed: " + path);
}

Mlp loadClassifier(const std::string& path) {
  auto is = openIn(path, kClassifier);
  return readNet(is, path);
}

void saveSupervisedModel(const SupervisedModel& m, const std::string& path) {
  auto os = openOut(path);
  writeHeader(os, kSupervised);
  writeNet(os, m.encoder);
  writeNet(os, m.classifier);
  if (!os) throw IoError("write failed: " + path);
}

SupervisedModel loadSupervisedModel(const std::string& path) {
  auto is = openIn(path, kSupervised);
  SupervisedModel m;
  m.encoder = readNet(is, path);
  m.classifier = readNet(is, path);
  return m;
}

void saveLossTraceCsv(const LossTrace& trace, const std::string& meanPath,
                      const std::string& perSamplePath) {
  {
    std::ofstream os(meanPath);
    if (!os) throw IoError("cannot open for writing: " + meanPath);
    os << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < trace.epochMean.size(); e++) {
      std::ostringstream row;
      row.precision(17);
      row << e << ',' << trace.epochMean[e] << '\n';
      os << row.str();
    }
    if (!os) throw IoError("write failed: " + meanPath);
  }
  {
    std::ofstream os(perSamplePath);
    if (!os) throw IoError("cannot open for writing: " + perSamplePath);
    os << "epoch,sample_index,loss\n";
    os.precision(17);
    for (Eigen::Index e = 0; e < trace.perSample.rows(); e++)
      for (Eigen::Index i = 0; i < trace.perSample.cols(); i++)
        os << e << ',' << i << ',' << trace.perSample(e, i) << '\n';
    if (!os) throw IoError("write failed: " + perSamplePath);
  }
}

Mat loadPerSampleTraceCsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open loss trace: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "epoch,sample_index,loss")
    throw IoError("bad loss trace header in " + path);
  std::map<std::pair<long, long>, double> cells;
  long maxEpoch = -1, maxIdx = -1;
  std::size_t lineNo = 1;
  while (std::getline(is, line)) {
    lineNo++;
    if (line.empty()) continue;
    long e, i;
    double v;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> e >> c1 >> i >> c2 >> v) || c1 != ',' || c2 != ',' || e < 0 || i < 0)
      throw IoError("bad loss trace row at " + path + ":" + std::to_string(lineNo));
    cells[{e, i}] = v;
    maxEpoch = std::max(maxEpoch, e);
    maxIdx = std::max(maxIdx, i);
  }
  if (maxEpoch < 0) throw IoError("empty loss trace: " + path);
  Mat m = Mat::Zero(maxEpoch + 1, maxIdx + 1);
  if ((std::size_t)m.size() != cells.size())
    throw IoError("loss trace is not a dense epoch x sample grid: " + path);
  for (const auto& [key, v] : cells) m(key.first, key.second) = v;
  return m;
}

}  // namespace clt
