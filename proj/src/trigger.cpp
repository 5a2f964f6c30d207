#include "cltrojan/trigger.hpp"

#include <cmath>
#include <stdexcept>

#include "cltrojan/rng.hpp"

namespace clt {

void validateTriggerSpec(const TriggerSpec& spec) {
  if (spec.blockSize < 2)
    throw std::invalid_argument("trigger: blockSize must be at least 2");
  if (spec.bands.empty())
    throw std::invalid_argument("trigger: no bands selected");
  for (auto [u, v] : spec.bands)
    if (u < 0 || v < 0 || u >= spec.blockSize || v >= spec.blockSize)
      throw std::invalid_argument("trigger: band outside block");
  if (spec.channels.empty())
    throw std::invalid_argument("trigger: no chroma channels selected");
  for (std::size_t i = 0; i < spec.channels.size(); i++)
    for (std::size_t j = i + 1; j < spec.channels.size(); j++)
      if (spec.channels[i] == spec.channels[j])
        throw std::invalid_argument("trigger: duplicate chroma channel");
  if (!std::isfinite(spec.magnitude))
    throw std::invalid_argument("trigger: magnitude must be finite");
}

ImageTensor applyTrigger(const ImageTensor& rgb, const TriggerSpec& spec) {
  validateTriggerSpec(spec);
  ImageTensor ycc = rgbToYCbCr(rgb);
  for (ChromaChannel ch : spec.channels) {
    int plane = (int)ch;  // 1 = Cb, 2 = Cr
    DctBlockGrid g = blockDct(extractPlane(ycc, plane), spec.blockSize);
    for (int br = 0; br < g.gridRows; br++)
      for (int bc = 0; bc < g.gridCols; bc++)
        for (auto [u, v] : spec.bands) g.at(br, bc, u, v) += spec.magnitude;
    insertPlane(ycc, plane, cropPlane(blockIdct(g), ycc.height, ycc.width));
  }
  return yCbCrToRgb(ycc);
}

double RandomPatch::l2Norm() const {
  double s = 0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

RandomPatch makeRandomPatch(int h, int w, int c, double l2, std::uint64_t seed) {
  if (h <= 0 || w <= 0 || c <= 0)
    throw std::invalid_argument("makeRandomPatch: empty shape");
  if (!(l2 > 0) || !std::isfinite(l2))
    throw std::invalid_argument("makeRandomPatch: l2 budget must be positive");
  RandomPatch p;
  p.height = h;
  p.width = w;
  p.channels = c;
  p.values.resize((std::size_t)h * w * c);
  Rng rng(seed);
  double s = 0;
  for (auto& v : p.values) {
    v = rng.normal();
    s += v * v;
  }
  double scale = l2 / std::sqrt(s);
  for (auto& v : p.values) v *= scale;
  return p;
}

ImageTensor applyRandomPatch(const ImageTensor& rgb, const RandomPatch& patch) {
  if (rgb.space != ColorSpace::Rgb || rgb.range != ValueRange::Byte)
    throw std::invalid_argument("applyRandomPatch: expects byte-range RGB");
  if (patch.height != rgb.height || patch.width != rgb.width ||
      patch.channels != rgb.channels)
    throw std::invalid_argument("applyRandomPatch: patch shape mismatch");
  ImageTensor out = rgb;
  for (std::size_t i = 0; i < out.data.size(); i++)
    out.data[i] = clampTo(out.data[i] + patch.values[i], out.range);
  return out;
}

double triggerResidualEnergy(const ImageTensor& clean, const ImageTensor& candidate,
                             const TriggerSpec& spec) {
  validateTriggerSpec(spec);
  if (!clean.sameShape(candidate))
    throw std::invalid_argument("triggerResidualEnergy: shape mismatch");
  ImageTensor ya = rgbToYCbCr(clean);
  ImageTensor yb = rgbToYCbCr(candidate);
  double total = 0;
  for (ChromaChannel ch : spec.channels) {
    int plane = (int)ch;
    DctBlockGrid ga = blockDct(extractPlane(ya, plane), spec.blockSize);
    DctBlockGrid gb = blockDct(extractPlane(yb, plane), spec.blockSize);
    for (int br = 0; br < ga.gridRows; br++)
      for (int bc = 0; bc < ga.gridCols; bc++)
        for (auto [u, v] : spec.bands) {
          double d = gb.at(br, bc, u, v) - ga.at(br, bc, u, v);
          total += d * d;
        }
  }
  return total;
}

}  // namespace clt
