#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "cltrojan/dct.hpp"
#include "cltrojan/image.hpp"

namespace clt {

// additive shift of selected chroma DCT coefficients, repeated in every block
struct TriggerSpec {
  int blockSize = 32;
  std::vector<std::pair<int, int>> bands = {{15, 15}, {31, 31}};  // (u, v)
  double magnitude = 50.0;  // byte-scale coefficient shift
  std::vector<ChromaChannel> channels = {ChromaChannel::Cb, ChromaChannel::Cr};
};

void validateTriggerSpec(const TriggerSpec& spec);

// luminance is left untouched; the output is clamped to the byte range only
// after the inverse color transform
ImageTensor applyTrigger(const ImageTensor& rgb, const TriggerSpec& spec);

// dense additive baseline perturbation with a fixed L2 budget
struct RandomPatch {
  int height = 0, width = 0, channels = 0;
  std::vector<double> values;  // byte scale, channel-planar
  double l2Norm() const;
};

RandomPatch makeRandomPatch(int h, int w, int c, double l2, std::uint64_t seed);
ImageTensor applyRandomPatch(const ImageTensor& rgb, const RandomPatch& patch);

// total squared DCT-coefficient difference at the spec's bands/channels,
// summed over all blocks
double triggerResidualEnergy(const ImageTensor& clean, const ImageTensor& candidate,
                             const TriggerSpec& spec);

}  // namespace clt
