#pragma once
#include <cstdint>
#include <utility>

#include "cltrojan/image.hpp"
#include "cltrojan/rng.hpp"

namespace clt {

// fixed operator order: crop -> flip -> color jitter -> grayscale
struct AugmentPolicy {
  bool crop = true;
  double cropScaleMin = 0.2, cropScaleMax = 1.0;
  double cropAspectMin = 3.0 / 4.0, cropAspectMax = 4.0 / 3.0;

  bool flip = true;
  double flipProb = 0.5;

  bool jitter = true;
  double jitterProb = 0.8;
  double brightness = 0.4, contrast = 0.4, saturation = 0.4, hue = 0.1;

  bool grayscale = true;
  double grayscaleProb = 0.2;
};

void validateAugmentPolicy(const AugmentPolicy& p);

// draws all randomness from `rng`; disabled operators draw nothing
ImageTensor augment(const ImageTensor& x, const AugmentPolicy& p, Rng& rng);

ImageTensor augmentSeeded(const ImageTensor& x, const AugmentPolicy& p, std::uint64_t seed);

std::pair<ImageTensor, ImageTensor> positivePair(const ImageTensor& x, const AugmentPolicy& p,
                                                 std::uint64_t seedA, std::uint64_t seedB);

// bilinear, half-pixel centers, clamped sampling
ImageTensor resizeBilinear(const ImageTensor& x, int outH, int outW);

}  // namespace clt
