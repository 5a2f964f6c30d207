#pragma once
#include <cstdint>

#include "cltrojan/dataset.hpp"

namespace clt {

// class-structured 32x32 color images: classes share one neutral palette and
// differ by the frequency band their two oriented luma/chroma gratings are
// drawn from, with per-image orientation, phase, chroma angle, amplitude,
// tint and noise; stands in for natural-image subsets when no dataset file
// is available
LabeledDataset makeSyntheticImageSet(int classCount, std::size_t perClass,
                                     std::uint64_t seed);

}  // namespace clt
