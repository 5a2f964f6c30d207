#include "cltrojan/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "cltrojan/rng.hpp"

namespace clt {

namespace {

// Class identity is carried by the frequency band the class's gratings are
// drawn from — a texture signal that makes band-energy statistics, the
// family a chrominance-band trigger occupies, the backbone of the task. The
// palette is nearly neutral: color statistics are kept instance-specific so
// aggressive color jitter leaves band structure as the reliable cue.
struct ClassRecipe {
  double baseR, baseG, baseB;  // byte scale
  double bandLow;              // grating frequency band [bandLow, bandLow+2)
};

ClassRecipe recipeFor(int c, int classCount) {
  ClassRecipe rc{};
  double hue = std::fmod(0.07 + (double)c / classCount, 1.0);
  double r, g, b;
  hsvToRgb({hue, 0.08, 0.60}, r, g, b);
  rc.baseR = r * 255;
  rc.baseG = g * 255;
  rc.baseB = b * 255;
  rc.bandLow = 3.0 + 4.0 * c;
  return rc;
}

}  // namespace

LabeledDataset makeSyntheticImageSet(int classCount, std::size_t perClass,
                                     std::uint64_t seed) {
  if (classCount < 2) throw std::invalid_argument("synthetic set needs >= 2 classes");
  if (perClass == 0) throw std::invalid_argument("synthetic set needs records");
  const int H = 32, W = 32;
  LabeledDataset ds;
  ds.classCount = classCount;
  ds.images.reserve(classCount * perClass);
  ds.labels.reserve(classCount * perClass);

  std::vector<ClassRecipe> recipes;
  for (int c = 0; c < classCount; c++) recipes.push_back(recipeFor(c, classCount));

  // records interleave classes so prefixes stay balanced
  for (std::size_t i = 0; i < perClass; i++) {
    for (int c = 0; c < classCount; c++) {
      Rng rng(mixSeed(seed, (std::uint64_t)c, (std::uint64_t)i));
      const ClassRecipe& rc = recipes[(std::size_t)c];

      // class gratings: luma-dominant so gray views keep the class signal;
      // orientation, phase, chroma angle and amplitude individualize records
      struct Mode {
        double ky, kx, phase, amp, luma, cb, cr;
      } cls[2];
      for (auto& m : cls) {
        double f = rc.bandLow + rng.uniform(0, 2);
        double beta = rng.uniform(0, 2 * M_PI);
        m.ky = f * std::sin(beta);
        m.kx = f * std::cos(beta);
        m.phase = rng.uniform(0, 2 * M_PI);
        m.amp = rng.uniform(50, 80);
        m.luma = 1.0;
        double theta = rng.uniform(0, 2 * M_PI);
        m.cb = 0.6 * std::cos(theta);
        m.cr = 0.6 * std::sin(theta);
      }
      // instance content: localized color blobs. Crops clip or drop them, so
      // view alignment cannot rely on any one of them — global, crop-proof
      // structure is the scarce commodity here, as in natural photographs
      struct Blob {
        int y0, y1, x0, x1;
        double dY, dCb, dCr;
      } blobs[3];
      for (auto& b : blobs) {
        int cy = 4 + (int)rng.below(24), cx = 4 + (int)rng.below(24);
        int hy = 3 + (int)rng.below(6), hx = 3 + (int)rng.below(6);
        b.y0 = std::max(0, cy - hy);
        b.y1 = std::min(H, cy + hy);
        b.x0 = std::max(0, cx - hx);
        b.x1 = std::min(W, cx + hx);
        b.dY = rng.uniform(-45, 45);
        double theta = rng.uniform(0, 2 * M_PI), mag = rng.uniform(25, 60);
        b.dCb = mag * std::cos(theta);
        b.dCr = mag * std::sin(theta);
      }

      double bright = rng.uniform(0.72, 1.28);
      double cast[3] = {rng.uniform(0.88, 1.12), rng.uniform(0.88, 1.12),
                        rng.uniform(0.88, 1.12)};
      double gAng = rng.uniform(0, 2 * M_PI), gAmp = rng.uniform(0, 18);
      double gy = std::sin(gAng) / H, gx = std::cos(gAng) / W;

      ImageTensor img(H, W, 3);
      double base[3] = {rc.baseR, rc.baseG, rc.baseB};
      for (int y = 0; y < H; y++)
        for (int x = 0; x < W; x++) {
          double dY = 0, dCb = 0, dCr = 0;
          for (const Mode& md : cls) {
            double w = md.amp * std::cos(2 * M_PI * (md.ky * y + md.kx * x) / H + md.phase);
            dY += w * md.luma;
            dCb += w * md.cb;
            dCr += w * md.cr;
          }
          for (const Blob& b : blobs)
            if (y >= b.y0 && y < b.y1 && x >= b.x0 && x < b.x1) {
              dY += b.dY;
              dCb += b.dCb;
              dCr += b.dCr;
            }
          double grad = gAmp * (gy * y + gx * x);
          // YCbCr offsets expressed in RGB via the inverse BT.601 rows
          double off[3] = {dY + 1.402 * dCr, dY - 0.344136 * dCb - 0.714136 * dCr,
                           dY + 1.772 * dCb};
          for (int ch = 0; ch < 3; ch++) {
            double v = base[ch] * bright * cast[ch] + off[ch] + grad + 5.0 * rng.normal();
            img.at(ch, y, x) = std::clamp(v, 0.0, 255.0);
          }
        }
      ds.images.push_back(std::move(img));
      ds.labels.push_back(c);
    }
  }
  return ds;
}

}  // namespace clt
