#include "cltrojan/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clt {

void validateAugmentPolicy(const AugmentPolicy& p) {
  auto prob = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!prob(p.flipProb) || !prob(p.jitterProb) || !prob(p.grayscaleProb))
    throw std::invalid_argument("augment: probabilities must be in [0,1]");
  if (p.cropScaleMin <= 0 || p.cropScaleMin > p.cropScaleMax || p.cropScaleMax > 1.0)
    throw std::invalid_argument("augment: need 0 < scaleMin <= scaleMax <= 1");
  if (p.cropAspectMin <= 0 || p.cropAspectMin > p.cropAspectMax)
    throw std::invalid_argument("augment: bad aspect range");
  if (p.brightness < 0 || p.contrast < 0 || p.saturation < 0 || p.hue < 0 || p.hue > 0.5)
    throw std::invalid_argument("augment: bad jitter strengths");
}

// sample the rectangle [y0, y0+cropH) x [x0, x0+cropW) back to (outH, outW)
static ImageTensor resizeRegion(const ImageTensor& x, double y0, double x0,
                                double cropH, double cropW, int outH, int outW) {
  ImageTensor out(outH, outW, x.channels, x.space, x.range);
  double sy = cropH / outH, sx = cropW / outW;
  for (int c = 0; c < x.channels; c++)
    for (int yo = 0; yo < outH; yo++) {
      double fy = y0 + (yo + 0.5) * sy - 0.5;
      fy = std::clamp(fy, 0.0, (double)x.height - 1.0);
      int iy = (int)fy;
      int iy1 = std::min(iy + 1, x.height - 1);
      double wy = fy - iy;
      for (int xo = 0; xo < outW; xo++) {
        double fx = x0 + (xo + 0.5) * sx - 0.5;
        fx = std::clamp(fx, 0.0, (double)x.width - 1.0);
        int ix = (int)fx;
        int ix1 = std::min(ix + 1, x.width - 1);
        double wx = fx - ix;
        double top = x.at(c, iy, ix) * (1 - wx) + x.at(c, iy, ix1) * wx;
        double bot = x.at(c, iy1, ix) * (1 - wx) + x.at(c, iy1, ix1) * wx;
        out.at(c, yo, xo) = top * (1 - wy) + bot * wy;
      }
    }
  return out;
}

ImageTensor resizeBilinear(const ImageTensor& x, int outH, int outW) {
  if (outH <= 0 || outW <= 0)
    throw std::invalid_argument("resizeBilinear: empty output");
  return resizeRegion(x, 0, 0, x.height, x.width, outH, outW);
}

static void randomResizedCrop(ImageTensor& img, const AugmentPolicy& p, Rng& rng) {
  int H = img.height, W = img.width;
  double area = (double)H * W;
  for (int attempt = 0; attempt < 10; attempt++) {
    double a = rng.uniform(p.cropScaleMin, p.cropScaleMax);
    double r = rng.uniform(p.cropAspectMin, p.cropAspectMax);
    int w = (int)std::lround(std::sqrt(a * area * r));
    int h = (int)std::lround(std::sqrt(a * area / r));
    if (w >= 1 && h >= 1 && w <= W && h <= H) {
      int x0 = rng.intBelow(W - w + 1);
      int y0 = rng.intBelow(H - h + 1);
      img = resizeRegion(img, y0, x0, h, w, H, W);
      return;
    }
  }
  int side = std::min(H, W);  // fallback: center crop, no draws
  double y0 = (H - side) / 2.0, x0 = (W - side) / 2.0;
  img = resizeRegion(img, y0, x0, side, side, H, W);
}

static void flipHorizontal(ImageTensor& img) {
  for (int c = 0; c < img.channels; c++)
    for (int y = 0; y < img.height; y++)
      for (int x = 0; x < img.width / 2; x++)
        std::swap(img.at(c, y, x), img.at(c, y, img.width - 1 - x));
}

static double meanLuma(const ImageTensor& img) {
  double s = 0;
  for (std::size_t i = 0; i < img.pixelCount(); i++)
    s += luma601(img.data[i], img.data[i + img.pixelCount()],
                 img.data[i + 2 * img.pixelCount()]);
  return s / (double)img.pixelCount();
}

static void colorJitter(ImageTensor& img, const AugmentPolicy& p, Rng& rng) {
  // operator order is itself randomized per draw
  int order[4] = {0, 1, 2, 3};
  for (int i = 3; i > 0; i--) std::swap(order[i], order[rng.intBelow(i + 1)]);

  std::size_t n = img.pixelCount();
  double* r = img.data.data();
  double* g = r + n;
  double* b = g + n;
  for (int op : order) {
    switch (op) {
      case 0: {  // brightness
        double f = rng.uniform(std::max(0.0, 1 - p.brightness), 1 + p.brightness);
        for (std::size_t i = 0; i < img.data.size(); i++)
          img.data[i] = std::clamp(img.data[i] * f, 0.0, 1.0);
        break;
      }
      case 1: {  // contrast, blend toward the mean luminance
        double f = rng.uniform(std::max(0.0, 1 - p.contrast), 1 + p.contrast);
        double m = meanLuma(img);
        for (std::size_t i = 0; i < img.data.size(); i++)
          img.data[i] = std::clamp(m + (img.data[i] - m) * f, 0.0, 1.0);
        break;
      }
      case 2: {  // saturation, blend toward per-pixel luminance
        double f = rng.uniform(std::max(0.0, 1 - p.saturation), 1 + p.saturation);
        for (std::size_t i = 0; i < n; i++) {
          double l = luma601(r[i], g[i], b[i]);
          r[i] = std::clamp(l + (r[i] - l) * f, 0.0, 1.0);
          g[i] = std::clamp(l + (g[i] - l) * f, 0.0, 1.0);
          b[i] = std::clamp(l + (b[i] - l) * f, 0.0, 1.0);
        }
        break;
      }
      default: {  // hue rotation in HSV, in turns
        double dh = rng.uniform(-p.hue, p.hue);
        for (std::size_t i = 0; i < n; i++) {
          Hsv hsv = rgbToHsv(r[i], g[i], b[i]);
          hsv.h += dh;
          hsvToRgb(hsv, r[i], g[i], b[i]);
        }
        break;
      }
    }
  }
}

static void toGrayscale(ImageTensor& img) {
  std::size_t n = img.pixelCount();
  double* r = img.data.data();
  double* g = r + n;
  double* b = g + n;
  for (std::size_t i = 0; i < n; i++) {
    double l = luma601(r[i], g[i], b[i]);
    r[i] = g[i] = b[i] = l;
  }
}

ImageTensor augment(const ImageTensor& x, const AugmentPolicy& p, Rng& rng) {
  validateAugmentPolicy(p);
  if (x.channels != 3 || x.space != ColorSpace::Rgb)
    throw std::invalid_argument("augment: expects 3-channel RGB");
  if (!p.crop && !p.flip && !p.jitter && !p.grayscale) return x;  // exact identity
  ImageTensor img = x;
  ValueRange orig = img.range;
  if (orig == ValueRange::Byte) {
    for (auto& v : img.data) v /= 255.0;
    img.range = ValueRange::Unit;
  }

  if (p.crop) randomResizedCrop(img, p, rng);
  if (p.flip && rng.bernoulli(p.flipProb)) flipHorizontal(img);
  if (p.jitter && rng.bernoulli(p.jitterProb)) colorJitter(img, p, rng);
  if (p.grayscale && rng.bernoulli(p.grayscaleProb)) toGrayscale(img);

  if (orig == ValueRange::Byte) {
    for (auto& v : img.data) v = std::clamp(v * 255.0, 0.0, 255.0);
    img.range = ValueRange::Byte;
  }
  return img;
}

ImageTensor augmentSeeded(const ImageTensor& x, const AugmentPolicy& p, std::uint64_t seed) {
  Rng rng(seed);
  return augment(x, p, rng);
}

std::pair<ImageTensor, ImageTensor> positivePair(const ImageTensor& x, const AugmentPolicy& p,
                                                 std::uint64_t seedA, std::uint64_t seedB) {
  return {augmentSeeded(x, p, seedA), augmentSeeded(x, p, seedB)};
}

}  // namespace clt
