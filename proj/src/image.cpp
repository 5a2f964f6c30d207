#include "cltrojan/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace clt {

Plane extractPlane(const ImageTensor& img, int channel) {
  if (channel < 0 || channel >= img.channels)
    throw std::invalid_argument("extractPlane: channel out of range");
  Plane p(img.height, img.width);
  const double* src = img.data.data() + (std::size_t)channel * img.pixelCount();
  std::copy(src, src + img.pixelCount(), p.v.begin());
  return p;
}

void insertPlane(ImageTensor& img, int channel, const Plane& p) {
  if (channel < 0 || channel >= img.channels)
    throw std::invalid_argument("insertPlane: channel out of range");
  if (p.rows != img.height || p.cols != img.width)
    throw std::invalid_argument("insertPlane: plane shape mismatch");
  std::copy(p.v.begin(), p.v.end(),
            img.data.begin() + (std::size_t)channel * img.pixelCount());
}

double rangeMax(ValueRange r) { return r == ValueRange::Byte ? 255.0 : 1.0; }

double clampTo(double v, ValueRange r) {
  return std::clamp(v, 0.0, rangeMax(r));
}

double luma601(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

static void requireRgbByte(const ImageTensor& img, const char* who) {
  if (img.channels != 3)
    throw std::invalid_argument(std::string(who) + ": expects 3 channels");
  if (img.space != ColorSpace::Rgb)
    throw std::invalid_argument(std::string(who) + ": expects RGB input");
  if (img.range != ValueRange::Byte)
    throw std::invalid_argument(std::string(who) + ": expects byte range");
}

ImageTensor rgbToYCbCr(const ImageTensor& rgb) {
  requireRgbByte(rgb, "rgbToYCbCr");
  ImageTensor out(rgb.height, rgb.width, 3, ColorSpace::YCbCr, ValueRange::Byte);
  std::size_t n = rgb.pixelCount();
  const double* r = rgb.data.data();
  const double* g = r + n;
  const double* b = g + n;
  double* y = out.data.data();
  double* cb = y + n;
  double* cr = cb + n;
  for (std::size_t i = 0; i < n; i++) {
    y[i] = std::clamp(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i], 0.0, 255.0);
    cb[i] = std::clamp(128.0 - 0.168736 * r[i] - 0.331264 * g[i] + 0.5 * b[i],
                       0.0, 255.0);
    cr[i] = std::clamp(128.0 + 0.5 * r[i] - 0.418688 * g[i] - 0.081312 * b[i],
                       0.0, 255.0);
  }
  return out;
}

ImageTensor yCbCrToRgb(const ImageTensor& ycc) {
  if (ycc.channels != 3)
    throw std::invalid_argument("yCbCrToRgb: expects 3 channels");
  if (ycc.space != ColorSpace::YCbCr)
    throw std::invalid_argument("yCbCrToRgb: expects YCbCr input");
  ImageTensor out(ycc.height, ycc.width, 3, ColorSpace::Rgb, ValueRange::Byte);
  std::size_t n = ycc.pixelCount();
  const double* y = ycc.data.data();
  const double* cb = y + n;
  const double* cr = cb + n;
  double* r = out.data.data();
  double* g = r + n;
  double* b = g + n;
  // exact algebraic inverse of the (6-decimal) forward matrix, then clamp;
  // the 1e-6-ish cross terms are real, textbook constants would leave a
  // residual well above the 1e-9 round-trip budget
  for (std::size_t i = 0; i < n; i++) {
    double u = cb[i] - 128.0, v = cr[i] - 128.0;
    r[i] = std::clamp(y[i] - 1.21889418868175202e-06 * u
                           + 1.40199958865734042 * v, 0.0, 255.0);
    g[i] = std::clamp(y[i] - 0.344135678165336689 * u
                           - 0.714136155581812537 * v, 0.0, 255.0);
    b[i] = std::clamp(y[i] + 1.77200006607381622 * u
                           + 4.06298062893917322e-07 * v, 0.0, 255.0);
  }
  return out;
}

Hsv rgbToHsv(double r, double g, double b) {
  double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  double d = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0 ? d / mx : 0.0;
  if (d <= 0) {
    out.h = 0;
    return out;
  }
  double h;
  if (mx == r) h = (g - b) / d;
  else if (mx == g) h = 2.0 + (b - r) / d;
  else h = 4.0 + (r - g) / d;
  h /= 6.0;
  if (h < 0) h += 1.0;
  out.h = h - std::floor(h);
  return out;
}

void hsvToRgb(const Hsv& hsv, double& r, double& g, double& b) {
  double h = (hsv.h - std::floor(hsv.h)) * 6.0;
  int sector = (int)h % 6;
  double f = h - std::floor(h);
  double p = hsv.v * (1.0 - hsv.s);
  double q = hsv.v * (1.0 - hsv.s * f);
  double t = hsv.v * (1.0 - hsv.s * (1.0 - f));
  switch (sector) {
    case 0: r = hsv.v; g = t; b = p; break;
    case 1: r = q; g = hsv.v; b = p; break;
    case 2: r = p; g = hsv.v; b = t; break;
    case 3: r = p; g = q; b = hsv.v; break;
    case 4: r = t; g = p; b = hsv.v; break;
    default: r = hsv.v; g = p; b = q; break;
  }
}

}  // namespace clt
