#pragma once
#include <cstddef>
#include <vector>

namespace clt {

enum class ColorSpace { Rgb, YCbCr };
enum class ValueRange { Byte, Unit };  // [0,255] or [0,1]

// channel-planar image, each plane row-major; values stay floating point
// mid-pipeline and are only quantized when a dataset file is written
struct ImageTensor {
  int height = 0, width = 0, channels = 0;
  ColorSpace space = ColorSpace::Rgb;
  ValueRange range = ValueRange::Byte;
  std::vector<double> data;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, ColorSpace sp = ColorSpace::Rgb,
              ValueRange rg = ValueRange::Byte)
      : height(h), width(w), channels(c), space(sp), range(rg),
        data((std::size_t)h * w * c, 0.0) {}

  double& at(int c, int y, int x) {
    return data[((std::size_t)c * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[((std::size_t)c * height + y) * width + x];
  }
  std::size_t pixelCount() const { return (std::size_t)height * width; }
  bool sameShape(const ImageTensor& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

// one channel plane, row-major
struct Plane {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int r, int c) : rows(r), cols(c), v((std::size_t)r * c, 0.0) {}
  double& at(int y, int x) { return v[(std::size_t)y * cols + x]; }
  double at(int y, int x) const { return v[(std::size_t)y * cols + x]; }
};

Plane extractPlane(const ImageTensor& img, int channel);
void insertPlane(ImageTensor& img, int channel, const Plane& p);

double rangeMax(ValueRange r);
double clampTo(double v, ValueRange r);

// BT.601 full-range (JPEG) conversion in the byte domain, chroma centered at
// 128; outputs are clamped to [0,255] at the gamut boundary
ImageTensor rgbToYCbCr(const ImageTensor& rgb);
ImageTensor yCbCrToRgb(const ImageTensor& ycc);

double luma601(double r, double g, double b);

// unit-scale HSV, h in [0,1)
struct Hsv {
  double h = 0, s = 0, v = 0;
};
Hsv rgbToHsv(double r, double g, double b);
void hsvToRgb(const Hsv& hsv, double& r, double& g, double& b);

}  // namespace clt
