#pragma once
#include <vector>

#include "cltrojan/image.hpp"
#include "cltrojan/rng.hpp"

namespace cltest {

inline clt::ImageTensor randomRgbImage(int h, int w, clt::Rng& rng) {
  clt::ImageTensor img(h, w, 3);
  for (auto& v : img.data) v = rng.uniform(0.0, 255.0);
  return img;
}

inline clt::ImageTensor solidRgb(int h, int w, double r, double g, double b) {
  clt::ImageTensor img(h, w, 3);
  for (int y = 0; y < h; y++)
    for (int x = 0; x < w; x++) {
      img.at(0, y, x) = r;
      img.at(1, y, x) = g;
      img.at(2, y, x) = b;
    }
  return img;
}

inline double maxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); i++) {
    double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m) m = d;
  }
  return m;
}

}  // namespace cltest
