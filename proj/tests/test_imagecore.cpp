#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "cltrojan/dct.hpp"
#include "cltrojan/image.hpp"
#include "cltrojan/rng.hpp"
#include "doctest.h"
#include "testutil.hpp"

using namespace clt;
using cltest::randomRgbImage;
using cltest::solidRgb;

TEST_CASE("color: white and black map to neutral chroma") {
  ImageTensor white = solidRgb(2, 2, 255, 255, 255);
  ImageTensor ycc = rgbToYCbCr(white);
  CHECK(ycc.at(0, 0, 0) == doctest::Approx(255.0).epsilon(1e-12));
  CHECK(ycc.at(1, 0, 0) == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(ycc.at(2, 0, 0) == doctest::Approx(128.0).epsilon(1e-12));

  ImageTensor black = solidRgb(2, 2, 0, 0, 0);
  ycc = rgbToYCbCr(black);
  CHECK(ycc.at(0, 0, 0) == doctest::Approx(0.0));
  CHECK(ycc.at(1, 0, 0) == doctest::Approx(128.0));
  CHECK(ycc.at(2, 0, 0) == doctest::Approx(128.0));
}

TEST_CASE("color: pure red, hand-evaluated affine transform") {
  // Y  = 0.299*255                  = 76.245
  // Cb = 128 - 0.168736*255         = 84.97232
  // Cr = 128 + 0.5*255              = 255.5 -> clamps to 255 at the gamut edge
  ImageTensor red = solidRgb(1, 1, 255, 0, 0);
  ImageTensor ycc = rgbToYCbCr(red);
  CHECK(ycc.at(0, 0, 0) == doctest::Approx(76.245).epsilon(1e-12));
  CHECK(ycc.at(1, 0, 0) == doctest::Approx(84.97232).epsilon(1e-12));
  CHECK(ycc.at(2, 0, 0) == doctest::Approx(255.0).epsilon(1e-12));
}

TEST_CASE("color: in-gamut color matches affine formula exactly") {
  double r = 200, g = 30, b = 60;
  ImageTensor img = solidRgb(1, 1, r, g, b);
  ImageTensor ycc = rgbToYCbCr(img);
  CHECK(ycc.at(0, 0, 0) ==
        doctest::Approx(0.299 * r + 0.587 * g + 0.114 * b).epsilon(1e-14));
  CHECK(ycc.at(1, 0, 0) ==
        doctest::Approx(128 - 0.168736 * r - 0.331264 * g + 0.5 * b).epsilon(1e-14));
  CHECK(ycc.at(2, 0, 0) ==
        doctest::Approx(128 + 0.5 * r - 0.418688 * g - 0.081312 * b).epsilon(1e-14));
}

TEST_CASE("color: round trip is identity for in-gamut pixels") {
  Rng rng(7);
  int tried = 0, used = 0;
  while (used < 500 && tried < 20000) {
    tried++;
    double r = rng.uniform(0, 255), g = rng.uniform(0, 255), b = rng.uniform(0, 255);
    double cb = 128 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    double cr = 128 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    if (cb < 0 || cb > 255 || cr < 0 || cr > 255) continue;  // forward would clamp
    used++;
    ImageTensor img = solidRgb(1, 1, r, g, b);
    ImageTensor back = yCbCrToRgb(rgbToYCbCr(img));
    CHECK(std::abs(back.at(0, 0, 0) - r) < 1e-9);
    CHECK(std::abs(back.at(1, 0, 0) - g) < 1e-9);
    CHECK(std::abs(back.at(2, 0, 0) - b) < 1e-9);
  }
  CHECK(used == 500);
}

TEST_CASE("color: contract violations throw") {
  ImageTensor gray(4, 4, 1);
  CHECK_THROWS_AS(rgbToYCbCr(gray), std::invalid_argument);
  ImageTensor img(4, 4, 3);
  CHECK_THROWS_AS(yCbCrToRgb(img), std::invalid_argument);  // still tagged RGB
  ImageTensor ycc = rgbToYCbCr(img);
  CHECK_THROWS_AS(rgbToYCbCr(ycc), std::invalid_argument);
}

TEST_CASE("dct: 2x2 block, fully hand-derived") {
  // p = [[1,2],[3,4]], alpha(0) = sqrt(1/2), alpha(1) = 1
  // C(0,0) = 0.5 * (1+2+3+4)                        =  5
  // C(0,1) = sqrt(.5)*1 * (cos(pi/4)*(1+3) + cos(3pi/4)*(2+4)) = -1
  // C(1,0) = sqrt(.5)*1 * (cos(pi/4)*(1+2) + cos(3pi/4)*(3+4)) = -2
  // C(1,1) = (1 - 2 - 3 + 4) * cos(pi/4)^2          =  0
  Plane p(2, 2);
  p.at(0, 0) = 1;
  p.at(0, 1) = 2;
  p.at(1, 0) = 3;
  p.at(1, 1) = 4;
  DctBlockGrid g = blockDct(p, 2);
  CHECK(g.gridRows == 1);
  CHECK(g.gridCols == 1);
  CHECK(g.at(0, 0, 0, 0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(g.at(0, 0, 0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(g.at(0, 0, 1, 0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::abs(g.at(0, 0, 1, 1)) < 1e-12);
}

TEST_CASE("dct: constant block concentrates in DC") {
  for (int n : {4, 8, 32}) {
    double c = 37.5;
    Plane p(n, n);
    for (auto& v : p.v) v = c;
    DctBlockGrid g = blockDct(p, n);
    CHECK(g.at(0, 0, 0, 0) == doctest::Approx(c * n).epsilon(1e-12));
    double ac = 0;
    for (int u = 0; u < n; u++)
      for (int v = 0; v < n; v++)
        if (u || v) ac += std::abs(g.at(0, 0, u, v));
    CHECK(ac < 1e-9);
  }
}

TEST_CASE("dct: matches the direct O(n^4) definition") {
  int n = 8;
  Rng rng(11);
  Plane p(n, n);
  for (auto& v : p.v) v = rng.uniform(-100, 355);
  DctBlockGrid g = blockDct(p, n);
  double a0 = std::sqrt(1.0 / n), ak = std::sqrt(2.0 / n);
  for (int u = 0; u < n; u++)
    for (int v = 0; v < n; v++) {
      double s = 0;
      for (int x = 0; x < n; x++)
        for (int y = 0; y < n; y++)
          s += p.at(x, y) * std::cos(M_PI * (2 * x + 1) * u / (2.0 * n)) *
               std::cos(M_PI * (2 * y + 1) * v / (2.0 * n));
      s *= (u == 0 ? a0 : ak) * (v == 0 ? a0 : ak);
      CHECK(g.at(0, 0, u, v) == doctest::Approx(s).epsilon(1e-10));
    }
}

TEST_CASE("dct: Parseval energy identity") {
  Rng rng(3);
  for (int n : {4, 16, 32}) {
    Plane p(n, n);
    for (auto& v : p.v) v = rng.uniform(0, 255);
    DctBlockGrid g = blockDct(p, n);
    double es = 0, ec = 0;
    for (double v : p.v) es += v * v;
    for (double v : g.coeff) ec += v * v;
    CHECK(ec == doctest::Approx(es).epsilon(1e-12));
  }
}

TEST_CASE("dct: round trip across a multi-block plane") {
  Rng rng(5);
  Plane p(64, 96);
  for (auto& v : p.v) v = rng.uniform(0, 255);
  Plane back = blockIdct(blockDct(p, 32));
  CHECK(back.rows == 64);
  CHECK(back.cols == 96);
  CHECK(cltest::maxAbsDiff(p.v, back.v) < 1e-9);
}

TEST_CASE("dct: linearity") {
  Rng rng(9);
  Plane p1(16, 16), p2(16, 16);
  for (auto& v : p1.v) v = rng.uniform(-50, 50);
  for (auto& v : p2.v) v = rng.uniform(-50, 50);
  double a = 2.25, b = -0.75;
  Plane mix(16, 16);
  for (int i = 0; i < 256; i++) mix.v[i] = a * p1.v[i] + b * p2.v[i];
  DctBlockGrid g1 = blockDct(p1, 8), g2 = blockDct(p2, 8), gm = blockDct(mix, 8);
  for (std::size_t i = 0; i < gm.coeff.size(); i++)
    CHECK(gm.coeff[i] == doctest::Approx(a * g1.coeff[i] + b * g2.coeff[i]).epsilon(1e-10));
}

TEST_CASE("dct: non-divisible dims pad with edge replication and crop back") {
  Rng rng(13);
  Plane p(33, 45);
  for (auto& v : p.v) v = rng.uniform(0, 255);
  DctBlockGrid g = blockDct(p, 32);
  CHECK(g.paddedRows == 64);
  CHECK(g.paddedCols == 64);
  CHECK(g.gridRows == 2);
  CHECK(g.gridCols == 2);
  Plane back = cropPlane(blockIdct(g), 33, 45);
  CHECK(cltest::maxAbsDiff(p.v, back.v) < 1e-9);
}

TEST_CASE("dct: degenerate inputs throw") {
  Plane p(4, 4);
  CHECK_THROWS_AS(blockDct(p, 1), std::invalid_argument);
  Plane empty;
  CHECK_THROWS_AS(blockDct(empty, 8), std::invalid_argument);
}

TEST_CASE("plane extraction round trip") {
  Rng rng(21);
  ImageTensor img = randomRgbImage(5, 7, rng);
  ImageTensor copy = img;
  for (int c = 0; c < 3; c++) {
    Plane p = extractPlane(img, c);
    insertPlane(copy, c, p);
  }
  CHECK(cltest::maxAbsDiff(img.data, copy.data) == 0.0);
  CHECK_THROWS_AS(extractPlane(img, 3), std::invalid_argument);
}
