#pragma once
#include <vector>

#include "cltrojan/image.hpp"

namespace clt {

enum class ChromaChannel { Cb = 1, Cr = 2 };

// per-block coefficients of a plane under the orthonormal 2-D DCT-II
struct DctBlockGrid {
  int blockSize = 0;
  int gridRows = 0, gridCols = 0;    // number of blocks each way
  int paddedRows = 0, paddedCols = 0;
  std::vector<double> coeff;  // blocks row-major, blockSize^2 each, (u,v) row-major

  double& at(int br, int bc, int u, int v) {
    return coeff[(((std::size_t)br * gridCols + bc) * blockSize + u) * blockSize + v];
  }
  double at(int br, int bc, int u, int v) const {
    return coeff[(((std::size_t)br * gridCols + bc) * blockSize + u) * blockSize + v];
  }
};

// row-major n*n matrix, entry (u, x) = alpha(u) * cos(pi*(2x+1)*u / (2n))
// with alpha(0) = sqrt(1/n), alpha(u>0) = sqrt(2/n)
std::vector<double> dctBasisMatrix(int n);

// forward transform over non-overlapping blocks; the plane is edge-replicate
// padded up to a multiple of blockSize first
DctBlockGrid blockDct(const Plane& p, int blockSize);

// inverse transform; returns the padded-size plane, crop with cropPlane
Plane blockIdct(const DctBlockGrid& g);

Plane cropPlane(const Plane& p, int rows, int cols);

}  // namespace clt
