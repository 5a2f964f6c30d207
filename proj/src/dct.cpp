#include "cltrojan/dct.hpp"

#include <cmath>
#include <stdexcept>

namespace clt {

std::vector<double> dctBasisMatrix(int n) {
  std::vector<double> B((std::size_t)n * n);
  double a0 = std::sqrt(1.0 / n), ak = std::sqrt(2.0 / n);
  for (int u = 0; u < n; u++) {
    double a = u == 0 ? a0 : ak;
    for (int x = 0; x < n; x++)
      B[(std::size_t)u * n + x] = a * std::cos(M_PI * (2 * x + 1) * u / (2.0 * n));
  }
  return B;
}

static Plane padReplicate(const Plane& p, int blockSize) {
  int pr = (p.rows + blockSize - 1) / blockSize * blockSize;
  int pc = (p.cols + blockSize - 1) / blockSize * blockSize;
  Plane out(pr, pc);
  for (int y = 0; y < pr; y++) {
    int sy = y < p.rows ? y : p.rows - 1;
    for (int x = 0; x < pc; x++) {
      int sx = x < p.cols ? x : p.cols - 1;
      out.at(y, x) = p.at(sy, sx);
    }
  }
  return out;
}

DctBlockGrid blockDct(const Plane& p, int blockSize) {
  if (blockSize < 2)
    throw std::invalid_argument("blockDct: blockSize must be at least 2");
  if (p.rows <= 0 || p.cols <= 0)
    throw std::invalid_argument("blockDct: empty plane");
  Plane padded = padReplicate(p, blockSize);
  DctBlockGrid g;
  g.blockSize = blockSize;
  g.paddedRows = padded.rows;
  g.paddedCols = padded.cols;
  g.gridRows = padded.rows / blockSize;
  g.gridCols = padded.cols / blockSize;
  g.coeff.assign((std::size_t)g.gridRows * g.gridCols * blockSize * blockSize, 0.0);

  std::vector<double> B = dctBasisMatrix(blockSize);
  int n = blockSize;
  std::vector<double> tmp((std::size_t)n * n);
  for (int br = 0; br < g.gridRows; br++) {
    for (int bc = 0; bc < g.gridCols; bc++) {
      // tmp = B * block   (separable: rows first)
      for (int u = 0; u < n; u++)
        for (int y = 0; y < n; y++) {
          double s = 0.0;
          for (int x = 0; x < n; x++)
            s += B[(std::size_t)u * n + x] * padded.at(br * n + x, bc * n + y);
          tmp[(std::size_t)u * n + y] = s;
        }
      // coeff = tmp * B^T
      for (int u = 0; u < n; u++)
        for (int v = 0; v < n; v++) {
          double s = 0.0;
          for (int y = 0; y < n; y++)
            s += tmp[(std::size_t)u * n + y] * B[(std::size_t)v * n + y];
          g.at(br, bc, u, v) = s;
        }
    }
  }
  return g;
}

Plane blockIdct(const DctBlockGrid& g) {
  if (g.blockSize < 2 || g.gridRows <= 0 || g.gridCols <= 0)
    throw std::invalid_argument("blockIdct: malformed grid");
  int n = g.blockSize;
  Plane out(g.paddedRows, g.paddedCols);
  std::vector<double> B = dctBasisMatrix(n);
  std::vector<double> tmp((std::size_t)n * n);
  for (int br = 0; br < g.gridRows; br++) {
    for (int bc = 0; bc < g.gridCols; bc++) {
      // tmp = B^T * coeff
      for (int x = 0; x < n; x++)
        for (int v = 0; v < n; v++) {
          double s = 0.0;
          for (int u = 0; u < n; u++)
            s += B[(std::size_t)u * n + x] * g.at(br, bc, u, v);
          tmp[(std::size_t)x * n + v] = s;
        }
      // block = tmp * B
      for (int x = 0; x < n; x++)
        for (int y = 0; y < n; y++) {
          double s = 0.0;
          for (int v = 0; v < n; v++)
            s += tmp[(std::size_t)x * n + v] * B[(std::size_t)v * n + y];
          out.at(br * n + x, bc * n + y) = s;
        }
    }
  }
  return out;
}

Plane cropPlane(const Plane& p, int rows, int cols) {
  if (rows > p.rows || cols > p.cols)
    throw std::invalid_argument("cropPlane: crop larger than plane");
  Plane out(rows, cols);
  for (int y = 0; y < rows; y++)
    for (int x = 0; x < cols; x++) out.at(y, x) = p.at(y, x);
  return out;
}

}  // namespace clt
