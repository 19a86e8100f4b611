#include "rdagraph/grids.hpp"

#include <stdexcept>
#include <string>

namespace rdag {

Grid2D::Grid2D(double half_width, int m) : L(half_width), M(m) {
  if (!(L > 0.0)) throw std::invalid_argument("Grid2D: L must be positive");
  if (M < 1) throw std::invalid_argument("Grid2D: M must be >= 1");
}

Point Grid2D::node(std::size_t k) const {
  const int s = side();
  const int i = static_cast<int>(k % s) - M + 1;
  const int j = static_cast<int>(k / s) - M + 1;
  return {i * h(), j * h()};
}

int index_k(int i, int j, int M) {
  if (M < 1 || i < 1 - M || i > M - 1 || j < 1 - M || j > M - 1) {
    throw std::out_of_range("index_k: (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside the interior for M = " + std::to_string(M));
  }
  return (i + M) + (j + M - 1) * (2 * M - 1);
}

std::pair<int, int> index_inverse(int k, int M) {
  const int s = 2 * M - 1;
  if (M < 1 || k < 1 || k > s * s) {
    throw std::out_of_range("index_inverse: k = " + std::to_string(k) + " out of range");
  }
  const int i = (k - 1) % s - M + 1;
  const int j = (k - i - M) / s + 1 - M;
  return {i, j};
}

GraphGrid::GraphGrid(double length, int m) : L(length), M(m) {
  if (!(L > 0.0)) throw std::invalid_argument("GraphGrid: L must be positive");
  if (M < 1) throw std::invalid_argument("GraphGrid: M must be >= 1");
}

}  // namespace rdag
