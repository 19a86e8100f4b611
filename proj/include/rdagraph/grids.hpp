#pragma once

#include <array>
#include <cstddef>
#include <utility>

namespace rdag {

using Point = std::array<double, 2>;

/// Interior nodes (ih, jh), 1-M <= i,j <= M-1, of the square [-L, L]^2 with h = L/M.
/// Boundary values are identically zero.
struct Grid2D {
  double L = 1.0;
  int M = 1;

  Grid2D() = default;
  Grid2D(double half_width, int m);

  double h() const { return L / M; }
  int side() const { return 2 * M - 1; }
  std::size_t n_interior() const { return static_cast<std::size_t>(side()) * side(); }

  /// Coordinates of the node with zero-based storage index k.
  Point node(std::size_t k) const;
};

/// One-based node numbering k(i, j) = (i+M) + (j+M-1)(2M-1); i runs fastest.
int index_k(int i, int j, int M);
/// Inverse of index_k.
std::pair<int, int> index_inverse(int k, int M);

/// Uniform partition z_i = ih, i = 0..M-1, of [0, L]; z_M = L carries a Dirichlet zero.
struct GraphGrid {
  double L = 1.0;
  int M = 2;

  GraphGrid() = default;
  GraphGrid(double length, int m);

  double h() const { return L / M; }
  double node(int i) const { return i * h(); }
  std::size_t size() const { return static_cast<std::size_t>(M); }
};

}  // namespace rdag
