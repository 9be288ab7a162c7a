#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace gaugeflow {

/// Uniform periodic grid on the unit torus [0,1)^n. Points are numbered with
/// axis 1 varying fastest.
class Grid {
 public:
  static constexpr int kMaxDim = 4;

  Grid() = default;
  Grid(int dim, int res);

  int dim() const { return dim_; }
  int res() const { return res_; }
  double spacing() const { return 1.0 / res_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t points() const { return points_; }

  /// Integer coordinates of a point, one entry per axis (unused entries are 0).
  std::array<int, kMaxDim> index(std::size_t point) const;
  /// Physical coordinate x_axis of a point.
  double coordinate(std::size_t point, int axis) const;

  bool operator==(const Grid& other) const { return dim_ == other.dim_ && res_ == other.res_; }
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int dim_ = 0;
  int res_ = 0;
  std::size_t points_ = 0;
  double cell_volume_ = 0.0;
};

/// Binomial coefficient C(n, k); zero outside 0 <= k <= n.
int binomial(int n, int k);

/// Increasing multi-indices are stored as bitmasks over {0, ..., n-1}.
using IndexMask = unsigned;

/// Increasing multi-indices of size k in lexicographic order; this is the
/// component order of every k-form.
const std::vector<IndexMask>& form_basis(int n, int k);

/// Position of a mask inside form_basis(n, popcount(mask)).
int component_index(int n, IndexMask mask);

/// Sign s with dx_a ^ dx_b = s dx_{a|b}; zero when a and b overlap.
int wedge_sign(IndexMask a, IndexMask b);

/// Axes contained in a mask, increasing.
std::vector<int> mask_axes(IndexMask mask);

}  // namespace gaugeflow
