#include "gaugeflow/grid.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "gaugeflow/error.hpp"

namespace gaugeflow {

Grid::Grid(int dim, int res) : dim_(dim), res_(res) {
  if (dim < 2 || dim > kMaxDim) {
    throw Error("grid dimension must lie in [2, 4], got " + std::to_string(dim));
  }
  if (res < 8) throw Error("grid resolution must be at least 8, got " + std::to_string(res));
  if (res % 2 != 0) throw Error("grid resolution must be even, got " + std::to_string(res));
  std::uint64_t total = 1;
  for (int a = 0; a < dim; ++a) {
    total *= static_cast<std::uint64_t>(res);
    if (total > (std::uint64_t{1} << 31)) throw Error("grid has more than 2^31 points");
  }
  points_ = static_cast<std::size_t>(total);
  cell_volume_ = 1.0 / static_cast<double>(total);
}

std::array<int, Grid::kMaxDim> Grid::index(std::size_t point) const {
  std::array<int, kMaxDim> out{};
  for (int a = 0; a < dim_; ++a) {
    out[a] = static_cast<int>(point % res_);
    point /= res_;
  }
  return out;
}

double Grid::coordinate(std::size_t point, int axis) const {
  for (int a = 0; a < axis; ++a) point /= res_;
  return static_cast<double>(point % res_) / res_;
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

void enumerate(int n, int k, int start, IndexMask acc, std::vector<IndexMask>& out) {
  if (k == 0) {
    out.push_back(acc);
    return;
  }
  for (int i = start; i <= n - k; ++i) enumerate(n, k - 1, i + 1, acc | (1u << i), out);
}

}  // namespace

const std::vector<IndexMask>& form_basis(int n, int k) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<IndexMask>> cache;
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.try_emplace({n, k});
  if (inserted) enumerate(n, k, 0, 0, it->second);
  return it->second;
}

int component_index(int n, IndexMask mask) {
  const auto& basis = form_basis(n, std::popcount(mask));
  auto it = std::find(basis.begin(), basis.end(), mask);
  if (it == basis.end()) throw Error("multi-index outside the basis");
  return static_cast<int>(it - basis.begin());
}

int wedge_sign(IndexMask a, IndexMask b) {
  if ((a & b) != 0) return 0;
  // Count pairs (x in a, y in b) with x > y; each is one transposition.
  int inversions = 0;
  for (IndexMask rest = b; rest != 0; rest &= rest - 1) {
    int y = std::countr_zero(rest);
    inversions += std::popcount(a & ~((2u << y) - 1));
  }
  return inversions % 2 == 0 ? 1 : -1;
}

std::vector<int> mask_axes(IndexMask mask) {
  std::vector<int> axes;
  for (; mask != 0; mask &= mask - 1) axes.push_back(std::countr_zero(mask));
  return axes;
}

}  // namespace gaugeflow
