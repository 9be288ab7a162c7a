#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gaugeflow/grid.hpp"

namespace gaugeflow {

using Complex = std::complex<double>;

/// Real-to-half-complex transform of scalar fields on one grid, with the
/// spectral symbols of the calculus. Instances are shared per grid and are
/// safe to use from several threads.
///
/// Derivative symbols drop the Nyquist frequency on each axis, so the first
/// derivative is exactly skew-adjoint and the Laplacian symbol equals the sum
/// of squared derivative symbols.
class FourierTransform {
 public:
  static std::shared_ptr<const FourierTransform> for_grid(const Grid& grid);

  explicit FourierTransform(const Grid& grid);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  const Grid& grid() const { return grid_; }
  std::size_t modes() const { return modes_; }

  /// Unnormalized forward transform.
  void forward(std::span<const double> in, std::span<Complex> out) const;
  /// Inverse transform including the 1/points normalization.
  void inverse(std::span<const Complex> in, std::span<double> out) const;

  /// 2 pi kappa_axis per mode with the Nyquist frequency zeroed.
  std::span<const double> wavenumber(int axis) const { return wavenumbers_[axis]; }
  /// Symbol of -Laplacian, sum over axes of wavenumber^2.
  std::span<const double> laplacian_symbol() const { return laplacian_; }

 private:
  Grid grid_;
  std::size_t modes_ = 0;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
  std::vector<std::vector<double>> wavenumbers_;
  std::vector<double> laplacian_;
};

}  // namespace gaugeflow
