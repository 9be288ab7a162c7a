#include "gaugeflow/random_forms.hpp"

#include <array>
#include <random>

#include "gaugeflow/error.hpp"
#include "gaugeflow/spectral.hpp"

namespace gaugeflow {

Form random_band_limited(const Grid& grid, int degree, ValueShape shape, std::uint64_t seed, int band) {
  const int n = grid.dim();
  const int res = grid.res();
  if (band < 1 || 4 * band > res) throw Error("random_band_limited: band not resolved by the grid");

  // Half-space: first nonzero entry (axis order 0..n-1) positive, so kappa_0 >= 0
  // matches the half-complex storage.
  std::vector<std::array<int, Grid::kMaxDim>> modes;
  const int side = 2 * band + 1;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= side;
  for (int code = 0; code < total; ++code) {
    std::array<int, Grid::kMaxDim> kappa{};
    int rest = code;
    for (int a = 0; a < n; ++a) {
      kappa[a] = rest % side - band;
      rest /= side;
    }
    int lead = 0;
    for (int a = 0; a < n && lead == 0; ++a) lead = kappa[a];
    if (lead > 0) modes.push_back(kappa);
  }

  auto mode_index = [&](const std::array<int, Grid::kMaxDim>& kappa) {
    std::size_t idx = 0;
    for (int a = n - 1; a >= 1; --a) idx = idx * res + static_cast<std::size_t>((kappa[a] % res + res) % res);
    return idx * (res / 2 + 1) + static_cast<std::size_t>(kappa[0]);
  };

  auto fft = FourierTransform::for_grid(grid);
  Form out(grid, degree, shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = static_cast<double>(grid.points());
  std::vector<Complex> spec(fft->modes());
  for (std::size_t s = 0; s < out.scalar_fields(); ++s) {
    std::ranges::fill(spec, Complex{});
    for (const auto& kappa : modes) {
      const double re = normal(rng);
      const double im = normal(rng);
      const Complex c = scale * Complex{re, im};
      spec[mode_index(kappa)] = c;
      if (kappa[0] == 0) {
        std::array<int, Grid::kMaxDim> neg{};
        for (int a = 0; a < n; ++a) neg[a] = -kappa[a];
        spec[mode_index(neg)] = std::conj(c);
      }
    }
    fft->inverse(spec, out.field(s));
  }
  return out;
}

}  // namespace gaugeflow
