#include "gaugeflow/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>

#include "gaugeflow/error.hpp"

namespace gaugeflow {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::shared_ptr<const FourierTransform> FourierTransform::for_grid(const Grid& grid) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const FourierTransform>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{grid.dim(), grid.res()}];
  if (!slot) slot = std::make_shared<const FourierTransform>(grid);
  return slot;
}

FourierTransform::FourierTransform(const Grid& grid) : grid_(grid) {
  const int n = grid.dim();
  const int res = grid.res();
  const int half = res / 2 + 1;
  modes_ = grid.points() / res * half;

  // FFTW is row-major with the last dimension fastest; our axis 0 is fastest.
  std::vector<int> dims(n, res);
  std::vector<double> real_buf(grid.points());
  std::vector<Complex> spec_buf(modes_);
  {
    std::lock_guard lock(planner_mutex());
    auto* spec = reinterpret_cast<fftw_complex*>(spec_buf.data());
    forward_plan_ = fftw_plan_dft_r2c(n, dims.data(), real_buf.data(), spec, FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_plan_ = fftw_plan_dft_c2r(n, dims.data(), spec, real_buf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) throw Error("FFTW planning failed");

  const double two_pi = 2.0 * std::numbers::pi;
  wavenumbers_.assign(n, std::vector<double>(modes_, 0.0));
  laplacian_.assign(modes_, 0.0);
  for (std::size_t mode = 0; mode < modes_; ++mode) {
    std::size_t rest = mode;
    double lap = 0.0;
    for (int a = 0; a < n; ++a) {
      int extent = a == 0 ? half : res;
      int idx = static_cast<int>(rest % extent);
      rest /= extent;
      int freq = idx <= res / 2 ? idx : idx - res;
      double k = (idx == res / 2) ? 0.0 : two_pi * freq;
      wavenumbers_[a][mode] = k;
      lap += k * k;
    }
    laplacian_[mode] = lap;
  }
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void FourierTransform::forward(std::span<const double> in, std::span<Complex> out) const {
  if (in.size() != grid_.points() || out.size() != modes_) throw Error("FFT size mismatch");
  // Out-of-place r2c transforms leave the input untouched.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void FourierTransform::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (in.size() != modes_ || out.size() != grid_.points()) throw Error("FFT size mismatch");
  std::vector<Complex> scratch(in.begin(), in.end());  // c2r destroys its input
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(grid_.points());
  for (double& v : out) v *= scale;
}

}  // namespace gaugeflow
