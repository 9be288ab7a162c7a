#pragma once

#include <cstdint>

#include "gaugeflow/form.hpp"

namespace gaugeflow {

/// Random trigonometric polynomial form: every scalar coefficient gets
/// independent complex normal Fourier amplitudes on the wave vectors with
/// 0 < |kappa|_inf <= band. Amplitudes are drawn in a fixed wave-vector order,
/// so a seed describes the same continuum form on every grid that resolves
/// the band (4 band <= res).
Form random_band_limited(const Grid& grid, int degree, ValueShape shape, std::uint64_t seed, int band);

}  // namespace gaugeflow
