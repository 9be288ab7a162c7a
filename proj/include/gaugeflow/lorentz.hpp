#pragma once

#include <limits>
#include <span>
#include <vector>

#include "gaugeflow/form.hpp"

namespace gaugeflow {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Decreasing rearrangement of a sampled magnitude field. Sample i occupies
/// [cum[i] - weight, cum[i]) of the measure axis.
struct RearrangementProfile {
  std::vector<double> values;  // nonincreasing
  double weight = 0.0;         // cell measure h^n
  std::vector<double> cum;     // i-th entry (i+1) * weight
};

RearrangementProfile rearrange(std::span<const double> magnitudes, double weight);
RearrangementProfile rearrange(const Form& form);

/// Lorentz quasi-norm (int_0^inf (t^{1/p} f*(t))^q dt/t)^{1/q}, integrated
/// exactly for the step function f*; q = kInfinity gives sup_t t^{1/p} f*(t).
/// Requires 1 < p < inf and q >= 1.
double lorentz_norm(const RearrangementProfile& profile, double p, double q);
double lorentz_norm(const Form& form, double p, double q);

/// Lorentz norm of the pointwise gradient magnitude |grad w|.
double gradient_lorentz_norm(const Form& form, double p, double q);

/// Largest pointwise magnitude.
double sup_norm(const Form& form);

}  // namespace gaugeflow
