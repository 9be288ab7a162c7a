#include "gaugeflow/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gaugeflow/calculus.hpp"
#include "gaugeflow/error.hpp"

namespace gaugeflow {

RearrangementProfile rearrange(std::span<const double> magnitudes, double weight) {
  RearrangementProfile profile;
  profile.weight = weight;
  profile.values.reserve(magnitudes.size());
  for (double v : magnitudes) profile.values.push_back(std::abs(v));
  std::ranges::sort(profile.values, std::greater<>());
  profile.cum.resize(profile.values.size());
  for (std::size_t i = 0; i < profile.cum.size(); ++i) profile.cum[i] = static_cast<double>(i + 1) * weight;
  return profile;
}

RearrangementProfile rearrange(const Form& form) {
  return rearrange(pointwise_norm(form), form.grid().cell_volume());
}

double lorentz_norm(const RearrangementProfile& profile, double p, double q) {
  if (!(p > 1.0) || std::isinf(p)) throw Error("lorentz_norm: exponent p must lie in (1, inf)");
  if (!(q >= 1.0)) throw Error("lorentz_norm: exponent q must be at least 1");
  const auto& f = profile.values;
  if (std::isinf(q)) {
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) best = std::max(best, std::pow(profile.cum[i], 1.0 / p) * f[i]);
    return best;
  }
  // On [t_{i-1}, t_i) with t_i = i w: int t^{q/p-1} dt = (p/q) w^{s} (i^s - (i-1)^s), s = q/p.
  // The increment is evaluated as i^s * -expm1(s log1p(-1/i)) to avoid cancellation.
  const double s = q / p;
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) break;
    const double idx = static_cast<double>(i + 1);
    const double increment = i == 0 ? 1.0 : std::pow(idx, s) * -std::expm1(s * std::log1p(-1.0 / idx));
    sum += std::pow(f[i], q) * increment;
  }
  return std::pow((p / q) * std::pow(profile.weight, s) * sum, 1.0 / q);
}

double lorentz_norm(const Form& form, double p, double q) { return lorentz_norm(rearrange(form), p, q); }

double gradient_lorentz_norm(const Form& form, double p, double q) {
  return lorentz_norm(rearrange(gradient_magnitude(form), form.grid().cell_volume()), p, q);
}

double sup_norm(const Form& form) {
  auto mags = pointwise_norm(form);
  return mags.empty() ? 0.0 : *std::ranges::max_element(mags);
}

}  // namespace gaugeflow
